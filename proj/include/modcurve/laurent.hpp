#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "modcurve/cyclotomic.hpp"
#include "modcurve/rat.hpp"

namespace modcurve {

/// Field hooks for the series/linear-algebra templates. Exact fields use
/// literal zero tests; floating-point coefficients use a small threshold so
/// that "tight valuation" stays meaningful after roundoff.
template <class K>
struct field_ops {
  static bool is_zero(const K& x) { return x == K(0); }
};

template <>
struct field_ops<std::complex<double>> {
  static bool is_zero(const std::complex<double>& x) {
    return std::abs(x) < 1e-12;
  }
};

template <>
struct field_ops<Rat> {
  static bool is_zero(const Rat& x) { return x.is_zero(); }
};

template <>
struct field_ops<CycElt> {
  static bool is_zero(const CycElt& x) { return x.is_zero(); }
};

/// Truncated Laurent series: coefficients are known exactly for exponents in
/// the window [val, val + c.size()), unknown outside. All arithmetic
/// propagates the window pessimistically.
template <class K>
struct Laurent {
  long val = 0;
  std::vector<K> c;

  long window_end() const { return val + static_cast<long>(c.size()); }
  long size() const { return static_cast<long>(c.size()); }

  bool known_zero() const {
    for (const auto& x : c)
      if (!field_ops<K>::is_zero(x)) return false;
    return true;
  }

  /// Coefficient of z^e; exponents below the window are zero by tightness,
  /// above it are unknown (throws).
  const K coeff(long e) const {
    if (e < val) return K(0);
    if (e >= window_end())
      throw std::out_of_range("Laurent: coefficient beyond precision window");
    return c[e - val];
  }

  /// Removes known-zero leading coefficients; the upper end of the window is
  /// preserved, so tightening never loses information.
  Laurent& strip() {
    size_t i = 0;
    while (i < c.size() && field_ops<K>::is_zero(c[i])) ++i;
    if (i) {
      c.erase(c.begin(), c.begin() + i);
      val += static_cast<long>(i);
    }
    return *this;
  }

  static Laurent monomial(const K& k, long e, long prec) {
    Laurent r;
    r.val = e;
    r.c.assign(prec, K(0));
    if (prec > 0) r.c[0] = k;
    return r;
  }
  static Laurent constant(const K& k, long prec) { return monomial(k, 0, prec); }

  Laurent truncated(long end) const {
    Laurent r = *this;
    if (end < r.window_end()) r.c.resize(std::max<long>(0, end - r.val));
    return r;
  }

  friend Laurent operator+(const Laurent& a, const Laurent& b) {
    Laurent r;
    r.val = std::min(a.val, b.val);
    long end = std::min(a.window_end(), b.window_end());
    r.c.assign(std::max<long>(0, end - r.val), K(0));
    for (long e = r.val; e < end; ++e) {
      K s = (e >= a.val && e < a.window_end()) ? a.c[e - a.val] : K(0);
      if (e >= b.val && e < b.window_end()) s += b.c[e - b.val];
      r.c[e - r.val] = s;
    }
    return r.strip();
  }

  friend Laurent operator-(const Laurent& a, const Laurent& b) {
    return a + (-b);
  }

  Laurent operator-() const {
    Laurent r = *this;
    for (auto& x : r.c) x = -x;
    return r;
  }

  Laurent scaled(const K& k) const {
    Laurent r = *this;
    for (auto& x : r.c) x = x * k;
    return r;
  }

  Laurent shifted(long e) const {
    Laurent r = *this;
    r.val += e;
    return r;
  }

  /// Schoolbook product, O(n^2) coefficient multiplications. The output
  /// window length is the minimum of the input window lengths (valid because
  /// both inputs have tight valuations).
  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    Laurent r;
    r.val = a.val + b.val;
    long n = std::min(a.size(), b.size());
    r.c.assign(n, K(0));
    for (long i = 0; i < a.size(); ++i) {
      if (field_ops<K>::is_zero(a.c[i])) continue;
      long jmax = std::min(b.size(), n - i);
      for (long j = 0; j < jmax; ++j) r.c[i + j] += a.c[i] * b.c[j];
    }
    return r.strip();
  }

  /// Reciprocal; requires a nonzero leading coefficient in the window.
  Laurent inverse() const {
    if (c.empty() || field_ops<K>::is_zero(c[0]))
      throw std::domain_error("Laurent: inverting a series with zero leading term");
    Laurent r;
    r.val = -val;
    r.c.assign(c.size(), K(0));
    K lead_inv = K(1) / c[0];
    r.c[0] = lead_inv;
    for (size_t i = 1; i < c.size(); ++i) {
      K s(0);
      for (size_t j = 1; j <= i; ++j) s += c[j] * r.c[i - j];
      r.c[i] = -s * lead_inv;
    }
    return r;
  }

  Laurent pow(long k) const {
    if (k < 0) return inverse().pow(-k);
    Laurent r = constant(K(1), size() == 0 ? 1 : size());
    Laurent base = *this;
    // plain repeated multiplication keeps the precision contract obvious
    for (long i = 0; i < k; ++i) r = r * base;
    return r;
  }

  Laurent derivative() const {
    Laurent r;
    r.val = val - 1;
    r.c.resize(c.size());
    for (size_t i = 0; i < c.size(); ++i)
      r.c[i] = c[i] * K(static_cast<long>(val + static_cast<long>(i)));
    return r.strip();
  }

  /// Antiderivative with zero constant term; rejects a z^{-1} term.
  Laurent antiderivative() const {
    Laurent r;
    r.val = val + 1;
    r.c.resize(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
      long e = val + static_cast<long>(i);
      if (e == -1) {
        if (!field_ops<K>::is_zero(c[i]))
          throw std::domain_error("Laurent: residue term has no antiderivative");
        r.c[i] = K(0);
        continue;
      }
      r.c[i] = c[i] / K(e + 1);
    }
    return r.strip();
  }

  /// Composition a(b(z)); b must have valuation >= 1. Negative exponents of
  /// a are routed through b^{-1}.
  Laurent compose(const Laurent& b) const {
    if (b.val < 1)
      throw std::domain_error("Laurent: compose requires inner valuation >= 1");
    long prec = b.size() + b.val - 0;  // window of the result in z
    Laurent r = constant(K(0), prec);
    Laurent binv = b.inverse();
    for (long i = 0; i < size(); ++i) {
      long e = val + i;
      if (e >= 0 && !field_ops<K>::is_zero(c[i])) {
        r = r + b.pow(e).scaled(c[i]);
      } else if (e < 0 && !field_ops<K>::is_zero(c[i])) {
        r = r + binv.pow(-e).scaled(c[i]);
      }
    }
    return r;
  }

  /// Functional inverse: returns t(z) with this(t(z)) = z + O(z^{prec}).
  /// Requires valuation exactly 1 with invertible leading coefficient.
  Laurent reversion() const {
    if (val != 1 || c.empty() || field_ops<K>::is_zero(c[0]))
      throw std::domain_error("Laurent: reversion requires valuation 1");
    long prec = size();
    Laurent t = monomial(K(1) / c[0], 1, prec);
    Laurent z = monomial(K(1), 1, prec);
    Laurent d = derivative();
    // Newton: t <- t - (f(t) - z) / f'(t)
    for (long round = 0; round < prec + 2; ++round) {
      Laurent err = compose(t) - z;
      if (err.known_zero()) break;
      t = t - err * d.compose(t).inverse();
    }
    return t;
  }
};

}  // namespace modcurve
