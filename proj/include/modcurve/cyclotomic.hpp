#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "modcurve/rat.hpp"

namespace modcurve {

namespace detail {

/// N-th cyclotomic polynomial over Z, dense ascending coefficients.
/// Computed as (x^N - 1) / prod_{d | N, d < N} Phi_d and cached.
inline const std::vector<Int>& cyclotomic_poly(int n) {
  static std::map<int, std::vector<Int>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Exact division of integer polynomials, quotient must be exact.
  auto divide = [](std::vector<Int> num, const std::vector<Int>& den) {
    std::vector<Int> q(num.size() - den.size() + 1);
    for (long i = static_cast<long>(q.size()) - 1; i >= 0; --i) {
      Int c = num[i + den.size() - 1] / den.back();
      q[i] = c;
      for (size_t j = 0; j < den.size(); ++j) num[i + j] -= c * den[j];
    }
    return q;
  };

  std::function<const std::vector<Int>&(int)> get = [&](int m) -> const std::vector<Int>& {
    auto jt = cache.find(m);
    if (jt != cache.end()) return jt->second;
    std::vector<Int> num(m + 1);
    num[0] = -1;
    num[m] = 1;
    for (int d = 1; d < m; ++d)
      if (m % d == 0) num = divide(std::move(num), get(d));
    return cache.emplace(m, std::move(num)).first->second;
  };
  return get(n);
}

inline long euler_phi(int n) {
  long r = n;
  int m = n;
  for (int p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      r -= r / p;
      while (m % p == 0) m /= p;
    }
  }
  if (m > 1) r -= r / m;
  return r;
}

}  // namespace detail

/// Element of the cyclotomic field Q(zeta_N), stored in canonical form as a
/// polynomial in zeta_N of degree < phi(N) (reduced modulo the N-th
/// cyclotomic polynomial). Two elements are equal iff their canonical
/// vectors (after lifting to a common level) are equal.
class CycElt {
 public:
  CycElt() : level_(1), c_(1) {}
  /*implicit*/ CycElt(const Rat& r) : level_(1), c_{r} {}
  /*implicit*/ CycElt(long n) : level_(1), c_{Rat(n)} {}

  /// From an arbitrary exponent vector sum c_i zeta_N^i (any length); reduces.
  static CycElt from_powers(int level, std::vector<Rat> powers) {
    CycElt e;
    e.level_ = level;
    e.c_ = reduce(level, std::move(powers));
    return e;
  }

  static CycElt zeta(int level, long power) {
    power %= level;
    if (power < 0) power += level;
    std::vector<Rat> p(power + 1);
    p[power] = Rat(1);
    return from_powers(level, std::move(p));
  }

  int level() const { return level_; }
  const std::vector<Rat>& coeffs() const { return c_; }

  bool is_zero() const {
    for (const auto& x : c_)
      if (!x.is_zero()) return false;
    return true;
  }

  bool is_rational() const {
    for (size_t i = 1; i < c_.size(); ++i)
      if (!c_[i].is_zero()) return false;
    return true;
  }

  /// Returns the rational value if this element lies in Q.
  std::optional<Rat> to_rational() const {
    if (!is_rational()) return std::nullopt;
    return c_.empty() ? Rat(0) : c_[0];
  }

  /// Re-expresses this element in Q(zeta_M) for a multiple M of the level.
  CycElt lift(int new_level) const {
    if (new_level == level_) return *this;
    if (new_level % level_ != 0)
      throw std::invalid_argument("CycElt::lift: level must be a multiple");
    long stride = new_level / level_;
    std::vector<Rat> p(static_cast<size_t>(level_) * stride);
    for (size_t i = 0; i < c_.size(); ++i) p[i * stride] = c_[i];
    return from_powers(new_level, std::move(p));
  }

  /// Drops to level 1 when rational (used to keep series levels tight).
  CycElt compress() const {
    if (level_ > 1 && is_rational()) return CycElt(c_.empty() ? Rat(0) : c_[0]);
    return *this;
  }

  friend CycElt operator+(const CycElt& a, const CycElt& b) {
    auto [x, y] = aligned(a, b);
    for (size_t i = 0; i < y.c_.size(); ++i) x.c_[i] += y.c_[i];
    return x;
  }
  friend CycElt operator-(const CycElt& a, const CycElt& b) {
    auto [x, y] = aligned(a, b);
    for (size_t i = 0; i < y.c_.size(); ++i) x.c_[i] -= y.c_[i];
    return x;
  }
  CycElt operator-() const {
    CycElt r = *this;
    for (auto& x : r.c_) x = -x;
    return r;
  }
  friend CycElt operator*(const CycElt& a, const CycElt& b) {
    auto [x, y] = aligned(a, b);
    std::vector<Rat> prod(x.c_.size() + y.c_.size());
    for (size_t i = 0; i < x.c_.size(); ++i) {
      if (x.c_[i].is_zero()) continue;
      for (size_t j = 0; j < y.c_.size(); ++j) {
        if (!y.c_[j].is_zero()) prod[i + j] += x.c_[i] * y.c_[j];
      }
    }
    return from_powers(x.level_, std::move(prod));
  }
  friend CycElt operator/(const CycElt& a, const CycElt& b) {
    return a * b.inverse();
  }
  CycElt& operator+=(const CycElt& o) { return *this = *this + o; }
  CycElt& operator-=(const CycElt& o) { return *this = *this - o; }
  CycElt& operator*=(const CycElt& o) { return *this = *this * o; }
  CycElt& operator/=(const CycElt& o) { return *this = *this / o; }

  friend bool operator==(const CycElt& a, const CycElt& b) {
    auto [x, y] = aligned(a, b);
    return x.c_ == y.c_;
  }
  friend bool operator!=(const CycElt& a, const CycElt& b) { return !(a == b); }

  /// Multiplicative inverse via the extended Euclidean algorithm in
  /// Q[x]/(Phi_N).
  CycElt inverse() const {
    if (is_zero()) throw std::domain_error("CycElt: division by zero");
    if (is_rational()) return CycElt(c_[0].inverse());
    // r0 = Phi_N, r1 = this; maintain t0, t1 with t*this = r (mod Phi_N).
    const auto& phi = detail::cyclotomic_poly(level_);
    std::vector<Rat> r0(phi.begin(), phi.end());
    std::vector<Rat> r1 = trimmed(c_);
    std::vector<Rat> t0, t1{Rat(1)};
    while (!r1.empty()) {
      // divide r0 by r1
      std::vector<Rat> q;
      std::vector<Rat> rem = r0;
      if (rem.size() >= r1.size()) {
        q.assign(rem.size() - r1.size() + 1, Rat(0));
        for (long i = static_cast<long>(q.size()) - 1; i >= 0; --i) {
          Rat f = rem[i + r1.size() - 1] / r1.back();
          q[i] = f;
          for (size_t j = 0; j < r1.size(); ++j) rem[i + j] -= f * r1[j];
        }
      }
      rem = trimmed(rem);
      // (t0, t1) <- (t1, t0 - q*t1)
      std::vector<Rat> t2 = t0;
      t2.resize(std::max(t2.size(), q.size() + t1.size()), Rat(0));
      for (size_t i = 0; i < q.size(); ++i)
        for (size_t j = 0; j < t1.size(); ++j) t2[i + j] -= q[i] * t1[j];
      t0 = std::move(t1);
      t1 = trimmed(t2);
      r0 = std::move(r1);
      r1 = std::move(rem);
    }
    // r0 is the gcd, a nonzero constant (Phi_N is irreducible).
    if (r0.size() != 1)
      throw std::logic_error("CycElt: nonunit gcd against cyclotomic polynomial");
    CycElt out;
    out.level_ = level_;
    for (auto& x : t0) x /= r0[0];
    out.c_ = reduce(level_, std::move(t0));
    return out;
  }

  /// Galois automorphism sigma_t: zeta_N -> zeta_N^t, gcd(t, N) = 1.
  CycElt galois(long t) const {
    long tm = t % level_;
    if (tm < 0) tm += level_;
    if (std::gcd(tm, static_cast<long>(level_)) != 1)
      throw std::invalid_argument("CycElt::galois: t not coprime to level");
    std::vector<Rat> p(level_);
    for (size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i].is_zero()) p[(i * tm) % level_] += c_[i];
    }
    return from_powers(level_, std::move(p));
  }

  /// True iff fixed by every Galois automorphism; equivalent to is_rational()
  /// in canonical form, kept as the semantic entry point.
  bool galois_invariant() const { return is_rational(); }

  std::complex<double> to_complex() const {
    std::complex<double> s = 0;
    for (size_t i = 0; i < c_.size(); ++i) {
      if (c_[i].is_zero()) continue;
      double ang = 2.0 * M_PI * static_cast<double>(i) / level_;
      s += c_[i].to_double() * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    return s;
  }

  /// Sum of c_i * zeta^i with a caller-supplied primitive level-th root.
  template <class C>
  C embed(const C& zeta_level) const {
    C s(0);
    C p(1);
    for (size_t i = 0; i < c_.size(); ++i) {
      if (!c_[i].is_zero()) s += p * ratio_as<C>(c_[i]);
      p = p * zeta_level;
    }
    return s;
  }

  /// "c0 + c1*z + ... (mod N)", every canonical coefficient printed as p/q.
  std::string str() const {
    std::ostringstream os;
    for (size_t i = 0; i < c_.size(); ++i) {
      if (i) os << " + ";
      os << c_[i].str();
      if (i == 1) os << "*z";
      if (i > 1) os << "*z^" << i;
    }
    os << " (mod " << level_ << ")";
    return os.str();
  }

  static CycElt parse(const std::string& text) {
    auto mod_pos = text.rfind("(mod ");
    if (mod_pos == std::string::npos)
      throw std::invalid_argument("CycElt::parse: missing (mod N)");
    int level = std::stoi(text.substr(mod_pos + 5));
    std::string body = text.substr(0, mod_pos);
    std::vector<Rat> p(level, Rat(0));
    size_t pos = 0;
    size_t idx = 0;
    while (pos < body.size()) {
      size_t next = body.find(" + ", pos);
      std::string term = body.substr(pos, next == std::string::npos
                                              ? std::string::npos
                                              : next - pos);
      // term is "p/q", "p/q*z" or "p/q*z^e"
      size_t star = term.find('*');
      std::string coeff = term.substr(0, star);
      size_t e = idx;
      if (star != std::string::npos) {
        size_t caret = term.find('^', star);
        e = (caret == std::string::npos) ? 1 : std::stoul(term.substr(caret + 1));
      }
      while (!coeff.empty() && coeff.back() == ' ') coeff.pop_back();
      while (!coeff.empty() && coeff.front() == ' ') coeff.erase(coeff.begin());
      if (e >= p.size()) throw std::invalid_argument("CycElt::parse: exponent");
      p[e] = Rat::parse(coeff);
      if (next == std::string::npos) break;
      pos = next + 3;
      ++idx;
    }
    return from_powers(level, std::move(p));
  }

 private:
  template <class C>
  static C ratio_as(const Rat& r);

  static std::vector<Rat> trimmed(std::vector<Rat> v) {
    while (!v.empty() && v.back().is_zero()) v.pop_back();
    return v;
  }

  static std::vector<Rat> reduce(int level, std::vector<Rat> p) {
    // first fold exponents mod level (zeta^N = 1), then reduce mod Phi_N
    size_t nl = static_cast<size_t>(level);
    if (p.size() > nl) {
      for (size_t i = p.size(); i-- > nl;) {
        p[i % nl] += p[i];
      }
      p.resize(nl);
    }
    const auto& phi = detail::cyclotomic_poly(level);
    size_t deg = phi.size() - 1;  // = euler_phi(level)
    for (size_t i = p.size(); i-- > deg;) {
      if (p[i].is_zero()) continue;
      Rat f = p[i];  // phi is monic
      for (size_t j = 0; j < phi.size(); ++j)
        p[i - deg + j] -= f * Rat(phi[j]);
    }
    p.resize(deg);
    return p;
  }

  static std::pair<CycElt, CycElt> aligned(const CycElt& a, const CycElt& b) {
    if (a.level_ == b.level_) return {a, b};
    int l = static_cast<int>(lcm_long(a.level_, b.level_));
    return {a.lift(l), b.lift(l)};
  }

  int level_;
  std::vector<Rat> c_;
};

template <>
inline std::complex<double> CycElt::ratio_as<std::complex<double>>(const Rat& r) {
  return {r.to_double(), 0.0};
}

enum class CycOp { add, sub, mul, div };

/// Spec-level entry point for field arithmetic with explicit level checking.
inline CycElt cyc_arith(const CycElt& a, const CycElt& b, CycOp op) {
  if (a.level() != b.level())
    throw std::invalid_argument("cyc_arith: level mismatch");
  switch (op) {
    case CycOp::add: return a + b;
    case CycOp::sub: return a - b;
    case CycOp::mul: return a * b;
    case CycOp::div: return a / b;
  }
  throw std::logic_error("cyc_arith: bad op");
}

inline CycElt galois_apply(const CycElt& a, long t) { return a.galois(t); }

inline std::optional<Rat> descend_to_rational(const CycElt& a) {
  return a.to_rational();
}

}  // namespace modcurve
