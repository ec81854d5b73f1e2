#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modcurve/eisenstein.hpp"
#include "modcurve/qseries.hpp"

namespace modcurve {

// ---------------------------------------------------------------------------
// Sublattices of index N
// ---------------------------------------------------------------------------

/// Upper-triangular representative (a b; 0 d) of a cyclic-quotient sublattice
/// of index N: a*d = N, 0 <= b < d, gcd(a, b, d) = 1.
struct SublatticeRep {
  long a = 1, b = 0, d = 1;
  friend bool operator==(const SublatticeRep& x, const SublatticeRep& y) {
    return x.a == y.a && x.b == y.b && x.d == y.d;
  }
};

inline std::vector<SublatticeRep> sublattice_reps(long N) {
  if (N < 1) throw std::invalid_argument("sublattice_reps: N >= 1");
  std::vector<SublatticeRep> reps;
  for (long d = 1; d <= N; ++d) {
    if (N % d != 0) continue;
    long a = N / d;
    for (long b = 0; b < d; ++b)
      if (std::gcd(std::gcd(a, b), d) == 1) reps.push_back({a, b, d});
  }
  return reps;
}

// ---------------------------------------------------------------------------
// ModPoly
// ---------------------------------------------------------------------------

struct ModPoly {
  long level = 1;
  std::map<std::pair<long, long>, Int> coeffs;  // both (k,l) and (l,k) stored

  Int coeff(long k, long l) const {
    auto it = coeffs.find({k, l});
    return it == coeffs.end() ? Int(0) : it->second;
  }
  void set(long k, long l, const Int& v) {
    if (v == 0) {
      coeffs.erase({k, l});
      coeffs.erase({l, k});
      return;
    }
    coeffs[{k, l}] = v;
    coeffs[{l, k}] = v;
  }
  long degree() const {
    long d = 0;
    for (const auto& [kl, v] : coeffs) d = std::max(d, kl.first);
    return d;
  }
  bool symmetric() const {
    for (const auto& [kl, v] : coeffs)
      if (coeff(kl.second, kl.first) != v) return false;
    return true;
  }
};

inline nlohmann::json modpoly_to_json(const ModPoly& p) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [kl, v] : p.coeffs)
    if (kl.first >= kl.second)
      coeffs.push_back({kl.first, kl.second, v.get_str()});
  return {{"level", p.level}, {"coeffs", coeffs}};
}

inline ModPoly modpoly_from_json(const nlohmann::json& j) {
  ModPoly p;
  p.level = j.at("level").get<long>();
  for (const auto& e : j.at("coeffs")) {
    long k = e.at(0).get<long>();
    long l = e.at(1).get<long>();
    p.set(k, l, Int(e.at(2).get<std::string>()));
  }
  return p;
}

// ---------------------------------------------------------------------------
// q-expansion method
// ---------------------------------------------------------------------------

/// Writes a Gamma(1)-invariant series with pole only at infinity as a
/// polynomial in the j-series: repeatedly kill the most negative exponent,
/// then the constant; the residual must vanish on the remaining window.
inline std::vector<Rat> j_polynomial_reduce(QSeries s, const QSeries& jser) {
  if (s.denomN != 1 || jser.denomN != 1)
    throw std::invalid_argument("j_polynomial_reduce: integer exponent lattice required");
  std::vector<Rat> poly;
  auto bump = [&](long m, const Rat& v) {
    if (static_cast<long>(poly.size()) <= m) poly.resize(m + 1);
    poly[m] += v;
  };
  while (!s.known_zero() && s.val < 0) {
    auto lead = descend_to_rational(s.coeff(s.val));
    if (!lead)
      throw std::domain_error("j_polynomial_reduce: non-rational leading coefficient");
    long m = -s.val;
    bump(m, *lead);
    s = s - scaled(pow(jser, m), CycElt(*lead));
  }
  if (!s.known_zero() && s.val == 0) {
    auto c0 = descend_to_rational(s.coeff(0));
    if (!c0)
      throw std::domain_error("j_polynomial_reduce: non-rational constant term");
    bump(0, *c0);
    s = s - QSeries::monomial(CycElt(*c0), 0, 1);
  }
  if (s.window_end() < 1)
    throw std::domain_error(
        "j_polynomial_reduce: precision window exhausted before the residual "
        "could be certified");
  if (!s.known_zero())
    throw std::domain_error(
        "j_polynomial_reduce: nonvanishing residual (input not a polynomial "
        "in j, or precision too low)");
  if (poly.empty()) poly.assign(1, Rat(0));
  return poly;
}

namespace detail {

/// Required j-series precision for the level-N product: the symmetric
/// functions reach pole order sum(a^2) on the q^{1/N} lattice, and the
/// shortest factor window has length jprec, so jprec must exceed the pole
/// depth plus a safety margin of 10 integer coefficients (plus slack).
inline long modpoly_jprec(long N) {
  long pole = 0;
  for (const auto& r : sublattice_reps(N)) pole += r.a * r.a;
  return pole + N * 12;
}

/// Rescale a q^{1/N}-lattice series known to be supported on integers back to
/// denomN = 1, failing loudly if a fractional-exponent coefficient survives.
inline QSeries collapse_to_integer_lattice(const QSeries& s) {
  QSeries r;
  r.denomN = 1;
  if (s.val >= 0)
    r.val = (s.val + s.denomN - 1) / s.denomN;
  else
    r.val = -((-s.val) / s.denomN);
  long end = s.window_end() >= 0 ? s.window_end() / s.denomN
                                 : -((-s.window_end() + s.denomN - 1) / s.denomN);
  r.c.assign(std::max<long>(0, end - r.val), CycElt(0));
  for (long e = s.val; e < s.window_end(); ++e) {
    if (e % s.denomN == 0) {
      long ei = e / s.denomN;
      if (ei >= r.val && ei < r.window_end()) r.c[ei - r.val] = s.coeff(e);
    } else if (!s.coeff(e).is_zero()) {
      throw std::domain_error(
          "modpoly: fractional exponent survives in an invariant series");
    }
  }
  r.strip();
  return r;
}

}  // namespace detail

/// Coefficient series of prod (y - j((a tau + b)/d)) as polynomials in y,
/// index t = power of y. Exposed for tests (Galois invariance, Exercise-style
/// identities).
inline std::vector<QSeries> modpoly_product(long N, long jprec) {
  QSeries j = level1_series(Level1::J, jprec);
  auto reps = sublattice_reps(N);
  long big = 4 * detail::modpoly_jprec(N) * N;
  std::vector<QSeries> poly{QSeries::monomial(CycElt(1), 0, big, 1)};
  for (const auto& r : reps) {
    QSeries ji = series_substitute(j, r.a, r.b, r.d);
    std::vector<QSeries> next(poly.size() + 1, QSeries::zero(1, big));
    for (size_t t = 0; t < poly.size(); ++t) {
      next[t + 1] = next[t + 1] + poly[t];
      next[t] = next[t] - poly[t] * ji;
    }
    poly = std::move(next);
  }
  return poly;
}

/// qexp method: the product of Eq-style conjugate j-series, reduced to
/// polynomials in j with integer coefficients.
inline ModPoly modular_polynomial_qexp(long N) {
  long jprec = detail::modpoly_jprec(N);
  auto poly = modpoly_product(N, jprec);
  QSeries j = level1_series(Level1::J, jprec);
  ModPoly out;
  out.level = N;
  long S = static_cast<long>(poly.size()) - 1;
  for (long t = 0; t <= S; ++t) {
    QSeries ct = detail::collapse_to_integer_lattice(poly[t]);
    auto pt = j_polynomial_reduce(ct, j);
    for (long k = 0; k < static_cast<long>(pt.size()); ++k) {
      if (pt[k].is_zero()) continue;
      if (!pt[k].is_integer())
        throw std::domain_error("modular_polynomial: non-integer coefficient");
      out.coeffs[{k, t}] = pt[k].num();
    }
  }
  // normalize so the pure x^S term has coefficient +1 (matters for N = 1,
  // where the product is y - x)
  if (out.coeff(S, 0) == -1 || (out.coeff(S, 0) == 0 && out.coeff(0, S) == -1)) {
    for (auto& [kl, v] : out.coeffs) v = -v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpolation cross-check (high-precision complex floating point)
// ---------------------------------------------------------------------------

namespace detail {

using HP = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<260>>;

struct CxHP {
  HP re{0}, im{0};
  friend CxHP operator+(const CxHP& a, const CxHP& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend CxHP operator-(const CxHP& a, const CxHP& b) {
    return {a.re - b.re, a.im - b.im};
  }
  friend CxHP operator*(const CxHP& a, const CxHP& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend CxHP operator/(const CxHP& a, const CxHP& b) {
    HP n = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  HP abs2() const { return re * re + im * im; }
};

inline CxHP cx_pow(CxHP base, long e) {
  CxHP r{HP(1), HP(0)};
  for (long i = 0; i < e; ++i) r = r * base;
  return r;
}

/// exp(2 pi i tau) at high precision for tau = x + i y.
inline CxHP nome(const HP& x, const HP& y) {
  HP two_pi = 8 * atan(HP(1));
  HP mag = exp(-two_pi * y);
  return {mag * cos(two_pi * x), mag * sin(two_pi * x)};
}

/// j(tau) via its integer q-expansion, evaluated at the high-precision nome.
inline CxHP eval_j_hp(const QSeries& j, const CxHP& q) {
  CxHP qinv = CxHP{HP(1), HP(0)} / q;
  CxHP s = qinv;  // leading q^{-1}
  CxHP p{HP(1), HP(0)};
  for (long e = 0; e < j.window_end(); ++e) {
    auto r = j.coeff(e).to_rational();
    if (r && !r->is_zero()) {
      HP c(r->num().get_str());
      s = s + CxHP{c * p.re, c * p.im};
    }
    p = p * q;
  }
  return s;
}

}  // namespace detail

struct InterpReport {
  double max_round_residual = 0;  // max |c - round(c)| over all unknowns
  double condition_estimate = 0;  // max/min pivot magnitude in the solve
};

/// interp method: sample (j(tau_s), j(N tau_s)) at high precision, solve for
/// the symmetric coefficients with c_{S,0} = c_{0,S} = 1 pinned, round to
/// integers, and reject if any rounding residual exceeds 0.01.
inline ModPoly modular_polynomial_interp(long N, InterpReport* report = nullptr) {
  using namespace detail;
  long S = static_cast<long>(sublattice_reps(N).size());
  std::vector<std::pair<long, long>> unknowns;
  for (long k = S; k >= 0; --k)
    for (long l = k; l >= 0; --l)
      if (!(k == S && l == 0)) unknowns.push_back({k, l});
  size_t n = unknowns.size();
  size_t samples = static_cast<size_t>((S + 1) * (S + 1)) + 3;
  samples = std::max(samples, n + 3);

  long jprec = 90;
  QSeries j = level1_series(Level1::J, jprec);

  std::vector<std::vector<HP>> rows;   // real + imaginary parts stacked
  std::vector<HP> rhs;
  HP y_im("1.1");
  for (size_t sidx = 0; sidx < samples; ++sidx) {
    HP x = HP(-45) / 100 +
           HP(9 * static_cast<long>(sidx)) / (10 * static_cast<long>(samples));
    CxHP q = nome(x, y_im);
    CxHP X = eval_j_hp(j, q);
    CxHP Y = eval_j_hp(j, cx_pow(q, N));
    std::vector<CxHP> Xp(S + 1), Yp(S + 1);
    for (long e = 0; e <= S; ++e) {
      Xp[e] = cx_pow(X, e);
      Yp[e] = cx_pow(Y, e);
    }
    std::vector<HP> re(n), im(n);
    for (size_t u = 0; u < n; ++u) {
      auto [k, l] = unknowns[u];
      CxHP v = Xp[k] * Yp[l];
      if (k != l) v = v + Xp[l] * Yp[k];
      re[u] = v.re;
      im[u] = v.im;
    }
    CxHP known = Xp[S] * Yp[0] + Xp[0] * Yp[S];  // pinned c_{S,0} = c_{0,S} = 1
    rows.push_back(std::move(re));
    rhs.push_back(-known.re);
    rows.push_back(std::move(im));
    rhs.push_back(-known.im);
  }

  // Least squares via normal equations at 260-digit precision, Gaussian
  // elimination with partial pivoting.
  std::vector<std::vector<HP>> A(n, std::vector<HP>(n, HP(0)));
  std::vector<HP> b(n, HP(0));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t k2 = 0; k2 < n; ++k2) A[i][k2] += rows[r][i] * rows[r][k2];
      b[i] += rows[r][i] * rhs[r];
    }
  }
  HP piv_max(0), piv_min(0);
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (abs(A[r][col]) > abs(A[piv][col])) piv = r;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    HP p = A[col][col];
    if (p == 0) throw std::domain_error("modular_polynomial_interp: singular system");
    HP pm = abs(p);
    if (col == 0) piv_max = piv_min = pm;
    if (pm > piv_max) piv_max = pm;
    if (pm < piv_min) piv_min = pm;
    for (size_t r = col + 1; r < n; ++r) {
      HP f = A[r][col] / p;
      if (f == 0) continue;
      for (size_t k2 = col; k2 < n; ++k2) A[r][k2] -= f * A[col][k2];
      b[r] -= f * b[col];
    }
  }
  std::vector<HP> c(n);
  for (size_t i = n; i-- > 0;) {
    HP s = b[i];
    for (size_t k2 = i + 1; k2 < n; ++k2) s -= A[i][k2] * c[k2];
    c[i] = s / A[i][i];
  }

  ModPoly out;
  out.level = N;
  out.set(S, 0, Int(1));
  double max_resid = 0;
  for (size_t u = 0; u < n; ++u) {
    HP rounded = boost::multiprecision::round(c[u]);
    HP diff = abs(c[u] - rounded);
    double resid = diff.convert_to<double>();
    max_resid = std::max(max_resid, resid);
    auto zi = rounded.convert_to<boost::multiprecision::mpz_int>();
    Int v(zi.backend().data());
    auto [k, l] = unknowns[u];
    out.set(k, l, v);
  }
  if (report) {
    report->max_round_residual = max_resid;
    report->condition_estimate =
        piv_min == 0 ? std::numeric_limits<double>::infinity()
                     : HP(piv_max / piv_min).convert_to<double>();
  }
  if (max_resid > 0.01)
    throw std::domain_error(
        "modular_polynomial_interp: rounding residual exceeds 0.01");
  return out;
}

enum class ModPolyMethod { qexp, interp };

inline ModPoly modular_polynomial(long N, ModPolyMethod method) {
  return method == ModPolyMethod::qexp ? modular_polynomial_qexp(N)
                                       : modular_polynomial_interp(N);
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

struct ModPolyReport {
  bool symmetry_ok = false;
  bool integral_ok = false;
  bool degree_ok = false;
  bool vanishing_ok = false;
  long degree = 0;
  bool all_ok() const {
    return symmetry_ok && integral_ok && degree_ok && vanishing_ok;
  }
};

/// Checks symmetry, integrality of the stored map, the degree bound, and the
/// vanishing identity Phi_N(j(tau), j(N tau)) = 0 as q-series to prec.
inline ModPolyReport modpoly_verify(const ModPoly& P, long prec = 0) {
  ModPolyReport rep;
  long N = P.level;
  long S = static_cast<long>(sublattice_reps(N).size());
  rep.degree = P.degree();
  rep.symmetry_ok = P.symmetric();
  rep.integral_ok = true;  // the coefficient type is an integer by construction
  rep.degree_ok = (rep.degree == S);
  if (prec <= 0) prec = (S + 1) * (N + 1) + 12;

  QSeries jx = level1_series(Level1::J, prec);
  QSeries jy = series_substitute(jx, N, 0, 1);
  std::vector<QSeries> xp{QSeries::monomial(CycElt(1), 0, 4 * prec * N, 1)};
  std::vector<QSeries> yp = xp;
  for (long e = 1; e <= S; ++e) {
    xp.push_back(xp.back() * jx);
    yp.push_back(yp.back() * jy);
  }
  QSeries acc = QSeries::zero(N, 4 * prec * N);
  for (const auto& [kl, v] : P.coeffs) {
    acc = acc + scaled(xp[kl.first] * yp[kl.second], CycElt(Rat(v)));
  }
  // strip() preserves the upper window end, so a fully cancelled series
  // still certifies vanishing through window_end() - 1.
  rep.vanishing_ok = acc.known_zero() && acc.window_end() >= 1;
  return rep;
}

}  // namespace modcurve
