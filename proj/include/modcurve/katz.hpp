#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "modcurve/eisenstein.hpp"
#include "modcurve/laurent.hpp"
#include "modcurve/rat.hpp"

namespace modcurve {

// ---------------------------------------------------------------------------
// Curves, points, divisors (templated: Rat for exact mode, complex<double>
// for oracle mode)
// ---------------------------------------------------------------------------

namespace detail {
template <class K>
struct katz_eq {
  static bool eq(const K& a, const K& b) {
    return field_ops<K>::is_zero(a - b);
  }
};
template <>
struct katz_eq<std::complex<double>> {
  static bool eq(const std::complex<double>& a, const std::complex<double>& b) {
    return std::abs(a - b) < 1e-9 * (1.0 + std::abs(a) + std::abs(b));
  }
};
}  // namespace detail

/// Short Weierstrass curve y^2 = x^3 + a x + b over an exact field or, in
/// oracle mode, complex doubles.
template <class K>
struct EllCurve {
  K a, b;
  EllCurve(const K& a_, const K& b_) : a(a_), b(b_) {
    K disc = K(4) * a * a * a + K(27) * b * b;
    if (field_ops<K>::is_zero(disc))
      throw std::invalid_argument("EllCurve: singular curve");
  }
};

using EllCurveQ = EllCurve<Rat>;

template <class K>
struct CurvePoint {
  bool infinity = true;
  K x{}, y{};
  static CurvePoint origin() { return {}; }
  static CurvePoint affine(const K& x, const K& y) { return {false, x, y}; }
  CurvePoint operator-() const {
    return infinity ? *this : affine(x, -y);
  }
};

template <class K>
bool point_eq(const CurvePoint<K>& p, const CurvePoint<K>& q) {
  if (p.infinity || q.infinity) return p.infinity == q.infinity;
  return detail::katz_eq<K>::eq(p.x, q.x) && detail::katz_eq<K>::eq(p.y, q.y);
}

/// y^2 - (x^3 + ax + b); zero (to the field's tolerance) iff P is on E.
template <class K>
K curve_residual(const EllCurve<K>& E, const CurvePoint<K>& P) {
  if (P.infinity) return K(0);
  return P.y * P.y - (P.x * P.x * P.x + E.a * P.x + E.b);
}

template <class K>
CurvePoint<K> ell_add(const EllCurve<K>& E, const CurvePoint<K>& P,
                      const CurvePoint<K>& Q) {
  if (P.infinity) return Q;
  if (Q.infinity) return P;
  K lam;
  if (detail::katz_eq<K>::eq(P.x, Q.x)) {
    if (detail::katz_eq<K>::eq(P.y, -Q.y)) return CurvePoint<K>::origin();
    lam = (K(3) * P.x * P.x + E.a) / (K(2) * P.y);
  } else {
    lam = (Q.y - P.y) / (Q.x - P.x);
  }
  K x3 = lam * lam - P.x - Q.x;
  K y3 = lam * (P.x - x3) - P.y;
  return CurvePoint<K>::affine(x3, y3);
}

template <class K>
CurvePoint<K> ell_multiple(const EllCurve<K>& E, const CurvePoint<K>& P,
                           long m) {
  CurvePoint<K> r = CurvePoint<K>::origin();
  CurvePoint<K> base = m < 0 ? -P : P;
  for (long i = 0; i < std::abs(m); ++i) r = ell_add(E, r, base);
  return r;
}

template <class K>
struct DivTerm {
  CurvePoint<K> P;
  long m = 0;
};

template <class K>
using PointDivisor = std::vector<DivTerm<K>>;

/// Degree zero and group-sum zero: the two conditions that make D principal.
template <class K>
bool is_principal(const EllCurve<K>& E, const PointDivisor<K>& D) {
  long deg = 0;
  CurvePoint<K> sum = CurvePoint<K>::origin();
  for (const auto& t : D) {
    deg += t.m;
    sum = ell_add(E, sum, ell_multiple(E, t.P, t.m));
  }
  return deg == 0 && sum.infinity;
}

// ---------------------------------------------------------------------------
// Formal expansion at the origin
// ---------------------------------------------------------------------------

/// x and y as Laurent series in the analytic uniformizer z normalized by
/// omega = dx/(2y) = dz; xz = z^{-2} + ..., yz = -z^{-3} (1 + O(z^2)).
template <class K>
struct FormalExpansion {
  Laurent<K> xz, yz;
  long prec = 0;
};

/// Solve the curve equation recursively in the algebraic uniformizer
/// t = x/y (u = 1/y satisfies u = t^3 + a t u^2 + b u^3), reparametrize by
/// z = integral of omega.
template <class K>
FormalExpansion<K> formal_weierstrass_expansion(const EllCurve<K>& E,
                                                long prec) {
  if (prec < 4)
    throw std::invalid_argument("formal_weierstrass_expansion: prec >= 4");
  long P = prec + 6;
  Laurent<K> t = Laurent<K>::monomial(K(1), 1, P);
  Laurent<K> t3 = Laurent<K>::monomial(K(1), 3, P);
  Laurent<K> u = t3;
  for (long it = 0; it < P + 4; ++it) {
    Laurent<K> u2 = u * u;
    u = t3 + (t * u2).scaled(E.a) + (u2 * u).scaled(E.b);
  }
  Laurent<K> y = u.inverse();
  Laurent<K> x = t * y;
  Laurent<K> om = x.derivative() * y.scaled(K(2)).inverse();
  Laurent<K> z = om.antiderivative();
  Laurent<K> tz = z.reversion();
  FormalExpansion<K> fe;
  fe.xz = x.compose(tz).truncated(prec);
  fe.yz = y.compose(tz).truncated(prec);
  fe.prec = prec;
  return fe;
}

// ---------------------------------------------------------------------------
// Divisor functions via chord accumulation
// ---------------------------------------------------------------------------

/// One factor (cx*x + cy*y + c0)^exp of phi_D, together with its exact
/// divisor (recorded at construction, when the intersection points are known).
template <class K>
struct LineFunction {
  K cx{}, cy{}, c0{};
  long exp = 1;
  PointDivisor<K> div;  // divisor of the line itself (exp not applied)
};

template <class K>
struct DivisorFunction {
  EllCurve<K> E;
  std::vector<LineFunction<K>> lines;

  /// Value of phi_D at an affine point off the support.
  K evaluate(const CurvePoint<K>& S) const {
    if (S.infinity)
      throw std::invalid_argument("DivisorFunction: evaluate at affine points");
    K v(1);
    for (const auto& l : lines) {
      K lv = l.cx * S.x + l.cy * S.y + l.c0;
      if (field_ops<K>::is_zero(lv))
        throw std::domain_error("DivisorFunction: point lies in the support");
      long e = l.exp;
      for (long i = 0; i < std::abs(e); ++i) v = e > 0 ? v * lv : v / lv;
    }
    return v;
  }

  /// Laurent expansion of phi_D at the origin.
  Laurent<K> expand(const FormalExpansion<K>& fe) const {
    long P = fe.prec;
    Laurent<K> phi = Laurent<K>::constant(K(1), P);
    for (const auto& l : lines) {
      Laurent<K> lv = fe.xz.scaled(l.cx) + fe.yz.scaled(l.cy) +
                      Laurent<K>::constant(l.c0, P);
      lv.strip();
      Laurent<K> lp = l.exp > 0 ? lv : lv.inverse();
      for (long i = 0; i < std::abs(l.exp); ++i) phi = phi * lp;
    }
    return phi;
  }

  /// Divisor of phi_D recomputed from the recorded line divisors; merges
  /// equal points. Reproducing the input D is the module's self-check.
  PointDivisor<K> divisor() const {
    PointDivisor<K> out;
    auto bump = [&](const CurvePoint<K>& P, long m) {
      if (m == 0) return;
      for (auto& t : out)
        if (point_eq(t.P, P)) {
          t.m += m;
          return;
        }
      out.push_back({P, m});
    };
    for (const auto& l : lines)
      for (const auto& t : l.div) bump(t.P, t.m * l.exp);
    std::erase_if(out, [](const DivTerm<K>& t) { return t.m == 0; });
    return out;
  }
};

/// Builds phi_D by Miller-style chord accumulation: negatives are flipped
/// through vertical lines, then pairs are merged through chords until the
/// divisor is exhausted.
template <class K>
DivisorFunction<K> divisor_function(const EllCurve<K>& E,
                                    const PointDivisor<K>& D) {
  if (!is_principal(E, D))
    throw std::invalid_argument("divisor_function: divisor is not principal");
  DivisorFunction<K> out{E, {}};
  auto vertical = [&](const CurvePoint<K>& P, long exp) {
    // x - x_P: divisor [P] + [-P] - 2[O]
    LineFunction<K> l{K(1), K(0), -P.x, exp, {}};
    if (point_eq(P, -P)) {
      l.div = {{P, 2}, {CurvePoint<K>::origin(), -2}};
    } else {
      l.div = {{P, 1}, {-P, 1}, {CurvePoint<K>::origin(), -2}};
    }
    out.lines.push_back(std::move(l));
  };

  std::vector<DivTerm<K>> S;
  for (const auto& t : D) {
    if (t.P.infinity || t.m == 0) continue;
    if (t.m < 0) {
      // [P]^{-m}: divide by (x - x_P)^{|m|} and carry [-P] forward
      vertical(t.P, t.m);
      S.push_back({-t.P, -t.m});
    } else {
      S.push_back({t.P, t.m});
    }
  }

  while (true) {
    std::erase_if(S, [](const DivTerm<K>& t) { return t.m == 0; });
    if (S.empty()) break;
    if (S.size() == 1 && S[0].m == 1)
      throw std::logic_error("divisor_function: accumulation stalled");
    CurvePoint<K> P = S[0].P;
    bool same_entry = S.size() == 1;
    CurvePoint<K> Q = same_entry ? P : S[1].P;
    if (point_eq(Q, -P)) {
      vertical(P, 1);
      S[0].m -= 1;
      if (same_entry)
        S[0].m -= 1;
      else
        S[1].m -= 1;
      continue;
    }
    // chord (or tangent) through P and Q: y - lam x - mu
    K lam;
    if (point_eq(P, Q))
      lam = (K(3) * P.x * P.x + E.a) / (K(2) * P.y);
    else
      lam = (Q.y - P.y) / (Q.x - P.x);
    K mu = P.y - lam * P.x;
    CurvePoint<K> R = ell_add(E, P, Q);       // P + Q
    CurvePoint<K> gamma = -R;                 // third intersection
    LineFunction<K> chord{-lam, K(1), -mu, 1, {}};
    chord.div = {{P, 1}, {CurvePoint<K>::origin(), -3}};
    auto bump = [&](const CurvePoint<K>& X) {
      for (auto& t : chord.div)
        if (point_eq(t.P, X)) {
          t.m += 1;
          return;
        }
      chord.div.push_back({X, 1});
    };
    bump(Q);
    bump(gamma);
    out.lines.push_back(std::move(chord));
    if (same_entry)
      S[0].m -= 2;
    else {
      S[0].m -= 1;
      S[1].m -= 1;
    }
    if (!R.infinity) {
      // divide by the vertical through R to cancel [gamma], carry [R]
      vertical(R, -1);
      S.push_back({R, 1});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Katz coefficients
// ---------------------------------------------------------------------------

template <class K>
struct KatzCoefficients {
  long n = 0;          // ord_O phi_D = multiplicity of O in D
  std::vector<K> f;    // phi_D = z^n (1 + f_1 z + f_2 z^2 + ...)
  std::vector<K> g;    // d phi/phi = (n/z + g_1 + g_2 z + ...) dz
};

template <class K>
KatzCoefficients<K> katz_coefficients(const EllCurve<K>& E,
                                      const PointDivisor<K>& D, long kmax) {
  if (kmax < 1) throw std::invalid_argument("katz_coefficients: kmax >= 1");
  auto fe = formal_weierstrass_expansion(E, kmax + 8);
  auto phi = divisor_function(E, D).expand(fe);
  phi.strip();
  if (phi.c.empty())
    throw std::domain_error("katz_coefficients: insufficient precision");
  KatzCoefficients<K> out;
  out.n = phi.val;
  Laurent<K> phin = phi.scaled(K(1) / phi.c[0]);
  Laurent<K> dlog = phi.derivative() * phi.inverse();
  for (long k = 1; k <= kmax; ++k) {
    out.f.push_back(phin.coeff(out.n + k));
    out.g.push_back(dlog.coeff(k - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Slope identities and the numeric period bridge
// ---------------------------------------------------------------------------

template <class K>
struct SlopeReport {
  K lambda{};
  CurvePoint<K> gamma;  // -(P + Q), the third point on the chord
  bool identity_ok = false;  // lambda^2 = x_P + x_Q + x_gamma
};

template <class K>
SlopeReport<K> slope_identities(const EllCurve<K>& E, const CurvePoint<K>& P,
                                const CurvePoint<K>& Q) {
  if (P.infinity || Q.infinity || detail::katz_eq<K>::eq(P.x, Q.x))
    throw std::invalid_argument("slope_identities: need distinct x-coordinates");
  SlopeReport<K> rep;
  rep.lambda = (Q.y - P.y) / (Q.x - P.x);
  rep.gamma = -ell_add(E, P, Q);
  if (rep.gamma.infinity)
    throw std::invalid_argument("slope_identities: P + Q = O is degenerate");
  rep.identity_ok = detail::katz_eq<K>::eq(rep.lambda * rep.lambda,
                                           P.x + Q.x + rep.gamma.x);
  return rep;
}

struct PeriodBridge {
  EllCurve<std::complex<double>> E;
  struct Entry {
    int i, j;
    CurvePoint<std::complex<double>> P;
  };
  std::vector<Entry> torsion;  // all nonzero N-torsion labels

  const CurvePoint<std::complex<double>>& at(int i, int j, int N) const {
    int im = ((i % N) + N) % N, jm = ((j % N) + N) % N;
    for (const auto& e : torsion)
      if (e.i == im && e.j == jm) return e.P;
    throw std::out_of_range("PeriodBridge: label not in table");
  }
};

/// Float Weierstrass model of C/(Z + Z tau) with omega = dx/2y = dz:
/// y^2 = x^3 + a x + b, a = -15 G_4, b = -35 G_6, torsion points via the
/// p-function lattice sums.
inline PeriodBridge numeric_period_bridge(std::complex<double> tau, int N) {
  using C = std::complex<double>;
  if (tau.imag() <= 0)
    throw std::domain_error("numeric_period_bridge: Im(tau) must be positive");
  auto G = detail::full_lattice_sums(tau, 6);
  C g2 = 60.0 * G[4], g3 = 140.0 * G[6];
  PeriodBridge pb{EllCurve<C>(-g2 / 4.0, -g3 / 4.0), {}};
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      if (i == 0 && j == 0) continue;
      C u = static_cast<double>(i) / N + static_cast<double>(j) / N * tau;
      C x = wp_oracle(u, tau);
      C y = wp_prime_oracle(u, tau) / 2.0;
      pb.torsion.push_back({i, j, CurvePoint<C>::affine(x, y)});
    }
  return pb;
}

// ---------------------------------------------------------------------------
// Divisor JSON (exact mode): [{"x": "p/q" | "O", "y": "p/q", "m": int}, ...]
// ---------------------------------------------------------------------------

inline PointDivisor<Rat> divisor_from_json(const nlohmann::json& j) {
  PointDivisor<Rat> D;
  for (const auto& e : j) {
    DivTerm<Rat> t;
    t.m = e.at("m").get<long>();
    std::string xs = e.at("x").get<std::string>();
    if (xs == "O") {
      t.P = CurvePoint<Rat>::origin();
    } else {
      t.P = CurvePoint<Rat>::affine(Rat::parse(xs),
                                    Rat::parse(e.at("y").get<std::string>()));
    }
    D.push_back(std::move(t));
  }
  return D;
}

inline nlohmann::json divisor_to_json(const PointDivisor<Rat>& D) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : D) {
    if (t.P.infinity)
      out.push_back({{"x", "O"}, {"m", t.m}});
    else
      out.push_back({{"x", t.P.x.str()}, {"y", t.P.y.str()}, {"m", t.m}});
  }
  return out;
}

}  // namespace modcurve
