#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "modcurve/qseries.hpp"

namespace modcurve {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Torsion point alpha = (i/N, j/N) in (Q/Z)^2, stored reduced mod N.
struct TorsionLabel {
  int i = 0, j = 0, N = 1;

  TorsionLabel() = default;
  TorsionLabel(long i_, long j_, int N_) : N(N_) {
    if (N_ < 1) throw std::invalid_argument("TorsionLabel: level must be >= 1");
    i = static_cast<int>(((i_ % N_) + N_) % N_);
    j = static_cast<int>(((j_ % N_) + N_) % N_);
  }
  bool is_zero() const { return i == 0 && j == 0; }
  TorsionLabel operator-() const { return TorsionLabel(-i, -j, N); }
  friend bool operator==(const TorsionLabel& a, const TorsionLabel& b) {
    return a.i == b.i && a.j == b.j && a.N == b.N;
  }
};

/// One term m * [alpha] of a torsion divisor, with an explicit lift
/// (x, y) in (1/N)Z^2. The lift matters: weight-1 constant terms and the
/// balancing condition below see the lift, not just its class mod Z^2.
struct DivisorTerm {
  Rat x, y;
  long m = 0;
};

/// Divisor D = sum m_alpha [alpha] with sum m_alpha = 0 and
/// sum m_alpha * lift(alpha) = (0, 0) exactly. Both conditions are enforced
/// at construction; they are what makes the grouped lattice sum converge.
class DivisorCombo {
 public:
  DivisorCombo(int level, std::vector<DivisorTerm> terms)
      : level_(level), terms_(std::move(terms)) {
    if (level_ < 1) throw std::invalid_argument("DivisorCombo: level >= 1");
    long msum = 0;
    Rat xsum, ysum;
    for (const auto& t : terms_) {
      if (!(t.x * Rat(level_)).is_integer() || !(t.y * Rat(level_)).is_integer())
        throw std::invalid_argument("DivisorCombo: lift not in (1/N)Z^2");
      msum += t.m;
      xsum += Rat(t.m) * t.x;
      ysum += Rat(t.m) * t.y;
    }
    if (msum != 0 || !xsum.is_zero() || !ysum.is_zero())
      throw std::invalid_argument(
          "DivisorCombo: balancing conditions sum m = 0, sum m*lift = 0 fail");
  }

  int level() const { return level_; }
  const std::vector<DivisorTerm>& terms() const { return terms_; }

  /// Integer lift numerators (i, j) with lift = (i/N, j/N).
  std::pair<long, long> lift_numerators(size_t idx) const {
    const auto& t = terms_[idx];
    return {(t.x * Rat(level_)).num().get_si(),
            (t.y * Rat(level_)).num().get_si()};
  }

  static DivisorTerm term(long i, long j, int N, long m) {
    return DivisorTerm{Rat(i, N), Rat(j, N), m};
  }

 private:
  int level_;
  std::vector<DivisorTerm> terms_;
};

// ---------------------------------------------------------------------------
// Exact expansions
// ---------------------------------------------------------------------------

/// Bernoulli number B_n (B_1 = -1/2 convention), cached.
inline Rat bernoulli(long n) {
  static std::vector<Rat> cache{Rat(1)};
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<long>(cache.size()) <= n) {
    long m = static_cast<long>(cache.size());
    Rat s;
    for (long j = 0; j < m; ++j) s += Rat(binomial(m + 1, j)) * cache[j];
    cache.push_back(-s / Rat(m + 1));
  }
  return cache[n];
}

namespace detail {

/// R_k(u) = (u d/du)^{k-1} [(u+1)/(u-1)] at u = zeta, exactly.
/// With v = 1/(u-1) the seed is 1 + 2v and u d/du acts as p -> -(v^2+v) p'.
inline CycElt eis_rk(const CycElt& u, int k) {
  std::vector<Rat> p{Rat(1), Rat(2)};
  for (int step = 1; step < k; ++step) {
    std::vector<Rat> q(p.size() + 1, Rat(0));
    for (size_t i = 1; i < p.size(); ++i) {
      Rat d = Rat(static_cast<long>(i)) * p[i];  // coefficient of p'
      q[i] -= d;      // -v * v^{i-1}
      q[i + 1] -= d;  // -v^2 * v^{i-1}
    }
    p = std::move(q);
  }
  CycElt v = (u - CycElt(1)).inverse();
  CycElt r(0);
  for (size_t i = p.size(); i-- > 0;) r = r * v + CycElt(p[i]);
  return r;
}

inline Int ceil_rat(const Rat& r) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return q;
}

/// Normalized expansion of a single Eisenstein summand for the explicit lift
/// (i/N, j/N): the series Ghat with G = F_k * Ghat, F_k = (-2 pi i)^k/(k-1)!.
/// Coefficients live in Q(zeta_N); exponents are in units of 1/N.
inline QSeries eis_normalized(int k, long i, long j, int N, long prec) {
  if (k < 1) throw std::invalid_argument("eis_normalized: weight must be >= 1");
  if (prec < 1) throw std::invalid_argument("eis_normalized: prec >= 1");
  QSeries s;
  s.denomN = N;
  s.val = 0;
  s.c.assign(prec, CycElt(0));

  long jm = ((j % N) + N) % N;
  long im = ((i % N) + N) % N;
  auto add = [&](long e, const CycElt& v) { s.c[e] += v; };

  for (long M = 1; M < prec; ++M) {
    if (M % N == jm) {
      Int rp(1);  // r^{k-1}
      for (long r = 1; r * M < prec; ++r) {
        rp = 1;
        for (int t = 1; t < k; ++t) rp *= r;
        add(r * M, CycElt(Rat(rp)) * CycElt::zeta(N, (r * im) % N));
      }
    }
    if (M % N == (N - jm) % N) {
      for (long r = 1; r * M < prec; ++r) {
        Int rp(1);
        for (int t = 1; t < k; ++t) rp *= r;
        if (k % 2 != 0) rp = -rp;
        add(r * M, CycElt(Rat(rp)) * CycElt::zeta(N, ((-r * im) % N + N) % N));
      }
    }
  }

  // Constant term (the Hecke value at s = 0 of the analytic continuation).
  // For k = 1 it depends only on alpha mod Z^2 and is odd in alpha; the
  // lift-linear part a2 = j/N cancels in every balanced combination anyway.
  if (k == 1) {
    Rat a2(j, N);
    if (a2.is_integer()) {
      if (im != 0) {
        CycElt u = CycElt::zeta(N, im);
        s.c[0] += -(u + CycElt(1)) / ((u - CycElt(1)) * CycElt(2));
      }
    } else {
      s.c[0] += CycElt(Rat(ceil_rat(a2)) - Rat(1, 2) - a2);
    }
  } else if (jm == 0) {
    if (im == 0) {
      if (k % 2 == 0) s.c[0] += CycElt(-bernoulli(k) / Rat(k));
    } else {
      s.c[0] += eis_rk(CycElt::zeta(N, im), k) * CycElt(Rat(-1, 2));
    }
  }

  for (auto& x : s.c) x = x.compress();
  s.strip();
  return s;
}

}  // namespace detail

/// The transcendental normalizer F_k = (-2 pi i)^k / (k-1)!: the actual
/// Eisenstein series is F_k times the exact normalized expansion returned by
/// the functions below. Kept out of the exact series so coefficients stay in
/// Q(zeta_N).
inline std::complex<double> eis_normalizer(int k) {
  std::complex<double> f(1);
  for (int t = 1; t <= k; ++t) f *= std::complex<double>(0, -2 * M_PI);
  for (int t = 1; t < k; ++t) f /= static_cast<double>(t);
  return f;
}

/// Normalized q-expansion of G_{k,alpha} for k >= 3 (any alpha) or k = 1
/// (alpha != 0), using the canonical reduced lift. prec counts known
/// coefficients of q^{1/N}.
inline QSeries eis_expansion(int k, const TorsionLabel& alpha, long prec) {
  if (k == 2)
    throw std::invalid_argument(
        "eis_expansion: weight 2 only via eis_weight2_diff or eis_combo");
  if (k < 1) throw std::invalid_argument("eis_expansion: weight must be >= 1");
  if (k == 1 && alpha.is_zero())
    throw std::invalid_argument("eis_expansion: weight 1 needs alpha != 0");
  if (k < 3 && k != 1)
    throw std::invalid_argument("eis_expansion: weight must be 1 or >= 3");
  return detail::eis_normalized(k, alpha.i, alpha.j, alpha.N, prec);
}

/// Normalized expansion of the holomorphic difference G_{2,alpha} - G_{2,0}.
inline QSeries eis_weight2_diff(const TorsionLabel& alpha, long prec) {
  if (alpha.is_zero())
    throw std::invalid_argument("eis_weight2_diff: alpha must be nonzero");
  return detail::eis_normalized(2, alpha.i, alpha.j, alpha.N, prec) -
         detail::eis_normalized(2, 0, 0, alpha.N, prec);
}

/// Normalized expansion of sum m_alpha G_{k,alpha} for a balanced divisor.
/// Valid for every k >= 1; the weight-1 constant terms use the divisor's
/// explicit lifts.
inline QSeries eis_combo(int k, const DivisorCombo& D, long prec) {
  if (k < 1) throw std::invalid_argument("eis_combo: weight must be >= 1");
  QSeries s = QSeries::zero(D.level(), prec);
  for (size_t idx = 0; idx < D.terms().size(); ++idx) {
    long m = D.terms()[idx].m;
    if (m == 0) continue;
    auto [i, j] = D.lift_numerators(idx);
    s = s + scaled(detail::eis_normalized(k, i, j, D.level(), prec),
                   CycElt(Rat(m)));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Level-1 series
// ---------------------------------------------------------------------------

enum class Level1 { E4, E6, Delta, J };

namespace detail {
inline Int sigma(int k, long n) {
  Int s(0);
  for (long d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    Int p(1);
    for (int t = 0; t < k; ++t) p *= d;
    s += p;
  }
  return s;
}

inline QSeries eisenstein_level1(int k, long a, long prec) {
  // 1 + a * sum sigma_{k-1}(n) q^n
  QSeries s;
  s.denomN = 1;
  s.val = 0;
  s.c.assign(prec, CycElt(0));
  s.c[0] = CycElt(1);
  for (long n = 1; n < prec; ++n)
    s.c[n] = CycElt(Rat(Int(Int(a) * sigma(k - 1, n))));
  return s;
}
}  // namespace detail

inline QSeries level1_series(Level1 which, long prec) {
  if (prec < 1) throw std::invalid_argument("level1_series: prec >= 1");
  switch (which) {
    case Level1::E4: return detail::eisenstein_level1(4, 240, prec);
    case Level1::E6: return detail::eisenstein_level1(6, -504, prec);
    case Level1::Delta: {
      // (E4^3 - E6^2) / 1728; vanishes to order 1, so ask one extra term.
      QSeries e4 = detail::eisenstein_level1(4, 240, prec + 1);
      QSeries e6 = detail::eisenstein_level1(6, -504, prec + 1);
      QSeries d = pow(e4, 3) - pow(e6, 2);
      return scaled(d, CycElt(Rat(1, 1728)));
    }
    case Level1::J: {
      QSeries e4 = detail::eisenstein_level1(4, 240, prec + 2);
      QSeries e6 = detail::eisenstein_level1(6, -504, prec + 2);
      QSeries d = scaled(pow(e4, 3) - pow(e6, 2), CycElt(Rat(1, 1728)));
      return pow(e4, 3) * invert(d);
    }
  }
  throw std::logic_error("level1_series: bad selector");
}

// ---------------------------------------------------------------------------
// Floating-point lattice oracle
// ---------------------------------------------------------------------------

struct OracleResult {
  std::complex<double> value;
  double tail = 0;  // bound on what the cutoff + corrections neglect
};

namespace detail {

constexpr int kTailOrders = 12;

/// Full lattice sums G_e = sum' l^{-e} over Z + Z tau for e <= emax,
/// via G_4, G_6 (level-1 q-series) and the Weierstrass coefficient
/// recursion; odd e give 0.
inline std::vector<std::complex<double>> full_lattice_sums(
    std::complex<double> tau, int emax) {
  using C = std::complex<double>;
  C q = std::exp(C(0, 2 * M_PI) * tau);
  C e4(1), e6(1), qn(1);
  for (int n = 1; n < 80; ++n) {
    qn *= q;
    double s3 = 0, s5 = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) {
        double dd = d;
        s3 += dd * dd * dd;
        s5 += dd * dd * dd * dd * dd;
      }
    e4 += 240.0 * s3 * qn;
    e6 += -504.0 * s5 * qn;
  }
  std::vector<C> G(emax + 1, C(0));
  double pi = M_PI;
  if (emax >= 4) G[4] = std::pow(pi, 4) / 45.0 * e4;
  if (emax >= 6) G[6] = 2.0 * std::pow(pi, 6) / 945.0 * e6;
  int kmax = (emax - 2) / 2;
  std::vector<C> c(std::max(kmax + 1, 3), C(0));
  if (kmax >= 1) c[1] = 3.0 * G[4];
  if (kmax >= 2) c[2] = 5.0 * G[6];
  for (int k = 3; k <= kmax; ++k) {
    C s(0);
    for (int h = 1; h <= k - 2; ++h) s += c[h] * c[k - 1 - h];
    c[k] = 3.0 / ((2.0 * k + 3.0) * (k - 2.0)) * s;
    G[2 * k + 2] = c[k] / (2.0 * k + 1.0);
  }
  return G;
}

/// Tails G_e - S_e(T) of the square-cutoff partial sums, for e in [3, emax].
inline std::vector<std::complex<double>> lattice_tails(std::complex<double> tau,
                                                       int emax, int T) {
  using C = std::complex<double>;
  std::vector<C> S(emax + 1, C(0));
  for (int m = -T; m <= T; ++m)
    for (int n = -T; n <= T; ++n) {
      if (m == 0 && n == 0) continue;
      C inv = 1.0 / (static_cast<double>(m) + static_cast<double>(n) * tau);
      C p = inv * inv * inv;
      for (int e = 3; e <= emax; ++e) {
        S[e] += p;
        p *= inv;
      }
    }
  auto G = full_lattice_sums(tau, emax);
  for (int e = 3; e <= emax; ++e) G[e] -= S[e];
  return G;  // now holds the tails
}

inline double binom_neg_d(int k, int j) {
  double r = 1;
  for (int t = 0; t < j; ++t) r *= static_cast<double>(-k - t) / (t + 1);
  return r;
}

}  // namespace detail

/// Square-cutoff lattice sum for G_{k,alpha}(tau) = sum' (l + alpha)^{-k},
/// with an analytic correction for the tail beyond the cutoff (Taylor
/// expansion of (l + a)^{-k} in a, summed against the exact tails of
/// sum l^{-e}). The reported tail bounds the neglected Taylor orders plus a
/// roundoff floor.
inline OracleResult lattice_oracle(int k, const TorsionLabel& alpha,
                                   std::complex<double> tau, int cutoff = 30) {
  using C = std::complex<double>;
  if (tau.imag() <= 0)
    throw std::domain_error("lattice_oracle: Im(tau) must be positive");
  if (k < 3)
    throw std::invalid_argument(
        "lattice_oracle: k >= 3 for single alpha; use lattice_oracle_combo");
  const int J = detail::kTailOrders;
  C a = static_cast<double>(alpha.i) / alpha.N +
        static_cast<double>(alpha.j) / alpha.N * tau;
  auto tl = detail::lattice_tails(tau, k + J + 1, cutoff);
  C s(0);
  for (int m = -cutoff; m <= cutoff; ++m)
    for (int n = -cutoff; n <= cutoff; ++n) {
      C l = static_cast<double>(m) + static_cast<double>(n) * tau + a;
      if (std::abs(l) < 1e-12) continue;
      s += std::pow(l, -k);
    }
  C ap(1);
  for (int j = 0; j <= J; ++j) {
    s += detail::binom_neg_d(k, j) * ap * tl[k + j];
    ap *= a;
  }
  double next = std::abs(detail::binom_neg_d(k, J + 1)) * std::abs(ap) *
                std::abs(tl[k + J + 1]);
  return {s, next + 1e-11 * (1.0 + std::abs(s))};
}

/// Grouped lattice sum for sum m_alpha G_{k,alpha}: inner sum over alpha
/// first, square cutoff outside. Valid for every k >= 1 thanks to the
/// balancing conditions; tail corrections start at Taylor order 2 because
/// orders 0 and 1 cancel exactly across the divisor.
inline OracleResult lattice_oracle_combo(int k, const DivisorCombo& D,
                                         std::complex<double> tau,
                                         int cutoff = 30) {
  using C = std::complex<double>;
  if (tau.imag() <= 0)
    throw std::domain_error("lattice_oracle_combo: Im(tau) must be positive");
  if (k < 1) throw std::invalid_argument("lattice_oracle_combo: k >= 1");
  const int J = detail::kTailOrders;
  std::vector<std::pair<C, double>> pts;
  for (const auto& t : D.terms())
    pts.push_back({t.x.to_double() + t.y.to_double() * tau,
                   static_cast<double>(t.m)});
  auto tl = detail::lattice_tails(tau, k + J + 1, cutoff);
  C s(0);
  for (int m = -cutoff; m <= cutoff; ++m)
    for (int n = -cutoff; n <= cutoff; ++n) {
      C l = static_cast<double>(m) + static_cast<double>(n) * tau;
      for (const auto& [a, w] : pts) {
        C la = l + a;
        if (std::abs(la) < 1e-12) continue;
        s += w * std::pow(la, -k);
      }
    }
  double next = 0;
  for (int j = 2; j <= J; ++j) {
    if (k + j < 3) continue;
    C mom(0);
    for (const auto& [a, w] : pts) mom += w * std::pow(a, j);
    s += detail::binom_neg_d(k, j) * mom * tl[k + j];
  }
  {
    C mom(0);
    for (const auto& [a, w] : pts) mom += w * std::pow(a, J + 1);
    next = std::abs(detail::binom_neg_d(k, J + 1)) * std::abs(mom) *
           std::abs(tl[k + J + 1]);
  }
  return {s, next + 1e-11 * (1.0 + std::abs(s))};
}

/// Weierstrass p-function of Z + Z tau at u, tail-corrected like the oracles.
inline std::complex<double> wp_oracle(std::complex<double> u,
                                      std::complex<double> tau,
                                      int cutoff = 30) {
  using C = std::complex<double>;
  const int J = 14;
  auto tl = detail::lattice_tails(tau, J + 2 + 1, cutoff);
  C s = 1.0 / (u * u);
  for (int m = -cutoff; m <= cutoff; ++m)
    for (int n = -cutoff; n <= cutoff; ++n) {
      if (m == 0 && n == 0) continue;
      C l = static_cast<double>(m) + static_cast<double>(n) * tau;
      s += 1.0 / ((u - l) * (u - l)) - 1.0 / (l * l);
    }
  C up = u;
  for (int j = 1; j <= J; ++j) {
    s += static_cast<double>(j + 1) * up * tl[j + 2];
    up *= u;
  }
  return s;
}

inline std::complex<double> wp_prime_oracle(std::complex<double> u,
                                            std::complex<double> tau,
                                            int cutoff = 30) {
  using C = std::complex<double>;
  const int J = 14;
  auto tl = detail::lattice_tails(tau, J + 3 + 1, cutoff);
  C s(0);
  for (int m = -cutoff; m <= cutoff; ++m)
    for (int n = -cutoff; n <= cutoff; ++n) {
      C l = static_cast<double>(m) + static_cast<double>(n) * tau;
      C d = u - l;
      s += 1.0 / (d * d * d);
    }
  C up(1);
  for (int j = 0; j <= J; ++j) {
    s -= static_cast<double>((j + 2) * (j + 1) / 2) * up * tl[j + 3];
    up *= u;
  }
  return -2.0 * s;
}

}  // namespace modcurve
