#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "modcurve/eisenstein.hpp"

using namespace modcurve;
using C = std::complex<double>;

namespace {

const C kTestPoints[] = {{0, 1.2}, {0.3, 1.4}, {-0.25, 0.9}};

C eval_eis(const QSeries& ghat, int k, C tau) {
  return eis_normalizer(k) * series_eval_float(ghat, tau);
}

DivisorCombo combo_three(int N) {
  // [a] + [b] + [-a-b] - 3[0], lifts summing to zero
  return DivisorCombo(N, {DivisorCombo::term(1, 0, N, 1),
                          DivisorCombo::term(0, 1, N, 1),
                          DivisorCombo::term(-1, -1, N, 1),
                          DivisorCombo::term(0, 0, N, -3)});
}

DivisorCombo combo_pm(long i, long j, int N) {
  // [alpha] + [-alpha] - 2[0]
  return DivisorCombo(N, {DivisorCombo::term(i, j, N, 1),
                          DivisorCombo::term(-i, -j, N, 1),
                          DivisorCombo::term(0, 0, N, -2)});
}

}  // namespace

TEST_CASE("eis_expansion symmetry and exclusions") {
  const int N = 5;
  CHECK(eis_expansion(3, TorsionLabel(0, 0, N), 40).known_zero());
  CHECK(eis_expansion(5, TorsionLabel(0, 0, N), 40).known_zero());

  const std::pair<int, int> labels[] = {{1, 0}, {0, 1}, {2, 1}, {1, 4}};
  for (int k : {1, 3, 4}) {
    for (auto [i, j] : labels) {
      TorsionLabel a(i, j, N);
      QSeries plus = eis_expansion(k, a, 40);
      QSeries minus = eis_expansion(k, -a, 40);
      CHECK(known_equal(minus, (k % 2) ? -plus : plus));
    }
  }

  CHECK_THROWS(eis_expansion(2, TorsionLabel(1, 0, N), 10));
  CHECK_THROWS(eis_expansion(1, TorsionLabel(0, 0, N), 10));
}

TEST_CASE("oracle certification of single expansions, k >= 3") {
  const int N = 5;
  const std::pair<int, int> labels[] = {{1, 0}, {0, 1}, {2, 1}};
  for (int k : {3, 4, 5}) {
    for (auto [i, j] : labels) {
      TorsionLabel a(i, j, N);
      QSeries g = eis_expansion(k, a, 140);
      for (C tau : kTestPoints) {
        auto oracle = lattice_oracle(k, a, tau);
        CHECK(std::abs(eval_eis(g, k, tau) - oracle.value) < 1e-8);
      }
    }
  }
}

TEST_CASE("oracle certification of weight 1 and 2 combinations") {
  const int N = 5;
  for (int k : {1, 2}) {
      const DivisorCombo combos[] = {combo_three(N), combo_pm(2, 1, N)};
    for (const DivisorCombo& D : combos) {
      QSeries g = eis_combo(k, D, 160);
      for (C tau : kTestPoints) {
        auto oracle = lattice_oracle_combo(k, D, tau);
        CHECK(std::abs(eval_eis(g, k, tau) - oracle.value) < 1e-8);
      }
    }
  }
}

TEST_CASE("weight-2 differences and the elliptic bridge") {
  const int N = 5;
  C tau(0, 1.1);
  const std::pair<int, int> labels[] = {{1, 0}, {0, 1}, {2, 1}};
  for (auto [i, j] : labels) {
    TorsionLabel a(i, j, N);
    QSeries d = eis_weight2_diff(a, 160);
    CHECK(known_equal(eis_weight2_diff(-a, 160), d));

    // combo [a] + [-a] - 2[0] equals twice the difference, exactly
    QSeries via_combo = eis_combo(2, combo_pm(i, j, N), 160);
    CHECK(known_equal(via_combo, scaled(d, CycElt(2))));

    // numeric: the difference is the Weierstrass p-value at the torsion point
    C u = static_cast<double>(i) / N + static_cast<double>(j) / N * tau;
    CHECK(std::abs(eval_eis(d, 2, tau) - wp_oracle(u, tau)) < 1e-8);

    // and -2 G_{3,alpha} is the derivative p'(alpha)
    QSeries g3 = eis_expansion(3, a, 160);
    CHECK(std::abs(-2.0 * eval_eis(g3, 3, tau) - wp_prime_oracle(u, tau)) <
          1e-8);
  }
  CHECK_THROWS(eis_weight2_diff(TorsionLabel(0, 0, N), 10));
}

TEST_CASE("eis_combo degenerate and order-independence") {
  const int N = 5;
  DivisorCombo all_zero(N, {DivisorCombo::term(1, 0, N, 0),
                            DivisorCombo::term(0, 1, N, 0)});
  CHECK(eis_combo(1, all_zero, 30).known_zero());
  CHECK(eis_combo(4, all_zero, 30).known_zero());

  DivisorCombo fwd(N, {DivisorCombo::term(1, 0, N, 1),
                       DivisorCombo::term(-1, 0, N, 1),
                       DivisorCombo::term(0, 0, N, -2)});
  DivisorCombo swapped(N, {DivisorCombo::term(-1, 0, N, 1),
                           DivisorCombo::term(0, 0, N, -2),
                           DivisorCombo::term(1, 0, N, 1)});
  for (int k : {1, 2, 3}) {
    QSeries a = eis_combo(k, fwd, 60);
    QSeries b = eis_combo(k, swapped, 60);
    REQUIRE(a.val == b.val);
    REQUIRE(a.c == b.c);
  }

  CHECK_THROWS(DivisorCombo(N, {DivisorCombo::term(1, 0, N, 1)}));  // sum m != 0
  CHECK_THROWS(DivisorCombo(
      N, {DivisorCombo::term(1, 0, N, 1), DivisorCombo::term(0, 1, N, -1)}));
}

TEST_CASE("eis_combo is linear in the divisor") {
  std::mt19937 rng(99);
  const int N = 5;
  std::uniform_int_distribution<long> pick(-4, 4);
  int done = 0;
  while (done < 100) {
    long i1 = pick(rng), j1 = pick(rng), i2 = pick(rng), j2 = pick(rng);
    if ((i1 % N == 0 && j1 % N == 0) || (i2 % N == 0 && j2 % N == 0)) continue;
    DivisorCombo d1 = combo_pm(i1, j1, N);
    DivisorCombo d2 = combo_pm(i2, j2, N);
    std::vector<DivisorTerm> joined = d1.terms();
    for (const auto& t : d2.terms()) joined.push_back(t);
    DivisorCombo dsum(N, joined);
    int k = 1 + static_cast<int>(done % 3);
    QSeries lhs = eis_combo(k, dsum, 25);
    QSeries rhs = eis_combo(k, d1, 25) + eis_combo(k, d2, 25);
    CHECK(known_equal(lhs, rhs));
    ++done;
  }
}

TEST_CASE("level-1 series") {
  QSeries j = level1_series(Level1::J, 12);
  CHECK(j.val == -1);
  CHECK(j.coeff(-1) == CycElt(1));
  CHECK(j.coeff(0) == CycElt(744));

  QSeries delta = level1_series(Level1::Delta, 30);
  CHECK(delta.val == 1);
  CHECK(delta.coeff(1) == CycElt(1));
  CHECK(delta.coeff(2) == CycElt(-24));

  // independent oracle: Delta = q prod (1-q^n)^24
  QSeries eta24 = QSeries::monomial(CycElt(1), 1, 30);
  for (long n = 1; n < 30; ++n) {
    QSeries factor;
    factor.denomN = 1;
    factor.val = 0;
    factor.c.assign(30, CycElt(0));
    factor.c[0] = CycElt(1);
    if (n < 30) factor.c[n] = CycElt(-1);
    eta24 = eta24 * pow(factor, 24);
  }
  CHECK(known_equal(delta.truncated(eta24.window_end()), eta24));

  QSeries e4 = level1_series(Level1::E4, 30);
  QSeries e6 = level1_series(Level1::E6, 30);
  CHECK(known_equal(pow(e4, 3) - pow(e6, 2), scaled(delta, CycElt(1728))));
}

TEST_CASE("oracle self-tests") {
  const int N = 5;
  C tau(0.3, 1.4);
  auto z = lattice_oracle(3, TorsionLabel(0, 0, N), tau);
  CHECK(std::abs(z.value) < 1e-10);

  TorsionLabel a(1, 0, N);
  auto o1 = lattice_oracle(4, a, tau, 30);
  auto o2 = lattice_oracle(4, a, tau, 60);
  CHECK(std::abs(o1.value - o2.value) < o1.tail);

  // grouped combination is cutoff-stable at weight 2 ...
  DivisorCombo D = combo_pm(2, 1, N);
  auto c1 = lattice_oracle_combo(2, D, tau, 20);
  auto c2 = lattice_oracle_combo(2, D, tau, 40);
  CHECK(std::abs(c1.value - c2.value) < 1e-7);

  // ... while the naive ungrouped weight-2 sum drifts with the cutoff
  auto naive = [&](long i, long j, int T) {
    C al = static_cast<double>(i) / N + static_cast<double>(j) / N * tau;
    C s(0);
    for (int m = -T; m <= T; ++m)
      for (int n = -T; n <= T; ++n) {
        C l = static_cast<double>(m) + static_cast<double>(n) * tau + al;
        if (std::abs(l) < 1e-12) continue;
        s += 1.0 / (l * l);
      }
    return s;
  };
  auto naive_combo = [&](int T) {
    return naive(2, 1, T) + naive(-2, -1, T) - 2.0 * naive(0, 0, T);
  };
  double drift = std::abs(naive_combo(20) - naive_combo(40));
  double grouped_drift = std::abs(c1.value - c2.value);
  CHECK(drift > 100 * grouped_drift);

  CHECK_THROWS(lattice_oracle(2, a, tau));
  CHECK_THROWS(lattice_oracle(4, a, C(0, -1.0)));
}

TEST_CASE("modular covariance under Gamma(N)") {
  // gamma = (1 0; 5 1) is in Gamma(5); at tau = -1/5 + i/5 the cocycle
  // (c tau + d) equals i, so G(gamma tau) = i^k G(tau).
  const int N = 5;
  C tau(-0.2, 0.2);
  C gamma_tau = tau / (5.0 * tau + 1.0);
  C cocycle = 5.0 * tau + 1.0;
  for (int k : {3, 4}) {
    for (auto [i, j] : std::initializer_list<std::pair<int, int>>{{1, 0}, {2, 1}}) {
      TorsionLabel a(i, j, N);
      auto lhs = lattice_oracle(k, a, gamma_tau, 40).value;
      auto rhs = std::pow(cocycle, k) * lattice_oracle(k, a, tau, 40).value;
      CHECK(std::abs(lhs - rhs) < 1e-6);
    }
  }
}
