#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "modcurve/curvemodel.hpp"
#include "modcurve/katz.hpp"

using namespace modcurve;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(MODCURVE_FIXTURE_DIR) + "/" + name;
}

FormSpace x15_space() {
  std::ifstream is(fixture_path("x1_5_weight2.qexp"));
  REQUIRE(is.good());
  // weight-2 bundle degree on this genus-0 curve is 2
  return assemble_form_space_file(is, 5, 2, 2, 3);
}

// coefficient vector of a relation on the canonical monomial list
std::vector<Rat> relation_vector(const Relation& r,
                                 const std::vector<std::vector<int>>& monos) {
  std::vector<Rat> v;
  for (const auto& m : monos) {
    auto it = r.terms.find(m);
    v.push_back(it == r.terms.end() ? Rat(0) : Rat(it->second));
  }
  return v;
}

bool same_span(const std::vector<std::vector<Rat>>& A,
               const std::vector<std::vector<Rat>>& B) {
  return rref(A) == rref(B);
}

Relation make_relation(long degree,
                       std::vector<std::pair<std::vector<int>, long>> terms) {
  Relation r;
  r.degree = degree;
  for (auto& [m, c] : terms) r.terms[m] = Int(c);
  return r;
}

// integer-lattice view of a series known to be supported on integer powers
QSeries collapse_integer(const QSeries& s) {
  REQUIRE(s.val % s.denomN == 0);
  QSeries out;
  out.denomN = 1;
  out.val = s.val / s.denomN;
  long end = (s.window_end() - 1) / s.denomN + 1;
  for (long e = out.val; e < end; ++e) out.c.push_back(s.coeff(e * s.denomN));
  for (long e = s.val; e < s.window_end(); ++e)
    if (e % s.denomN != 0) REQUIRE(s.coeff(e).is_zero());
  return out;
}

QSeries eta_squared_product(long prec) {
  // q * prod (1 - q^n)^2 (1 - q^{11n})^2, the weight-2 cusp form at level 11
  QSeries r = QSeries::monomial(CycElt(1), 1, prec + 1);
  for (long n = 1; n <= prec; ++n) {
    QSeries f;
    f.denomN = 1;
    f.val = 0;
    f.c.assign(prec + 1, CycElt(0));
    f.c[0] = CycElt(1);
    if (n <= prec) f.c[n] = CycElt(-1);
    r = r * f * f;
    if (11 * n <= prec) {
      QSeries g;
      g.denomN = 1;
      g.val = 0;
      g.c.assign(prec + 1, CycElt(0));
      g.c[0] = CycElt(1);
      g.c[11 * n] = CycElt(-1);
      r = r * g * g;
    }
  }
  return r;
}

}  // namespace

TEST_CASE("gamma_n_invariants") {
  auto g5 = gamma_n_invariants(5);
  CHECK(g5.index == 120);
  CHECK(g5.d == 60);
  CHECK(g5.c == 12);
  CHECK(g5.degL1 == 5);
  CHECK(g5.g == 0);

  auto g7 = gamma_n_invariants(7);
  CHECK(g7.d == 168);
  CHECK(g7.c == 24);
  CHECK(g7.degL1 == 14);
  CHECK(g7.g == 3);

  for (long N = 3; N <= 20; ++N) {
    auto gd = gamma_n_invariants(N);
    CHECK(2 * gd.g - 2 == 2 * gd.degL1 - gd.c);
  }
  CHECK_THROWS_AS(gamma_n_invariants(2), std::invalid_argument);

  auto js = gamma_n_to_json(g7);
  CHECK(js.at("genus") == 3);
  CHECK(js.at("degree") == 168);
}

TEST_CASE("form space from a basis file") {
  FormSpace S = x15_space();
  REQUIRE(S.basis.size() == 3);
  CHECK(S.basis[0].name == "f");
  CHECK(S.basis[1].name == "g");
  CHECK(S.basis[2].name == "h");
  CHECK(S.basis[0].series.val == 0);
  CHECK(S.basis[1].series.val == 1);
  CHECK(S.basis[2].series.val == 2);
  CHECK(S.claimed_dim == 3);

  // export then re-import round-trips exactly
  std::ostringstream os;
  write_form_space(os, S);
  std::istringstream is(os.str());
  FormSpace back = assemble_form_space_file(is, 5, 2, 2, 3);
  REQUIRE(back.basis.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.basis[i].name == S.basis[i].name);
    CHECK(back.basis[i].series.val == S.basis[i].series.val);
    CHECK(back.basis[i].series.c == S.basis[i].series.c);
  }

  std::istringstream empty("");
  CHECK_THROWS_AS(assemble_form_space_file(empty, 5, 2, 2),
                  std::invalid_argument);
}

TEST_CASE("quadric_relations: the X1(5) conic") {
  FormSpace S = x15_space();
  ModelIdeal I = quadric_relations(S);
  REQUIRE(I.relations.size() == 1);
  CHECK(I.audit_window == 5);
  CHECK(I.vanish_threshold == 4);
  // g^2 - fh - 4gh - 16h^2 = 0, normalized so the lexicographically first
  // monomial (h^2) has a positive coefficient
  Relation expected = make_relation(2, {{{0, 0, 2}, 16},
                                        {{0, 1, 1}, 4},
                                        {{0, 2, 0}, -1},
                                        {{1, 0, 1}, 1}});
  CHECK(I.relations[0] == expected);

  // JSON round-trip
  auto js = modelideal_to_json(I);
  ModelIdeal back = modelideal_from_json(js);
  CHECK(back.variables == I.variables);
  CHECK(back.relations == I.relations);
  CHECK(back.audit_window == I.audit_window);
}

TEST_CASE("quadric precision audit fails loudly") {
  FormSpace S = x15_space();
  for (auto& b : S.basis) b.series = b.series.truncated(4);
  CHECK_THROWS_AS(quadric_relations(S), std::domain_error);
}

TEST_CASE("products of an L(4O) basis reproduce the plane curve") {
  EllCurve<Rat> E(Rat(3141), Rat(5926));
  auto fe = formal_weierstrass_expansion(E, 14);
  std::vector<QSeries> gens;
  auto push = [&](const Laurent<Rat>& l) {
    gens.push_back(detail::laurent_to_qseries(l));
  };
  push(Laurent<Rat>::constant(Rat(1), 14));
  push(fe.xz);
  push(fe.yz);
  push(fe.xz * fe.xz);
  ModelIdeal I =
      relations_from_series(gens, {"s0", "s1", "s2", "s3"}, 2, 0);
  REQUIRE(I.relations.size() == 2);

  Relation q1 = make_relation(2, {{{1, 0, 0, 1}, -1}, {{0, 2, 0, 0}, 1}});
  Relation q2 = make_relation(2, {{{2, 0, 0, 0}, -5926},
                                  {{1, 1, 0, 0}, -3141},
                                  {{0, 1, 0, 1}, -1},
                                  {{0, 0, 2, 0}, 1}});
  auto monos = detail::monomials_of_degree(4, 2);
  std::vector<std::vector<Rat>> got = {relation_vector(I.relations[0], monos),
                                       relation_vector(I.relations[1], monos)};
  std::vector<std::vector<Rat>> want = {relation_vector(q1, monos),
                                        relation_vector(q2, monos)};
  CHECK(same_span(got, want));
}

TEST_CASE("quadric space is invariant under basis change") {
  FormSpace S = x15_space();
  auto monos = detail::monomials_of_degree(3, 2);
  ModelIdeal I0 = quadric_relations(S);
  std::vector<std::vector<Rat>> base;
  for (const auto& r : I0.relations) base.push_back(relation_vector(r, monos));

  std::mt19937 rng(909);
  std::uniform_int_distribution<long> pick(-3, 3);
  int done = 0;
  while (done < 25) {
    // random invertible 3x3 rational matrix
    Rat M[3][3];
    for (auto& row : M)
      for (auto& x : row) x = Rat(pick(rng), 1 + (pick(rng) + 3) % 3 + 1);
    Rat det = M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
              M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
              M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
    if (det.is_zero()) continue;

    std::vector<QSeries> gens;
    for (int i = 0; i < 3; ++i) {
      QSeries s = scaled(S.basis[0].series, CycElt(M[i][0]));
      for (int j = 1; j < 3; ++j)
        s = s + scaled(S.basis[j].series, CycElt(M[i][j]));
      gens.push_back(s.truncated(5));
    }
    ModelIdeal I = relations_from_series(gens, {"u0", "u1", "u2"}, 2, 4);
    REQUIRE(I.relations.size() == 1);

    // transform the new quadric back: Q'(u) with u_i = sum_j M_ij f_j gives
    // a quadric in f whose span must match the original kernel
    std::map<std::vector<int>, Rat> backmap;
    for (const auto& [mono, c] : I.relations[0].terms) {
      // mono is a degree-2 exponent vector in u; expand u_p u_q
      int p = -1, q = -1;
      for (int v = 0; v < 3; ++v)
        for (int e = 0; e < mono[v]; ++e) (p < 0 ? p : q) = v;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          std::vector<int> m(3, 0);
          ++m[a];
          ++m[b];
          backmap[m] += Rat(c) * M[p][a] * M[q][b];
        }
    }
    std::vector<Rat> backvec;
    for (const auto& m : monos) {
      auto it = backmap.find(m);
      backvec.push_back(it == backmap.end() ? Rat(0) : it->second);
    }
    CHECK(same_span({backvec}, base));
    ++done;
  }
}

TEST_CASE("assemble_form_space_eis: Gamma(5) weight 2") {
  FormSpace S = assemble_form_space_eis(5, 2, 16);
  CHECK(S.claimed_dim == 11);  // deg L2 + 1 - g = 10 + 1 - 0
  CHECK(S.degree_bound == 10);
  CHECK(static_cast<long>(S.basis.size()) == 11);
  // echelon: strictly increasing valuations, leading coefficient 1
  for (size_t i = 0; i < S.basis.size(); ++i) {
    const QSeries& s = S.basis[i].series;
    CHECK(s.coeff(s.val) == CycElt(1));
    if (i) CHECK(s.val > S.basis[i - 1].series.val);
  }
}

TEST_CASE("point representations") {
  FormSpace S = x15_space();
  auto m = point_representation_coeffs(S, 5);
  REQUIRE(m.size() == 3);
  REQUIRE(m[0].size() == 5);
  CHECK(m[0][0] == CycElt(1));
  CHECK(m[0][3] == CycElt(60));
  CHECK(m[1][1] == CycElt(1));
  CHECK(m[1][4] == CycElt(-9));
  CHECK(m[2][2] == CycElt(1));
  CHECK(m[2][3] == CycElt(-4));
  CHECK_THROWS_AS(point_representation_coeffs(S, 2), std::invalid_argument);
  CHECK_THROWS_AS(point_representation_coeffs(S, 6), std::domain_error);

  // float columns satisfy the quadric; duplicated points duplicate columns
  ModelIdeal I = quadric_relations(S);
  std::vector<std::complex<double>> taus = {{0.1, 1.0}, {0.0, 1.3}, {0.1, 1.0}};
  auto cols = point_representation_float(S, taus);
  REQUIRE(cols.size() == 3);
  CHECK(cols[0] == cols[2]);
  for (const auto& col : cols) {
    std::complex<double> acc = 0;
    for (const auto& [mono, c] : I.relations[0].terms) {
      std::complex<double> term(static_cast<double>(c.get_si()), 0);
      for (int v = 0; v < 3; ++v)
        for (int e = 0; e < mono[v]; ++e) term *= col[v];
      acc += term;
    }
    CHECK(std::abs(acc) < 1e-8);
  }
}

TEST_CASE("cab_model: the (3,4) curve y^3 = x^4 + x + 2") {
  CabCurve C(3, 4, {{{4, 0}, Rat(1)}, {{1, 0}, Rat(1)}, {{0, 0}, Rat(2)}});
  auto m6 = cab_model(C, 6);
  CHECK(m6.genus == 3);
  CHECK(m6.gaps == std::vector<long>{1, 2, 5});
  CHECK(m6.dim == 4);
  // basis {1, x, y, x^2}, listed by pole order 0, 3, 4, 6
  std::vector<std::pair<long, long>> want = {{0, 0}, {1, 0}, {0, 1}, {2, 0}};
  CHECK(m6.rr_basis == want);

  // the local expansions satisfy the curve equation exactly
  auto [x, y] = detail::cab_expansions(C, 30);
  Laurent<Rat> resid = y.pow(3) - (x.pow(4) + x + Laurent<Rat>::constant(Rat(2), 30));
  CHECK(resid.known_zero());
  CHECK(x.val == -3);
  CHECK(y.val == -4);

  // Riemann-Roch: dim L(k P0) = k + 1 - g for k >= 2g - 1
  for (long k = 5; k <= 15; ++k) CHECK(cab_model(C, k).dim == k - 2);

  // relation counts per degree: kernel dimension = #monomials minus the rank
  // of the product map (distinct attained pole orders, minus one for the
  // curve equation when y^3 appears)
  auto m7 = cab_model(C, 7);
  CHECK(m7.image_ideal.relations.size() == 3);  // Sym^2(5) = 15, rank 12
  // {1,x,y,x^2} contains x^2 itself, so s1^2 = s0 s3 is the one quadric
  REQUIRE(m6.image_ideal.relations.size() == 1);
  CHECK(m6.image_ideal.relations[0] ==
        make_relation(2, {{{1, 0, 0, 1}, -1}, {{0, 2, 0, 0}, 1}}));
  ModelIdeal c6 = relations_from_series(m6.expansions, m6.names, 3, 0);
  CHECK(c6.relations.size() == 5);  // Sym^3(4) = 20, rank 15

  auto m8 = cab_model(C, 8);
  REQUIRE(m8.dim == 6);
  REQUIRE(m8.image_ideal.relations.size() == 7);  // Sym^2(6)=21, dim L(16)=14

  // k = 8 = 2g + 2: the ideal is quadric-generated in degree 3 — variable
  // multiples of the quadrics span the full cubic kernel
  ModelIdeal cubics = relations_from_series(m8.expansions, m8.names, 3, 0);
  CHECK(cubics.relations.size() == 34);  // Sym^3(6)=56, dim L(24)=22
  auto monos3 = detail::monomials_of_degree(6, 3);
  std::vector<std::vector<Rat>> multiples;
  for (const auto& q : m8.image_ideal.relations)
    for (int v = 0; v < 6; ++v) {
      std::map<std::vector<int>, Rat> prod;
      for (const auto& [mono, c] : q.terms) {
        std::vector<int> m3 = mono;
        ++m3[v];
        prod[m3] += Rat(c);
      }
      std::vector<Rat> vec;
      for (const auto& m3 : monos3) {
        auto it = prod.find(m3);
        vec.push_back(it == prod.end() ? Rat(0) : it->second);
      }
      multiples.push_back(std::move(vec));
    }
  CHECK(rref(multiples).size() == 34);

  CHECK_THROWS_AS(CabCurve(2, 4, {{{4, 0}, Rat(1)}}), std::invalid_argument);
  CHECK_THROWS_AS(CabCurve(3, 4, {{{1, 0}, Rat(1)}}), std::invalid_argument);
}

TEST_CASE("X1(11): imported weight-2 space and its projective models") {
  const int N = 11;
  const long P = 31;          // integer-q window
  const long P11 = P * N;     // same window on the 1/11 lattice

  // Candidates invariant under tau -> tau + 1 (which shifts the first label
  // index by the second): fixed labels (i, 0) and full orbit sums over the
  // first index, plus the weight-2 cusp form eta(q)^2 eta(q^11)^2.
  std::vector<NamedSeries> rows;
  for (int i = 1; i <= 5; ++i)
    rows.push_back({"a" + std::to_string(i),
                    collapse_integer(eis_weight2_diff(TorsionLabel(i, 0, N), P11))});
  for (int j = 1; j <= 5; ++j) {
    QSeries s = eis_weight2_diff(TorsionLabel(0, j, N), P11);
    for (int i = 1; i <= 10; ++i)
      s = s + eis_weight2_diff(TorsionLabel(i, j, N), P11);
    rows.push_back({"s" + std::to_string(j), collapse_integer(s)});
  }
  rows.push_back({"eta", eta_squared_product(P)});

  // write out and import through the file path (the exercise presumes an
  // externally provided basis)
  std::ostringstream os;
  for (const auto& r : rows) write_series(os, r.name, r.series);
  std::istringstream is(os.str());
  FormSpace S = assemble_form_space_file(is, N, 2, 10, 10);

  REQUIRE(S.basis.size() == 10);
  for (size_t i = 0; i < S.basis.size(); ++i) {
    const QSeries& s = S.basis[i].series;
    CHECK(s.val == static_cast<long>(i));  // valuations 0..9
    for (const auto& c : s.c) CHECK(descend_to_rational(c).has_value());
  }

  // degree-4 model: forms vanishing to order >= 6 map to an elliptic normal
  // curve in P^3 cut out by two quadrics
  FormSpace V6 = restrict_vanishing(S, 6);
  REQUIRE(V6.basis.size() == 4);
  ModelIdeal q6 = relations_of_degree(V6, 2);
  CHECK(q6.relations.size() == 2);

  // degree-3 model: order >= 7 gives a plane cubic, no quadrics
  FormSpace V7 = restrict_vanishing(S, 7);
  REQUIRE(V7.basis.size() == 3);
  ModelIdeal q7 = relations_of_degree(V7, 2);
  CHECK(q7.relations.empty());
  ModelIdeal c7 = relations_of_degree(V7, 3);
  CHECK(c7.relations.size() == 1);
}
