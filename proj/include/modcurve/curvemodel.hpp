#pragma once

#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modcurve/eisenstein.hpp"
#include "modcurve/linalg.hpp"
#include "modcurve/qseries.hpp"

namespace modcurve {

// ---------------------------------------------------------------------------
// Numerology of the principal congruence covers
// ---------------------------------------------------------------------------

struct GammaNData {
  long N = 0;
  long index = 0;   // [SL2(Z) : Gamma(N)]
  long d = 0;       // degree of X(N) -> X(1)  (index / 2; -I acts trivially)
  long c = 0;       // number of cusps, d / N
  long degL1 = 0;   // degree of the weight-1 bundle, d / 12
  long g = 0;       // genus
};

inline GammaNData gamma_n_invariants(long N) {
  if (N < 3)
    throw std::invalid_argument("gamma_n_invariants: N >= 3 required");
  // index = N^3 * prod_{p | N} (1 - p^-2), computed exactly
  Int idx = Int(N) * Int(N) * Int(N);
  long m = N;
  for (long p = 2; p * p <= m; ++p) {
    if (m % p == 0) {
      idx = idx / (p * p) * (p * p - 1);
      while (m % p == 0) m /= p;
    }
  }
  if (m > 1) idx = idx / (m * m) * (m * m - 1);
  GammaNData out;
  out.N = N;
  out.index = idx.get_si();
  out.d = out.index / 2;
  if (out.d % N != 0 || out.d % 12 != 0)
    throw std::logic_error("gamma_n_invariants: unexpected divisibility");
  out.c = out.d / N;
  out.degL1 = out.d / 12;
  out.g = 1 + out.degL1 - out.c / 2;
  return out;
}

inline nlohmann::json gamma_n_to_json(const GammaNData& gd) {
  return {{"N", gd.N},     {"index", gd.index}, {"degree", gd.d},
          {"cusps", gd.c}, {"degL1", gd.degL1}, {"genus", gd.g}};
}

// ---------------------------------------------------------------------------
// Form spaces
// ---------------------------------------------------------------------------

/// Echelon basis of a space of q-expansions: strictly increasing valuations,
/// leading coefficient 1. `degree_bound` is the number of zeros a nonzero
/// member can have, measured in units of the basis exponent lattice; a member
/// vanishing past it is identically zero (the audit bound for relations).
struct FormSpace {
  std::string label;
  long level = 0;
  long weight = 0;
  std::vector<NamedSeries> basis;
  long claimed_dim = -1;    // expected dimension when known, else -1
  long degree_bound = -1;   // see above; -1 when unknown
};

namespace detail {

inline FormSpace echelonize_space(std::string label, long level, long weight,
                                  const std::vector<NamedSeries>& rows,
                                  long claimed_dim, long degree_bound) {
  std::vector<QSeries> series;
  for (const auto& r : rows) series.push_back(r.series);
  auto eb = echelon_basis(series);
  FormSpace out{std::move(label), level, weight, {}, claimed_dim, degree_bound};
  for (size_t i = 0; i < eb.basis.size(); ++i) {
    std::string name = "T" + std::to_string(i);
    for (const auto& r : rows)  // keep an input name if the row survived
      if (known_equal(r.series, eb.basis[i])) {
        name = r.name;
        break;
      }
    out.basis.push_back({std::move(name), eb.basis[i]});
  }
  return out;
}

}  // namespace detail

/// Imports a basis file in the qseries text format and echelon-reduces it.
inline FormSpace assemble_form_space_file(std::istream& is, long level,
                                          long weight, long degree_bound,
                                          long claimed_dim = -1) {
  auto rows = read_series(is);
  if (rows.empty())
    throw std::invalid_argument("assemble_form_space_file: no series found");
  return detail::echelonize_space("file", level, weight, rows, claimed_dim,
                                  degree_bound);
}

inline void write_form_space(std::ostream& os, const FormSpace& S) {
  for (const auto& b : S.basis) write_series(os, b.name, b.series);
}

/// Candidate forms from the internal Eisenstein machinery for the full
/// level-N group: weight-1 series, their products, and weight-2 differences.
/// Best effort: the achieved rank is reported via basis size vs claimed_dim.
inline FormSpace assemble_form_space_eis(long N, long k, long prec) {
  if (N < 3 || k < 1)
    throw std::invalid_argument("assemble_form_space_eis: need N >= 3, k >= 1");
  auto gd = gamma_n_invariants(N);
  // one torsion label per {a, -a} pair, excluding 0
  std::vector<TorsionLabel> reps;
  for (long i = 0; i < N; ++i)
    for (long j = 0; j < N; ++j) {
      if (i == 0 && j == 0) continue;
      long ni = (N - i) % N, nj = (N - j) % N;
      if (std::make_pair(ni, nj) < std::make_pair(i, j)) continue;
      reps.emplace_back(i, j, static_cast<int>(N));
    }

  std::vector<NamedSeries> rows;
  auto lbl = [](const char* kind, const TorsionLabel& a) {
    std::ostringstream os;
    os << kind << "_" << a.i << "_" << a.j;
    return os.str();
  };
  if (k == 1) {
    for (const auto& a : reps)
      rows.push_back({lbl("g1", a), eis_expansion(1, a, prec)});
  } else if (k == 2) {
    for (const auto& a : reps)
      rows.push_back({lbl("d2", a), eis_weight2_diff(a, prec)});
    std::vector<std::pair<TorsionLabel, QSeries>> w1;
    for (const auto& a : reps) w1.push_back({a, eis_expansion(1, a, prec)});
    for (size_t i = 0; i < w1.size(); ++i)
      for (size_t j = i; j < w1.size(); ++j)
        rows.push_back({lbl("p", w1[i].first) + lbl("_x", w1[j].first),
                        w1[i].second * w1[j].second});
  } else {
    for (const auto& a : reps)
      rows.push_back({lbl("g", a), eis_expansion(static_cast<int>(k), a, prec)});
    FormSpace lower = assemble_form_space_eis(N, k - 1, prec);
    for (const auto& a : reps) {
      QSeries w1 = eis_expansion(1, a, prec);
      for (const auto& b : lower.basis)
        rows.push_back({lbl("w1", a) + "*" + b.name, w1 * b.series});
    }
  }
  long degL = k * gd.degL1;
  long claimed = (degL >= 2 * gd.g - 1) ? degL + 1 - gd.g : -1;
  // series live on the 1/N lattice; the cusp parameter is q^{1/N}, so the
  // degree bound is degL in lattice units
  return detail::echelonize_space("Gamma(" + std::to_string(N) + ")", N, k,
                                  rows, claimed, degL);
}

/// Sub-space of forms vanishing to order >= k at the cusp (sections of
/// L(-k * infinity)). The audit bound of the ambient bundle is kept.
inline FormSpace restrict_vanishing(const FormSpace& S, long k) {
  FormSpace out = S;
  out.basis.clear();
  for (const auto& b : S.basis)
    if (b.series.val >= k) out.basis.push_back(b);
  out.claimed_dim = -1;
  out.label = S.label + "(-" + std::to_string(k) + "inf)";
  return out;
}

// ---------------------------------------------------------------------------
// Relation extraction
// ---------------------------------------------------------------------------

/// Homogeneous relation among named generators; `terms` maps the exponent
/// vector of a monomial to its integer coefficient. Normalized to a primitive
/// integer vector whose first (lexicographically smallest) monomial has a
/// positive coefficient.
struct Relation {
  long degree = 0;
  std::map<std::vector<int>, Int> terms;
  bool operator==(const Relation&) const = default;
};

struct ModelIdeal {
  std::vector<std::string> variables;
  std::vector<Relation> relations;
  long audit_window = 0;     // relations verified to vanish below this exponent
  long vanish_threshold = 0; // required bound (audit_window must exceed it)
};

namespace detail {

inline void monomials_rec(int nvars, long deg, int lo, std::vector<int>& cur,
                          std::vector<std::vector<int>>& out) {
  if (deg == 0) {
    out.push_back(cur);
    return;
  }
  for (int v = lo; v < nvars; ++v) {
    ++cur[v];
    monomials_rec(nvars, deg - 1, v, cur, out);
    --cur[v];
  }
}

/// All degree-d monomial exponent vectors over nvars variables, in the order
/// induced by the recursion (lexicographic in the sorted index multiset).
inline std::vector<std::vector<int>> monomials_of_degree(int nvars, long d) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(nvars, 0);
  monomials_rec(nvars, d, 0, cur, out);
  return out;
}

inline Relation normalize_relation(const std::vector<std::vector<int>>& monos,
                                   const std::vector<Rat>& coeffs, long degree) {
  Int den(1), num(0);
  for (const auto& c : coeffs) den = lcm(den, c.den());
  std::vector<Int> ints;
  for (const auto& c : coeffs) {
    Int v = c.num() * (den / c.den());
    ints.push_back(v);
    num = gcd(num, v);
  }
  if (num == 0) throw std::logic_error("normalize_relation: zero relation");
  int sign = 0;
  Relation rel;
  rel.degree = degree;
  for (size_t i = 0; i < ints.size(); ++i) {
    if (ints[i] == 0) continue;
    if (sign == 0) sign = (ints[i] > 0) ? 1 : -1;
    rel.terms[monos[i]] = ints[i] * sign / num;
  }
  // map order is lexicographic on exponent vectors; re-fix the sign on the
  // first stored monomial (insertion order above follows the product order,
  // which may differ)
  if (rel.terms.begin()->second < 0)
    for (auto& [m, c] : rel.terms) c = -c;
  return rel;
}

}  // namespace detail

/// Kernel of the degree-d multiplication map on a list of q-expansions:
/// all integral relations sum c_m * (product of series)^m = 0, certified by
/// the vanishing bound and re-verified by expansion.
inline ModelIdeal relations_from_series(const std::vector<QSeries>& gens,
                                        const std::vector<std::string>& names,
                                        long d, long vanish_threshold) {
  if (gens.empty() || d < 1)
    throw std::invalid_argument("relations_from_series: empty input");
  int n = static_cast<int>(gens.size());
  auto monos = detail::monomials_of_degree(n, d);
  std::vector<QSeries> products;
  for (const auto& m : monos) {
    QSeries p;
    bool first = true;
    for (int v = 0; v < n; ++v)
      for (int e = 0; e < m[v]; ++e) {
        p = first ? gens[v] : p * gens[v];
        first = false;
      }
    products.push_back(std::move(p));
  }
  for (const auto& g : gens)
    if (g.denomN != gens[0].denomN)
      throw std::invalid_argument(
          "relations_from_series: generators must share one lattice");
  auto eb = echelon_basis(products);
  // echelon_basis may refine the exponent lattice; restate the bound there
  long lattice = gens[0].denomN;
  for (const auto& p : products) lattice = lcm_long(lattice, p.denomN);
  long hi_units = eb.window_hi;
  long threshold_units = vanish_threshold * (lattice / gens[0].denomN);
  if (hi_units <= threshold_units)
    throw std::domain_error(
        "relations_from_series: precision window does not exceed the "
        "vanishing bound");

  ModelIdeal out;
  out.variables = names;
  out.audit_window = hi_units;
  out.vanish_threshold = threshold_units;

  auto kernel = rref(eb.kernel);  // canonical basis of the relation space
  for (const auto& kv : kernel) {
    std::vector<Rat> coeffs;
    for (const auto& c : kv) {
      auto r = descend_to_rational(c);
      if (!r)
        throw std::domain_error(
            "relations_from_series: relation has irrational coefficients");
      coeffs.push_back(*r);
    }
    Relation rel = detail::normalize_relation(monos, coeffs, d);
    // re-verify by expansion, exactly
    QSeries acc = QSeries::zero(static_cast<int>(lattice), eb.window_hi);
    for (size_t i = 0; i < monos.size(); ++i) {
      auto it = rel.terms.find(monos[i]);
      if (it == rel.terms.end()) continue;
      acc = acc + scaled(products[i], CycElt(Rat(it->second)));
    }
    if (!acc.known_zero() || acc.window_end() < hi_units)
      throw std::logic_error("relations_from_series: relation fails re-expansion");
    out.relations.push_back(std::move(rel));
  }
  return out;
}

/// Degree-d relations among the basis elements of a form space. Degree 2 is
/// the quadric extraction; the audit requires precision beyond the degree of
/// the d-th power bundle.
inline ModelIdeal relations_of_degree(const FormSpace& S, long d) {
  if (S.degree_bound < 0)
    throw std::invalid_argument("relations_of_degree: unknown degree bound");
  std::vector<QSeries> gens;
  std::vector<std::string> names;
  for (const auto& b : S.basis) {
    gens.push_back(b.series);
    names.push_back(b.name);
  }
  return relations_from_series(gens, names, d, d * S.degree_bound);
}

inline ModelIdeal quadric_relations(const FormSpace& S) {
  return relations_of_degree(S, 2);
}

inline nlohmann::json modelideal_to_json(const ModelIdeal& I) {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& r : I.relations) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& [m, c] : r.terms)
      terms.push_back({{"exp", m}, {"c", c.get_str()}});
    rels.push_back({{"degree", r.degree}, {"terms", terms}});
  }
  return {{"variables", I.variables},
          {"relations", rels},
          {"audit_window", I.audit_window},
          {"vanish_threshold", I.vanish_threshold}};
}

inline ModelIdeal modelideal_from_json(const nlohmann::json& j) {
  ModelIdeal I;
  I.variables = j.at("variables").get<std::vector<std::string>>();
  I.audit_window = j.at("audit_window").get<long>();
  I.vanish_threshold = j.at("vanish_threshold").get<long>();
  for (const auto& r : j.at("relations")) {
    Relation rel;
    rel.degree = r.at("degree").get<long>();
    for (const auto& t : r.at("terms"))
      rel.terms[t.at("exp").get<std::vector<int>>()] =
          Int(t.at("c").get<std::string>());
    I.relations.push_back(std::move(rel));
  }
  return I;
}

// ---------------------------------------------------------------------------
// Point representations
// ---------------------------------------------------------------------------

/// Exact mode: rows are basis forms, columns the coefficients of q^0..q^{L-1}
/// (evaluation against the divisor L * infinity). Injectivity needs L to
/// exceed the degree bound.
inline std::vector<std::vector<CycElt>> point_representation_coeffs(
    const FormSpace& S, long L) {
  if (S.degree_bound >= 0 && L <= S.degree_bound)
    throw std::invalid_argument(
        "point_representation: L must exceed the degree bound");
  std::vector<std::vector<CycElt>> m;
  for (const auto& b : S.basis) {
    if (b.series.window_end() < L)
      throw std::domain_error("point_representation: precision below L");
    std::vector<CycElt> row;
    for (long e = 0; e < L; ++e) row.push_back(b.series.coeff(e));
    m.push_back(std::move(row));
  }
  return m;
}

/// Float mode: column j is the projective point [f_0(tau_j) : ... : f_n(tau_j)].
inline std::vector<std::vector<std::complex<double>>> point_representation_float(
    const FormSpace& S, const std::vector<std::complex<double>>& taus) {
  std::vector<std::vector<std::complex<double>>> cols;
  for (auto tau : taus) {
    std::vector<std::complex<double>> col;
    for (const auto& b : S.basis) col.push_back(series_eval_float(b.series, tau));
    cols.push_back(std::move(col));
  }
  return cols;
}

// ---------------------------------------------------------------------------
// C_{a,b} plane curves: Riemann-Roch spaces at the point at infinity
// ---------------------------------------------------------------------------

/// y^a = sum of rhs terms c_{ij} x^i y^j, each of pole order a*i + b*j < a*b;
/// the term (b, 0) must be present with coefficient 1. x and y have pole
/// orders a and b at the single point P0 at infinity.
struct CabCurve {
  long a = 0, b = 0;
  std::map<std::pair<long, long>, Rat> rhs;

  CabCurve(long a_, long b_, std::map<std::pair<long, long>, Rat> rhs_)
      : a(a_), b(b_), rhs(std::move(rhs_)) {
    if (a < 2 || b <= a || std::gcd(a, b) != 1)
      throw std::invalid_argument("CabCurve: need 2 <= a < b, gcd(a,b) = 1");
    auto it = rhs.find({b, 0});
    if (it == rhs.end() || it->second != Rat(1))
      throw std::invalid_argument("CabCurve: leading term x^b required");
    for (const auto& [m, c] : rhs) {
      if (m == std::make_pair(b, 0L)) continue;
      if (m.first < 0 || m.second < 0 || a * m.first + b * m.second >= a * b)
        throw std::invalid_argument("CabCurve: non-leading terms must have "
                                    "pole order below a*b");
    }
  }
};

struct CabModel {
  std::vector<std::pair<long, long>> rr_basis;  // (i, j) for x^i y^j
  std::vector<std::string> names;
  std::vector<long> gaps;  // pole orders not attained
  long genus = 0;
  long dim = 0;
  ModelIdeal image_ideal;  // degree-2 relations of the image
  std::vector<QSeries> expansions;  // local expansions of the basis monomials
};

namespace detail {

/// Local expansions at P0 with x = t^-a exactly and y = t^-b * u(t),
/// u(0) = 1, obtained by Newton iteration on the curve equation.
inline std::pair<Laurent<Rat>, Laurent<Rat>> cab_expansions(const CabCurve& C,
                                                            long prec) {
  using L = Laurent<Rat>;
  L u = L::constant(Rat(1), prec);
  auto F = [&](const L& w) {
    // w^a - sum c_ij t^{ab - ai - bj} w^j
    L r = w.pow(C.a);
    for (const auto& [m, c] : C.rhs) {
      long e = C.a * C.b - C.a * m.first - C.b * m.second;
      r = r - (w.pow(m.second) * L::monomial(c, e, prec));
    }
    return r;
  };
  auto Fp = [&](const L& w) {
    L r = w.pow(C.a - 1).scaled(Rat(C.a));
    for (const auto& [m, c] : C.rhs) {
      if (m.second == 0) continue;
      long e = C.a * C.b - C.a * m.first - C.b * m.second;
      r = r - (w.pow(m.second - 1) * L::monomial(c * Rat(m.second), e, prec));
    }
    return r;
  };
  for (int round = 0; round < 64; ++round) {
    L err = F(u);
    if (err.known_zero()) break;
    u = (u - err * Fp(u).inverse()).truncated(prec);
  }
  if (!F(u).known_zero())
    throw std::logic_error("cab_expansions: Newton iteration failed");
  L x = L::monomial(Rat(1), -C.a, prec);
  L y = u.shifted(-C.b);
  return {x, y};
}

inline QSeries laurent_to_qseries(const Laurent<Rat>& l) {
  QSeries s;
  s.denomN = 1;
  s.val = l.val;
  for (const auto& c : l.c) s.c.push_back(CycElt(c));
  return s;
}

}  // namespace detail

inline CabModel cab_model(const CabCurve& C, long k) {
  if (k < 0) throw std::invalid_argument("cab_model: k >= 0");
  CabModel out;
  // gaps of the pole-order semigroup <a, b>
  std::vector<char> hit(C.a * C.b + 1, 0);
  for (long j = 0; j < C.a; ++j)
    for (long i = 0; C.a * i + C.b * j <= C.a * C.b; ++i)
      hit[C.a * i + C.b * j] = 1;
  for (long n = 1; n <= C.a * C.b; ++n)
    if (!hit[n]) out.gaps.push_back(n);
  out.genus = static_cast<long>(out.gaps.size());

  // monomial basis of L(k P0), sorted by pole order (all orders distinct)
  std::vector<std::pair<long, std::pair<long, long>>> mono;
  for (long j = 0; j < C.a; ++j)
    for (long i = 0; C.a * i + C.b * j <= k; ++i)
      mono.push_back({C.a * i + C.b * j, {i, j}});
  std::sort(mono.begin(), mono.end());
  for (const auto& [ord, ij] : mono) {
    out.rr_basis.push_back(ij);
    out.names.push_back("s" + std::to_string(out.names.size()));
  }
  out.dim = static_cast<long>(out.rr_basis.size());
  if (out.dim == 0) return out;

  long prec = 2 * k + 2 * out.genus + 10;
  auto [x, y] = detail::cab_expansions(C, prec);
  for (const auto& [i, j] : out.rr_basis) {
    Laurent<Rat> m = Laurent<Rat>::constant(Rat(1), prec);
    for (long t = 0; t < i; ++t) m = m * x;
    for (long t = 0; t < j; ++t) m = m * y;
    out.expansions.push_back(detail::laurent_to_qseries(m));
  }
  // a degree-2 element of the kernel is a function with poles only at P0
  // that vanishes at P0, hence zero: any positive audited exponent certifies
  out.image_ideal = relations_from_series(out.expansions, out.names, 2, 0);
  return out;
}

}  // namespace modcurve
