#pragma once

#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "modcurve/cyclotomic.hpp"
#include "modcurve/laurent.hpp"
#include "modcurve/linalg.hpp"

namespace modcurve {

/// Truncated expansion in q^{1/denomN} with exact cyclotomic coefficients.
/// Coefficients are known exactly for exponents e/denomN with e in
/// [val, val + prec()); the valuation is kept tight (leading known zeros are
/// stripped against the upper window end, which never moves).
struct QSeries {
  int denomN = 1;
  long val = 0;
  std::vector<CycElt> c;

  long prec() const { return static_cast<long>(c.size()); }
  long window_end() const { return val + prec(); }

  static QSeries zero(int denomN, long window_end) {
    QSeries s;
    s.denomN = denomN;
    s.val = window_end;
    return s;
  }

  static QSeries monomial(const CycElt& k, long e, long prec, int denomN = 1) {
    QSeries s;
    s.denomN = denomN;
    s.val = e;
    s.c.assign(prec, CycElt(0));
    if (prec > 0) s.c[0] = k;
    s.strip();
    return s;
  }

  bool known_zero() const {
    for (const auto& x : c)
      if (!x.is_zero()) return false;
    return true;
  }

  const CycElt coeff(long e) const {
    if (e < val) return CycElt(0);
    if (e >= window_end())
      throw std::out_of_range("QSeries: coefficient beyond precision window");
    return c[e - val];
  }

  QSeries& strip() {
    size_t i = 0;
    while (i < c.size() && c[i].is_zero()) ++i;
    if (i) {
      c.erase(c.begin(), c.begin() + i);
      val += static_cast<long>(i);
    }
    return *this;
  }

  Laurent<CycElt> as_laurent() const { return Laurent<CycElt>{val, c}; }
  static QSeries from_laurent(Laurent<CycElt> l, int denomN) {
    QSeries s;
    s.denomN = denomN;
    s.val = l.val;
    s.c = std::move(l.c);
    return s;
  }

  /// Re-expresses the series on the finer lattice (1/newDenom)Z. Exponents
  /// strictly between old lattice points are genuinely zero, so the window
  /// extends to old_window_end * factor.
  QSeries rescaled(int new_denom) const {
    if (new_denom == denomN) return *this;
    if (new_denom % denomN != 0)
      throw std::invalid_argument("QSeries: lattice must refine");
    long f = new_denom / denomN;
    QSeries s;
    s.denomN = new_denom;
    s.val = val * f;
    s.c.assign(prec() == 0 ? 0 : (window_end() * f - s.val), CycElt(0));
    for (long i = 0; i < prec(); ++i) s.c[i * f] = c[i];
    if (prec() == 0) s.val = window_end() * f;
    return s;
  }

  QSeries truncated(long end) const {
    QSeries s = *this;
    if (end < s.window_end()) s.c.resize(std::max<long>(0, end - s.val));
    return s;
  }
};

namespace detail {
inline std::pair<QSeries, QSeries> common_lattice(const QSeries& a,
                                                  const QSeries& b) {
  int d = static_cast<int>(lcm_long(a.denomN, b.denomN));
  return {a.rescaled(d), b.rescaled(d)};
}
}  // namespace detail

inline QSeries operator+(const QSeries& a, const QSeries& b) {
  auto [x, y] = detail::common_lattice(a, b);
  return QSeries::from_laurent(x.as_laurent() + y.as_laurent(), x.denomN);
}
inline QSeries operator-(const QSeries& a, const QSeries& b) {
  auto [x, y] = detail::common_lattice(a, b);
  return QSeries::from_laurent(x.as_laurent() - y.as_laurent(), x.denomN);
}
inline QSeries operator*(const QSeries& a, const QSeries& b) {
  auto [x, y] = detail::common_lattice(a, b);
  return QSeries::from_laurent(x.as_laurent() * y.as_laurent(), x.denomN);
}
inline QSeries operator-(const QSeries& a) {
  return QSeries::from_laurent(-a.as_laurent(), a.denomN);
}
inline QSeries scaled(const QSeries& a, const CycElt& k) {
  return QSeries::from_laurent(a.as_laurent().scaled(k), a.denomN);
}

inline QSeries invert(const QSeries& a) {
  QSeries s = a;
  s.strip();
  if (s.c.empty() || s.c[0].is_zero())
    throw std::domain_error("QSeries: inverting a series whose known part is zero");
  return QSeries::from_laurent(s.as_laurent().inverse(), s.denomN);
}

inline QSeries pow(const QSeries& a, long k) {
  return QSeries::from_laurent(a.as_laurent().pow(k), a.denomN);
}

/// True when a - b is known to vanish on the shared precision window.
inline bool known_equal(const QSeries& a, const QSeries& b) {
  return (a - b).known_zero();
}

enum class SeriesOp { add, sub, mul };

inline QSeries series_arith(const QSeries& a, const QSeries& b, SeriesOp op) {
  switch (op) {
    case SeriesOp::add: return a + b;
    case SeriesOp::sub: return a - b;
    case SeriesOp::mul: return a * b;
  }
  throw std::logic_error("series_arith: bad op");
}

/// Formal substitution q -> zeta_d^{-b} q^{a/d} applied term by term:
/// c q^n becomes c zeta_d^{-b n} q^{n a / d}. Requires denomN = 1.
inline QSeries series_substitute(const QSeries& s, long a, long b, long d) {
  if (s.denomN != 1)
    throw std::invalid_argument("series_substitute: input must have denomN = 1");
  if (d < 1 || a < 1)
    throw std::invalid_argument("series_substitute: need a >= 1, d >= 1");
  QSeries r;
  r.denomN = static_cast<int>(d);
  r.val = s.val * a;
  r.c.assign(s.prec() == 0 ? 0 : (s.window_end() * a - r.val), CycElt(0));
  if (s.prec() == 0) r.val = s.window_end() * a;
  for (long i = 0; i < s.prec(); ++i) {
    if (s.c[i].is_zero()) continue;
    long n = s.val + i;
    long e = (((-b % d) * (n % d)) % d + d) % d;  // zeta_d^{-bn}
    r.c[i * a] = s.c[i] * CycElt::zeta(static_cast<int>(d), e);
  }
  r.strip();
  return r;
}

/// Partial-sum evaluation at tau in the upper half plane, zeta_N embedded as
/// exp(2 pi i / N).
inline std::complex<double> series_eval_float(const QSeries& s,
                                              std::complex<double> tau) {
  if (tau.imag() <= 0)
    throw std::domain_error("series_eval_float: Im(tau) must be positive");
  std::complex<double> q1n =
      std::exp(std::complex<double>(0, 2 * M_PI) * tau /
               static_cast<double>(s.denomN));
  std::complex<double> p = std::pow(q1n, static_cast<double>(s.val));
  std::complex<double> sum = 0;
  for (long i = 0; i < s.prec(); ++i) {
    if (!s.c[i].is_zero()) sum += s.c[i].to_complex() * p;
    p *= q1n;
  }
  return sum;
}

/// Echelon basis of the span of `rows` (strictly increasing valuations,
/// leading coefficient 1) plus the exact kernel of the inputs. All rows are
/// compared on the intersection of their precision windows.
struct EchelonBasis {
  std::vector<QSeries> basis;
  std::vector<std::vector<CycElt>> kernel;  // relations among the inputs
  long window_lo = 0, window_hi = 0;        // audited comparison window
};

inline EchelonBasis echelon_basis(const std::vector<QSeries>& rows) {
  if (rows.empty()) return {};
  int d = 1;
  for (const auto& r : rows) d = static_cast<int>(lcm_long(d, r.denomN));
  long lo = rows[0].val * (d / rows[0].denomN);
  long hi = rows[0].window_end() * (d / rows[0].denomN);
  std::vector<QSeries> rs;
  rs.reserve(rows.size());
  for (const auto& r : rows) {
    rs.push_back(r.rescaled(d));
    lo = std::min(lo, rs.back().val);
    hi = std::min(hi, rs.back().window_end());
  }
  if (hi <= lo)
    throw std::domain_error(
        "echelon_basis: precision windows too short to compare rows");
  for (const auto& r : rs) {
    // A nonzero row whose leading term lies beyond the shared window would
    // masquerade as zero; report instead of silently mis-reducing.
    if (!r.c.empty() && r.val >= hi)
      throw std::domain_error(
          "echelon_basis: precision window too short to distinguish rows");
  }
  std::vector<std::vector<CycElt>> m;
  for (const auto& r : rs) {
    std::vector<CycElt> row;
    row.reserve(hi - lo);
    for (long e = lo; e < hi; ++e)
      row.push_back(e < r.window_end() ? r.coeff(e) : CycElt(0));
    m.push_back(std::move(row));
  }
  auto red = echelon_reduce(std::move(m));
  EchelonBasis out;
  out.window_lo = lo;
  out.window_hi = hi;
  for (const auto& row : red.rows) {
    QSeries s;
    s.denomN = d;
    s.val = lo;
    s.c = row;
    s.strip();
    out.basis.push_back(std::move(s));
  }
  out.kernel = red.kernel;
  return out;
}

// ---------------------------------------------------------------------------
// Text file format, one series per block:
//   SERIES <name> N=<denomN> VAL=<v> PREC=<prec>
//   <exponent-numerator>/<denomN> : <CycElt text>
//   ...
//   END
// ---------------------------------------------------------------------------

struct NamedSeries {
  std::string name;
  QSeries series;
};

inline void write_series(std::ostream& os, const std::string& name,
                         const QSeries& s) {
  os << "SERIES " << name << " N=" << s.denomN << " VAL=" << s.val
     << " PREC=" << s.prec() << "\n";
  for (long i = 0; i < s.prec(); ++i)
    os << (s.val + i) << "/" << s.denomN << " : " << s.c[i].str() << "\n";
  os << "END\n";
}

inline std::vector<NamedSeries> read_series(std::istream& is) {
  std::vector<NamedSeries> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind("SERIES ", 0) != 0) {
      if (line.empty() || line[0] == '#') continue;
      throw std::invalid_argument("qseries file: expected SERIES header, got '" +
                                  line + "'");
    }
    std::istringstream hs(line.substr(7));
    NamedSeries ns;
    std::string tok;
    hs >> ns.name;
    long prec = -1;
    while (hs >> tok) {
      if (tok.rfind("N=", 0) == 0) ns.series.denomN = std::stoi(tok.substr(2));
      else if (tok.rfind("VAL=", 0) == 0) ns.series.val = std::stol(tok.substr(4));
      else if (tok.rfind("PREC=", 0) == 0) prec = std::stol(tok.substr(5));
      else throw std::invalid_argument("qseries file: bad header token " + tok);
    }
    if (prec < 0) throw std::invalid_argument("qseries file: missing PREC");
    ns.series.c.assign(prec, CycElt(0));
    while (std::getline(is, line) && line != "END") {
      if (line.empty()) continue;
      auto colon = line.find(" : ");
      if (colon == std::string::npos)
        throw std::invalid_argument("qseries file: bad coefficient line");
      std::string expo = line.substr(0, colon);
      long e = std::stol(expo.substr(0, expo.find('/')));
      if (e < ns.series.val || e >= ns.series.window_end())
        throw std::invalid_argument("qseries file: exponent outside window");
      ns.series.c[e - ns.series.val] = CycElt::parse(line.substr(colon + 3));
    }
    ns.series.strip();
    out.push_back(std::move(ns));
  }
  return out;
}

}  // namespace modcurve
