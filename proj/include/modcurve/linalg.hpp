#pragma once

#include <vector>

#include "modcurve/laurent.hpp"

namespace modcurve {

/// Row echelon reduction over an exact field, tracking the transformation.
/// Returns pivot columns per surviving row; `rows` is modified in place and
/// `transform` satisfies transform * input = rows throughout.
template <class K>
struct EchelonResult {
  std::vector<std::vector<K>> rows;       // echelon rows (nonzero ones first)
  std::vector<std::vector<K>> transform;  // same order as `rows`
  std::vector<long> pivots;               // pivot column of each nonzero row
  std::vector<std::vector<K>> kernel;     // combinations mapping inputs to 0
};

template <class K>
EchelonResult<K> echelon_reduce(std::vector<std::vector<K>> m) {
  EchelonResult<K> res;
  size_t nrows = m.size();
  size_t ncols = nrows ? m[0].size() : 0;
  std::vector<std::vector<K>> t(nrows, std::vector<K>(nrows, K(0)));
  for (size_t i = 0; i < nrows; ++i) t[i][i] = K(1);

  size_t rank = 0;
  for (size_t col = 0; col < ncols && rank < nrows; ++col) {
    size_t piv = rank;
    while (piv < nrows && field_ops<K>::is_zero(m[piv][col])) ++piv;
    if (piv == nrows) continue;
    std::swap(m[piv], m[rank]);
    std::swap(t[piv], t[rank]);
    K inv = K(1) / m[rank][col];
    for (size_t j = 0; j < ncols; ++j) m[rank][j] = m[rank][j] * inv;
    for (auto& x : t[rank]) x = x * inv;
    for (size_t r = 0; r < nrows; ++r) {
      if (r == rank || field_ops<K>::is_zero(m[r][col])) continue;
      K f = m[r][col];
      for (size_t j = 0; j < ncols; ++j) m[r][j] = m[r][j] - f * m[rank][j];
      for (size_t j = 0; j < nrows; ++j) t[r][j] = t[r][j] - f * t[rank][j];
    }
    res.pivots.push_back(static_cast<long>(col));
    ++rank;
  }
  for (size_t r = 0; r < nrows; ++r) {
    bool zero = true;
    for (const auto& x : m[r])
      if (!field_ops<K>::is_zero(x)) { zero = false; break; }
    if (r < rank && !zero) {
      res.rows.push_back(std::move(m[r]));
      res.transform.push_back(std::move(t[r]));
    } else {
      res.kernel.push_back(std::move(t[r]));
    }
  }
  return res;
}

/// Reduced row echelon form of a set of vectors: canonical basis of their
/// span (pivot entries 1, pivot columns cleared), zero rows dropped.
template <class K>
std::vector<std::vector<K>> rref(std::vector<std::vector<K>> m) {
  auto res = echelon_reduce(std::move(m));
  return res.rows;
}

}  // namespace modcurve
