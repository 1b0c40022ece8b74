#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rational.hpp"

namespace sarkisov {

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;

/* Solve A x = b exactly for square nonsingular A; nullopt when singular. */
inline std::optional<RatVec> solve_square(RatMat a, RatVec b) {
  const std::size_t n = a.size();
  for (auto& row : a)
    if (row.size() != n) fail(errc::internal_invariant_violation, "nonsquare solve");
  if (b.size() != n) fail(errc::internal_invariant_violation, "rhs size mismatch");
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rat f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  RatVec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

/* General affine solve A x = b (A is k x n).  Returns a particular solution
   and a basis of the homogeneous kernel, or nullopt when inconsistent. */
struct AffineSolution {
  RatVec particular;
  std::vector<RatVec> kernel;
};

inline std::optional<AffineSolution> solve_affine(RatMat a, RatVec b) {
  const std::size_t k = a.size();
  if (b.size() != k) fail(errc::internal_invariant_violation, "rhs size mismatch");
  const std::size_t n = k ? a[0].size() : 0;
  for (auto& row : a)
    if (row.size() != n) fail(errc::internal_invariant_violation, "ragged matrix");

  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < k; ++col) {
    std::size_t piv = row;
    while (piv < k && a[piv][col] == 0) ++piv;
    if (piv == k) continue;
    std::swap(a[piv], a[row]);
    std::swap(b[piv], b[row]);
    Rat d = a[row][col];
    for (std::size_t c = 0; c < n; ++c) a[row][c] /= d;
    b[row] /= d;
    for (std::size_t r = 0; r < k; ++r) {
      if (r == row || a[r][col] == 0) continue;
      Rat f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) a[r][c] -= f * a[row][c];
      b[r] -= f * b[row];
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < k; ++r)
    if (b[r] != 0) return std::nullopt;  // inconsistent

  AffineSolution out;
  out.particular.assign(n, Rat(0));
  for (std::size_t i = 0; i < pivot_col.size(); ++i)
    out.particular[pivot_col[i]] = b[i];

  std::vector<bool> is_pivot(n, false);
  for (auto c : pivot_col) is_pivot[c] = true;
  for (std::size_t free_col = 0; free_col < n; ++free_col) {
    if (is_pivot[free_col]) continue;
    RatVec v(n, Rat(0));
    v[free_col] = 1;
    for (std::size_t i = 0; i < pivot_col.size(); ++i)
      v[pivot_col[i]] = -a[i][free_col];
    out.kernel.push_back(std::move(v));
  }
  return out;
}

/* Positive-definiteness of a symmetric matrix via exact pivots: all leading
   principal minors are positive iff every elimination pivot is positive. */
inline bool positive_definite(RatMat g) {
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (g[i][i] <= 0) return false;
    for (std::size_t r = i + 1; r < n; ++r) {
      if (g[r][i] == 0) continue;
      Rat f = g[r][i] / g[i][i];
      for (std::size_t c = i; c < n; ++c) g[r][c] -= f * g[i][c];
    }
  }
  return true;
}

}  // namespace sarkisov
