#pragma once

// Seeded instance generators.

#include <algorithm>
#include <cstdint>
#include <random>

#include "framescale/linalg.hpp"

namespace framescale {

using Rng = std::mt19937_64;

/// d x n standard-normal frame; redrawn until full row rank.
inline Matrix gaussian_frame(Index d, Index n, Rng& rng) {
  if (d < 1 || n < d) throw InvalidInput("gaussian_frame: need 1 <= d <= n");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Matrix u(d, n);
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < d; ++i) u(i, j) = normal(rng);
    if (numerical_rank(u) == d) return u;
  }
}

inline Vector uniform_marginals(Index d, Index n) {
  return Vector::Constant(n, static_cast<double>(d) / static_cast<double>(n));
}

struct PlantedFrame {
  Matrix u;
  Vector c;
  IndexSet cluster;  // columns spanning rank r with c(cluster) = r + 1/2
  Index cluster_rank = 0;
};

/// Integer frame with a planted rank-r cluster of m columns carrying mass r + 1/2.
/// The remaining columns share d - r - 1/2 equally.
inline PlantedFrame planted_infeasible_frame(Index d, Index n, Rng& rng) {
  if (d < 2 || n < d + 1) throw InvalidInput("planted_infeasible_frame: need d >= 2 and n >= d + 1");
  std::uniform_int_distribution<int> entry(-3, 3);
  PlantedFrame out;
  out.cluster_rank = std::uniform_int_distribution<Index>(1, d - 1)(rng);
  const Index r = out.cluster_rank;
  const Index m = std::uniform_int_distribution<Index>(r + 1, n - (d - r))(rng);
  for (;;) {
    Matrix basis(d, r);
    for (Index j = 0; j < r; ++j)
      for (Index i = 0; i < d; ++i) basis(i, j) = entry(rng);
    if (numerical_rank(basis) != r) continue;

    Matrix u(d, n);
    for (Index j = 0; j < m; ++j) {
      Vector coeff(r);
      do {
        for (Index k = 0; k < r; ++k) coeff(k) = entry(rng);
      } while (coeff.isZero());
      u.col(j) = basis * coeff;
    }
    for (Index j = m; j < n; ++j)
      for (Index i = 0; i < d; ++i) u(i, j) = entry(rng);
    if (numerical_rank(u.leftCols(m)) != r || numerical_rank(u) != d) continue;

    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) perm[static_cast<std::size_t>(j)] = j;
    std::shuffle(perm.begin(), perm.end(), rng);
    out.u.resize(d, n);
    out.c.resize(n);
    out.cluster.clear();
    for (Index j = 0; j < n; ++j) {
      const Index dst = perm[static_cast<std::size_t>(j)];
      out.u.col(dst) = u.col(j);
      if (j < m) {
        out.c(dst) = (static_cast<double>(r) + 0.5) / static_cast<double>(m);
        out.cluster.push_back(dst);
      } else {
        out.c(dst) = (static_cast<double>(d - r) - 0.5) / static_cast<double>(n - m);
      }
    }
    std::sort(out.cluster.begin(), out.cluster.end());
    return out;
  }
}

/// 0/1 matrix containing a random permutation pattern (when m == n) plus edges
/// with probability `density`; every row and column is nonzero.
inline Matrix bipartite_matrix(Index m, Index n, Rng& rng, double density = 0.4) {
  if (m < 1 || n < 1) throw InvalidInput("bipartite_matrix: need positive dimensions");
  std::bernoulli_distribution edge(density);
  Matrix a = Matrix::Zero(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j)
      if (edge(rng)) a(i, j) = 1.0;
  std::vector<Index> perm(static_cast<std::size_t>(std::max(m, n)));
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = static_cast<Index>(k);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (Index k = 0; k < std::max(m, n); ++k) a(k % m, perm[static_cast<std::size_t>(k)] % n) = 1.0;
  return a;
}

/// Entries uniform in [lo, 1].
inline Matrix positive_matrix(Index m, Index n, Rng& rng, double lo = 0.1) {
  std::uniform_real_distribution<double> dist(lo, 1.0);
  Matrix a(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = dist(rng);
  return a;
}

struct PlantedHall {
  Matrix a;
  IndexSet columns;  // t columns supported only on the rows below
  IndexSet rows;     // t - 1 rows
};

/// n x n 0/1 matrix where t columns touch only t - 1 rows, so unit marginals violate Hall.
inline PlantedHall planted_hall_violation(Index n, Rng& rng) {
  if (n < 3) throw InvalidInput("planted_hall_violation: need n >= 3");
  const Index t = std::uniform_int_distribution<Index>(2, n - 1)(rng);
  std::vector<Index> cols(static_cast<std::size_t>(n));
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) cols[static_cast<std::size_t>(k)] = rows[static_cast<std::size_t>(k)] = k;
  std::shuffle(cols.begin(), cols.end(), rng);
  std::shuffle(rows.begin(), rows.end(), rng);
  PlantedHall out;
  out.columns.assign(cols.begin(), cols.begin() + t);
  out.rows.assign(rows.begin(), rows.begin() + (t - 1));
  std::sort(out.columns.begin(), out.columns.end());
  std::sort(out.rows.begin(), out.rows.end());
  std::vector<bool> in_cols(static_cast<std::size_t>(n), false);
  std::vector<bool> in_rows(static_cast<std::size_t>(n), false);
  for (Index j : out.columns) in_cols[static_cast<std::size_t>(j)] = true;
  for (Index i : out.rows) in_rows[static_cast<std::size_t>(i)] = true;

  std::bernoulli_distribution edge(0.5);
  out.a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (in_cols[static_cast<std::size_t>(j)] && !in_rows[static_cast<std::size_t>(i)]) continue;
      if (edge(rng)) out.a(i, j) = 1.0;
    }
  // guarantee nonzero rows and columns without breaking the planted block
  const IndexSet outside_cols(cols.begin() + t, cols.end());
  for (Index i = 0; i < n; ++i)
    if (out.a.row(i).isZero())
      out.a(i, in_rows[static_cast<std::size_t>(i)] ? out.columns.front() : outside_cols.front()) = 1.0;
  for (Index j = 0; j < n; ++j)
    if (out.a.col(j).isZero()) out.a(in_cols[static_cast<std::size_t>(j)] ? out.rows.front() : rows.back(), j) = 1.0;
  return out;
}

}  // namespace framescale
