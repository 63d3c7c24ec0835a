#include <algorithm>
#include <cmath>
#include <limits>

#include "spkr/error.hpp"
#include "spkr/metrics.hpp"

namespace spkr {

// Shortest augmenting path Hungarian method on an n x n cost matrix
// (potentials u, v; 1-based internal indexing).
std::vector<int> max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols) {
  if (weights.size() != rows * cols) fail(Errc::DimensionMismatch, "max_weight_assignment: weight size mismatch");
  if (rows == 0) return {};
  if (cols == 0) return std::vector<int>(rows, -1);

  const std::size_t n = std::max(rows, cols);
  double top = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) fail(Errc::NonFinite, "max_weight_assignment: non-finite weight");
    top = std::max(top, w);
  }
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? top - weights[i * cols + j] : top;
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> match(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j] - 1;
    if (i < rows && j - 1 < cols) match[i] = static_cast<int>(j - 1);
  }
  return match;
}

}  // namespace spkr
