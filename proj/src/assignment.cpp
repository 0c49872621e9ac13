#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/transport.hpp"

namespace chaoskit {

// Jonker-Volgenant style shortest augmenting path with row/column potentials.
// Rows are inserted one at a time; each insertion runs a Dijkstra over columns
// in reduced costs, so the matching stays optimal for the rows seen so far.
Assignment solve_assignment(std::span<const double> C, std::size_t n) {
  if (C.size() != n * n) throw DomainError("assignment: cost matrix must be n x n");
  Assignment out;
  out.match.assign(n, 0);
  if (n == 0) return out;
  for (double c : C)
    if (!std::isfinite(c)) throw NumericError("assignment: non-finite cost", 0);

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based columns; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const double* row = C.data() + (i0 - 1) * n;
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
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

  CompensatedSum total;
  for (std::size_t j = 1; j <= n; ++j) out.match[p[j] - 1] = j - 1;
  for (std::size_t i = 0; i < n; ++i) total.add(C[i * n + out.match[i]]);
  out.total = total.value();
  return out;
}

}  // namespace chaoskit
