#include "chaoskit/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chaoskit/error.hpp"

namespace chaoskit {

void ParticleEnsemble::validate() const {
  if (N < 1) throw DomainError("ensemble: N must be >= 1");
  if (d < 1) throw DomainError("ensemble: d must be >= 1");
  if (states.size() != N * static_cast<std::size_t>(d))
    throw DomainError("ensemble: states size does not match N*d");
  for (double v : states)
    if (!std::isfinite(v)) throw NumericError("ensemble: non-finite coordinate");
}

void canonical_order(std::span<const double> x, std::size_t N, int d, std::uint32_t* order) {
  std::iota(order, order + N, 0u);
  if (d == 1) {
    std::stable_sort(order, order + N, [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
    return;
  }
  std::stable_sort(order, order + N, [&](std::uint32_t a, std::uint32_t b) {
    const double* pa = x.data() + static_cast<std::size_t>(a) * d;
    const double* pb = x.data() + static_cast<std::size_t>(b) * d;
    return std::lexicographical_compare(pa, pa + d, pb, pb + d);
  });
}

std::size_t MeasureFlow::index_at(double t) const {
  if (times.empty()) throw DomainError("flow: empty time grid");
  if (t < times.front() - 1e-12 * (1.0 + std::abs(times.front())))
    throw DomainError("flow: time before the start of the grid");
  // Tolerate round-off from accumulating step counts.
  const double probe = t + 1e-9 * (1.0 + std::abs(t)) * 1e-3;
  auto it = std::upper_bound(times.begin(), times.end(), probe);
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - times.begin()) - 1));
}

void MeasureFlow::validate() const {
  if (times.empty() || times.size() != clouds.size())
    throw DomainError("flow: times and clouds must be nonempty and of equal length");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw DomainError("flow: time grid must be strictly increasing");
  for (const auto& c : clouds) {
    c.validate();
    if (c.N != clouds.front().N || c.d != clouds.front().d)
      throw DomainError("flow: clouds must share N and d");
  }
}

}  // namespace chaoskit
