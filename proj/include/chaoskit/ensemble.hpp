#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chaoskit {

// N points in R^d, row-major.
struct ParticleEnsemble {
  double time = 0.0;
  std::size_t N = 0;
  int d = 1;
  std::vector<double> states;

  const double* particle(std::size_t i) const { return states.data() + i * d; }
  double* particle(std::size_t i) { return states.data() + i * d; }
  std::span<const double> view() const { return states; }
  void validate() const;  // N >= 1, sizes agree, finite coordinates
};

// Lexicographic argsort of the rows of an N x d block; ties keep index order
// so equal points are interchangeable.
void canonical_order(std::span<const double> x, std::size_t N, int d, std::uint32_t* order);

// Time-indexed reference clouds standing in for mu_t; piecewise constant from
// the left: at(t) is the cloud of the largest grid time <= t.
struct MeasureFlow {
  std::vector<double> times;
  std::vector<ParticleEnsemble> clouds;

  std::size_t index_at(double t) const;  // throws DomainError outside [t0, inf)
  const ParticleEnsemble& at(double t) const { return clouds[index_at(t)]; }
  std::size_t size() const noexcept { return times.size(); }
  void validate() const;
};

// A recorded trajectory of R replicas x N particles in R^d.
struct Trajectory {
  std::size_t R = 0;
  std::size_t N = 0;
  int d = 1;
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // one R*N*d block per recorded time

  const double* at(std::size_t k, std::size_t replica, std::size_t i) const {
    return states[k].data() + (replica * N + i) * d;
  }
};

}  // namespace chaoskit
