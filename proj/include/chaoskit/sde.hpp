#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chaoskit/ensemble.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/rng.hpp"

namespace chaoskit {

struct SimConfig {
  double dt = 1e-2;
  double T = 1.0;
  std::uint64_t seed = 0;
  std::size_t M = 1;             // replicas
  std::size_t record_every = 1;  // steps between recorded states (final state always kept)
  Exec exec = Exec::parallel;

  std::size_t steps() const;  // round(T / dt)
  void validate() const;
};

// Initial laws. iid kinds draw every particle independently; mixture draws a
// latent component per replica, then the particles iid given it.
struct InitSpec {
  enum class Kind { point, gaussian, uniform_box, mixture };
  struct Component {
    double weight = 1.0;
    std::vector<double> mean;  // d
    double std = 1.0;
  };
  Kind kind = Kind::gaussian;
  std::vector<double> center;  // d; zeros when empty
  double scale = 1.0;          // gaussian std or box half-width
  std::vector<Component> components;

  void validate(int d) const;
};

InitSpec::Kind parse_init_kind(const std::string& name);  // throws DomainError

ParticleEnsemble sample_exchangeable_init(const InitSpec& spec, std::size_t N, int d,
                                          std::uint64_t seed, std::uint32_t replica = 0);

// R replicas x N particles, back to back.
std::vector<double> sample_init_block(const InitSpec& spec, std::size_t R, std::size_t N, int d,
                                      std::uint64_t seed);

// One Euler-Maruyama step of an N-particle system. dW is N*d, dB is N*n
// (already scaled by sqrt(dt)).
ParticleEnsemble step_particle_system(const ModelSpec& model, const ParticleEnsemble& ensemble,
                                      double dt, std::span<const double> dW,
                                      std::span<const double> dB, Exec exec = Exec::parallel,
                                      std::size_t step_index = 0);

// R replicas of the N-particle system started from init (R*N*d). Particle i
// of replica r draws its noise from stream stream_ids[i] (identity when
// empty); permuting both init and stream_ids permutes the output.
Trajectory simulate_particle_system(const ModelSpec& model, std::span<const double> init,
                                    std::size_t R, std::size_t N, const SimConfig& cfg,
                                    std::span<const std::uint32_t> stream_ids = {},
                                    std::uint64_t purpose_tag = purpose::particle_system);

// Self-consistent N_ref-particle approximation of the limit law; every
// recorded cloud is stored in canonical order. Warns (returns a message) if
// N_ref < 8 * largest_N.
MeasureFlow simulate_reference_flow(const ModelSpec& model, std::size_t N_ref,
                                    const InitSpec& init, const SimConfig& cfg,
                                    std::string* warning = nullptr, std::size_t largest_N = 0);

// P independent copies of the decoupled SDE driven by the flow, started at
// time s from points z (P*d). Recorded times are absolute.
Trajectory simulate_decoupled(const ModelSpec& model, const MeasureFlow& flow, double s,
                              std::span<const double> z, std::size_t P, const SimConfig& cfg,
                              std::uint64_t purpose_tag = purpose::decoupled);

}  // namespace chaoskit
