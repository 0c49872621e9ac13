#pragma once

// Counter-based random streams. Every variate is a pure function of
// (key, channel, replica, particle, step, block), so results do not depend on
// how work is split across threads.

#include <array>
#include <cstdint>
#include <span>

namespace chaoskit {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

enum class Channel : std::uint32_t {
  W = 0,       // additive noise W^i
  B = 1,       // interacting-noise driver B^i
  WTilde = 2,  // independent stream for the smoothed coupling
  Init = 3,
  Coupling = 4,
  Misc = 5,
};

// Well-separated purposes so that e.g. the reference flow and the particle
// system never share a stream under the same master seed.
namespace purpose {
inline constexpr std::uint64_t particle_system = 0x5157'0001;
inline constexpr std::uint64_t reference_flow = 0x5157'0002;
inline constexpr std::uint64_t decoupled = 0x5157'0003;
inline constexpr std::uint64_t coupling = 0x5157'0004;
inline constexpr std::uint64_t init = 0x5157'0005;
inline constexpr std::uint64_t bootstrap = 0x5157'0006;
inline constexpr std::uint64_t audit = 0x5157'0007;
inline constexpr std::uint64_t lln = 0x5157'0008;
inline constexpr std::uint64_t gradient = 0x5157'0009;
inline constexpr std::uint64_t duhamel = 0x5157'000a;
}  // namespace purpose

class NoiseSource {
 public:
  NoiseSource() : NoiseSource(0, 0) {}
  NoiseSource(std::uint64_t seed, std::uint64_t purpose_tag);

  // A child source with an independent key.
  NoiseSource split(std::uint64_t tag) const;

  // Fills `out` with iid standard normals for the given stream coordinates.
  void normals(Channel ch, std::uint32_t replica, std::uint32_t particle, std::uint64_t step,
               std::span<double> out) const;

  // Uniforms on the open interval (0, 1).
  void uniforms(Channel ch, std::uint32_t replica, std::uint32_t particle, std::uint64_t step,
                std::span<double> out) const;

  double uniform(Channel ch, std::uint32_t replica, std::uint32_t particle,
                 std::uint64_t step) const;

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::array<std::uint32_t, 4> block(Channel ch, std::uint32_t replica, std::uint32_t particle,
                                     std::uint64_t step, std::uint32_t index) const;
  std::uint64_t key_;
};

// Sequential convenience generator on top of NoiseSource, for code paths
// that draw an unstructured sequence (bootstrap, audits, samplers).
class SequentialRng {
 public:
  SequentialRng(const NoiseSource& src, std::uint32_t replica = 0, std::uint32_t lane = 0)
      : src_(src), replica_(replica), lane_(lane) {}

  double uniform();  // (0, 1)
  double normal();
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

 private:
  NoiseSource src_;
  std::uint32_t replica_;
  std::uint32_t lane_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace chaoskit
