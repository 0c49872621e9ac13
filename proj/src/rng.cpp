#include "chaoskit/rng.hpp"

#include <cmath>
#include <numbers>

namespace chaoskit {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline void box_muller(double u1, double u2, double& z0, double& z1) {
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t purpose_tag)
    : key_(splitmix64(seed ^ splitmix64(purpose_tag))) {}

NoiseSource NoiseSource::split(std::uint64_t tag) const {
  NoiseSource child;
  child.key_ = splitmix64(key_ ^ splitmix64(tag + 0x632BE59BD9B4E019ull));
  return child;
}

std::array<std::uint32_t, 4> NoiseSource::block(Channel ch, std::uint32_t replica,
                                                 std::uint32_t particle, std::uint64_t step,
                                                 std::uint32_t index) const {
  // step occupies 40 bits, index 16 bits, channel 8 bits.
  const std::uint32_t step_lo = static_cast<std::uint32_t>(step);
  const std::uint32_t step_hi = static_cast<std::uint32_t>(step >> 32) & 0xFFu;
  const std::uint32_t tail = (static_cast<std::uint32_t>(ch) << 24) | (step_hi << 16) | (index & 0xFFFFu);
  return philox4x32({step_lo, particle, replica, tail},
                    {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
}

void NoiseSource::normals(Channel ch, std::uint32_t replica, std::uint32_t particle,
                          std::uint64_t step, std::span<double> out) const {
  const std::size_t n = out.size();
  for (std::size_t b = 0; 2 * b < n; ++b) {
    const auto r = block(ch, replica, particle, step, static_cast<std::uint32_t>(b));
    double z0, z1;
    box_muller(to_open_unit(r[0], r[1]), to_open_unit(r[2], r[3]), z0, z1);
    out[2 * b] = z0;
    if (2 * b + 1 < n) out[2 * b + 1] = z1;
  }
}

void NoiseSource::uniforms(Channel ch, std::uint32_t replica, std::uint32_t particle,
                           std::uint64_t step, std::span<double> out) const {
  const std::size_t n = out.size();
  for (std::size_t b = 0; 2 * b < n; ++b) {
    const auto r = block(ch, replica, particle, step, static_cast<std::uint32_t>(b));
    out[2 * b] = to_open_unit(r[0], r[1]);
    if (2 * b + 1 < n) out[2 * b + 1] = to_open_unit(r[2], r[3]);
  }
}

double NoiseSource::uniform(Channel ch, std::uint32_t replica, std::uint32_t particle,
                           std::uint64_t step) const {
  const auto r = block(ch, replica, particle, step, 0xFFFFu);
  return to_open_unit(r[0], r[1]);
}

double SequentialRng::uniform() {
  return src_.uniform(Channel::Misc, replica_, lane_, counter_++);
}

double SequentialRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double z[2];
  src_.normals(Channel::Misc, replica_, lane_ ^ 0x80000000u, counter_++, z);
  spare_ = z[1];
  has_spare_ = true;
  return z[0];
}

std::uint64_t SequentialRng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  auto v = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return v >= n ? n - 1 : v;
}

}  // namespace chaoskit
