#pragma once

// Hot loops of the simulator. Each kernel has a serial reference version
// (generic evaluators, one particle at a time) and an OpenMP version
// (structured fast paths, rows split across threads). Per-row arithmetic in
// the OpenMP version never depends on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>

#include "chaoskit/model.hpp"

namespace chaoskit {

enum class Exec { serial, parallel };

// Mean-field fields of R independent N-particle systems stored back to back
// in x (R*N*d). order holds a canonical ordering of each replica (R*N);
// sums over j follow it. drift is R*N*d, diffusion R*N*d*n.
void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion, Exec exec);

// Fields of P free points against one reference cloud (Nc x d, already in
// canonical order): b0(p) + mean_j b1(p, y_j), mean_j sigma(p, y_j).
void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion, Exec exec);

// C[a*M + b] = sum_i |A_a^i - B_b^i|^eta over the m blocks of d coordinates.
void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C, Exec exec);

namespace serial {
void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion);
void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion);
void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C);
}  // namespace serial

namespace parallel {
void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion);
void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion);
void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C);
}  // namespace parallel

// Sets the OpenMP team size; 0 keeps the runtime default.
void set_threads(int threads);
int max_threads();

}  // namespace chaoskit
