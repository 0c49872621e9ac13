#include <algorithm>
#include <cmath>
#include <exception>

#include <boost/math/special_functions/legendre.hpp>

#include "chaoskit/analysis.hpp"
#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/stats.hpp"

namespace chaoskit {

DiffusionSpec constant_diffusion(int d, double beta) {
  if (d < 1 || !(beta >= 0.0)) throw DomainError("constant_diffusion: bad parameters");
  DiffusionSpec m;
  m.d = d;
  m.name = "constant";
  const double s = std::sqrt(beta);
  m.sigma = [d, s](const double*, double* out) {
    for (int a = 0; a < d * d; ++a) out[a] = 0.0;
    for (int a = 0; a < d; ++a) out[a * d + a] = s;
  };
  return m;
}

DiffusionSpec linear_diffusion(int d, double a, double beta) {
  DiffusionSpec m = constant_diffusion(d, beta);
  m.name = "linear";
  m.b = [d, a](const double* x, double* out) {
    for (int k = 0; k < d; ++k) out[k] = -a * x[k];
  };
  if (beta == 0.0) m.sigma = nullptr;
  return m;
}

TestFunction gaussian_bump(double width, int d) {
  if (!(width > 0.0) || d < 1) throw DomainError("gaussian_bump: bad parameters");
  return {"gaussian_bump", [width, d](const double* x) {
            return std::exp(-norm2(x, d) / (2.0 * width * width));
          }};
}

double heat_gaussian_bump(double width, double beta, double t, std::span<const double> z) {
  if (z.empty() || !(beta >= 0.0) || !(t >= 0.0)) throw DomainError("heat_gaussian_bump: bad input");
  const double w2 = width * width, v = w2 + beta * t;
  const double dim = static_cast<double>(z.size());
  return std::pow(w2 / v, 0.5 * dim) * std::exp(-norm2(z.data(), static_cast<int>(z.size())) / (2.0 * v));
}

namespace {

struct GaussLegendre {
  std::vector<double> x, w;
};

GaussLegendre gauss_legendre(int n) {
  GaussLegendre g;
  const auto pos = boost::math::legendre_p_zeros<double>(n);
  for (double r : pos) {
    const double dp = boost::math::legendre_p_prime(n, r);
    const double w = 2.0 / ((1.0 - r * r) * dp * dp);
    g.x.push_back(r);
    g.w.push_back(w);
    if (r != 0.0) {
      g.x.push_back(-r);
      g.w.push_back(w);
    }
  }
  return g;
}

// Euler-Maruyama over `steps` steps of size h with normals from
// (channel, replica, particle).
void advance(const DiffusionSpec& m, double* x, std::size_t steps, double h,
             const NoiseSource& src, Channel ch, std::uint32_t replica, std::uint32_t particle,
             std::vector<double>& xi, std::vector<double>& buf) {
  const int d = m.d;
  const double sh = std::sqrt(h);
  double* drift = buf.data();
  double* sig = buf.data() + d;
  for (std::size_t k = 0; k < steps; ++k) {
    std::fill(buf.begin(), buf.end(), 0.0);
    if (m.b) m.b(x, drift);
    if (m.sigma) {
      m.sigma(x, sig);
      src.normals(ch, replica, particle, k, xi);
    }
    for (int a = 0; a < d; ++a) {
      double v = x[a] + drift[a] * h;
      if (m.sigma)
        for (int b = 0; b < d; ++b) v += sig[a * d + b] * xi[b] * sh;
      x[a] = v;
    }
  }
}

std::size_t steps_for(double span, double dt) {
  return span <= 0.0 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
}

}  // namespace

DuhamelResult duhamel_residual(const DiffusionSpec& m1, const DiffusionSpec& m2,
                               const TestFunction& f, double t,
                               const std::vector<std::vector<double>>& z_grid,
                               const DuhamelOptions& opt) {
  if (m1.d != m2.d || m1.d < 1) throw DomainError("duhamel: models must share the state space");
  if (!(t > 0.0)) throw DomainError("duhamel: t must be > 0");
  if (opt.outer < 2 || opt.inner < 1 || opt.s_nodes < 1 || !(opt.h > 0.0) || !(opt.dt > 0.0))
    throw DomainError("duhamel: invalid options");
  const int d = m1.d;
  const std::size_t dd = static_cast<std::size_t>(d) * d;
  const GaussLegendre gl = gauss_legendre(static_cast<int>(opt.s_nodes));
  const NoiseSource root(opt.seed, purpose::duhamel);

  // stencil offsets: centre, +-h e_k, and the four corners for every k < l
  std::vector<std::vector<double>> stencil;
  stencil.emplace_back(d, 0.0);
  for (int k = 0; k < d; ++k)
    for (double sg : {1.0, -1.0}) {
      std::vector<double> o(d, 0.0);
      o[k] = sg * opt.h;
      stencil.push_back(o);
    }
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l)
      for (double sk : {1.0, -1.0})
        for (double sl : {1.0, -1.0}) {
          std::vector<double> o(d, 0.0);
          o[k] = sk * opt.h;
          o[l] = sl * opt.h;
          stencil.push_back(o);
        }
  auto corner = [d](int k, int l, int sk, int sl) {  // index of (sk e_k + sl e_l)
    std::size_t idx = 1 + 2 * static_cast<std::size_t>(d);
    for (int a = 0; a < k; ++a) idx += 4 * static_cast<std::size_t>(d - a - 1);
    idx += 4 * static_cast<std::size_t>(l - k - 1);
    return idx + (sk > 0 ? 0 : 2) + (sl > 0 ? 0 : 1);
  };

  DuhamelResult res;
  for (std::size_t zi = 0; zi < z_grid.size(); ++zi) {
    const auto& z = z_grid[zi];
    if (z.size() != static_cast<std::size_t>(d)) throw DomainError("duhamel: z has wrong dimension");
    DuhamelPoint pt;
    pt.z = z;
    const NoiseSource zsrc = root.split(zi);

    // left side with common noise
    {
      const std::size_t n = steps_for(t, opt.dt);
      const double h = t / static_cast<double>(n);
      std::vector<double> diff(opt.outer);
#pragma omp parallel for schedule(static)
      for (std::size_t o = 0; o < opt.outer; ++o) {
        std::vector<double> x1(z), x2(z), xi(d), buf(dd + d);
        advance(m1, x1.data(), n, h, zsrc, Channel::W, 0, static_cast<std::uint32_t>(o), xi, buf);
        advance(m2, x2.data(), n, h, zsrc, Channel::W, 0, static_cast<std::uint32_t>(o), xi, buf);
        diff[o] = f.f(x1.data()) - f.f(x2.data());
      }
      const MeanSE ms = mean_se(diff);
      pt.lhs = ms.mean;
      pt.lhs_se = ms.se;
    }

    // right side: time quadrature of nested estimates
    CompensatedSum rhs;
    double var = 0.0;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double s = 0.5 * t * (gl.x[q] + 1.0);
      const double wq = 0.5 * t * gl.w[q];
      const std::size_t n1 = steps_for(s, opt.dt), n2 = steps_for(t - s, opt.dt);
      const double h1 = s / static_cast<double>(n1), h2 = (t - s) / static_cast<double>(n2);
      const NoiseSource qsrc = zsrc.split(1 + q);
      std::vector<double> g(opt.outer, 0.0);
      std::exception_ptr err;
#pragma omp parallel for schedule(static)
      for (std::size_t o = 0; o < opt.outer; ++o) {
        try {
          std::vector<double> x(z), xi(d), buf(dd + d);
          advance(m1, x.data(), n1, h1, qsrc, Channel::W, 0, static_cast<std::uint32_t>(o), xi, buf);
          std::vector<double> db(d, 0.0), b2(d, 0.0), s1(dd, 0.0), s2(dd, 0.0), da(dd, 0.0);
          if (m1.b) m1.b(x.data(), db.data());
          if (m2.b) m2.b(x.data(), b2.data());
          if (m1.sigma) m1.sigma(x.data(), s1.data());
          if (m2.sigma) m2.sigma(x.data(), s2.data());
          bool zero = true;
          for (int a = 0; a < d; ++a) {
            db[a] -= b2[a];
            zero = zero && db[a] == 0.0;
          }
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              double v = 0.0;
              for (int l = 0; l < d; ++l) v += s1[a * d + l] * s1[b * d + l] - s2[a * d + l] * s2[b * d + l];
              da[a * d + b] = v;
              zero = zero && v == 0.0;
            }
          if (zero) continue;  // L1 - L2 vanishes here
          // P2_{t-s} f at the stencil points, common inner noise
          std::vector<CompensatedSum> u(stencil.size());
          std::vector<double> y(d);
          for (std::size_t j = 0; j < opt.inner; ++j) {
            const auto pid = static_cast<std::uint32_t>(o * opt.inner + j);
            for (std::size_t p = 0; p < stencil.size(); ++p) {
              for (int a = 0; a < d; ++a) y[a] = x[a] + stencil[p][a];
              advance(m2, y.data(), n2, h2, qsrc, Channel::Misc, 1, pid, xi, buf);
              u[p].add(f.f(y.data()));
            }
          }
          const double inv = 1.0 / static_cast<double>(opt.inner);
          auto U = [&](std::size_t p) { return u[p].value() * inv; };
          double acc = 0.0;
          const double H = opt.h;
          for (int k = 0; k < d; ++k) {
            const double up = U(1 + 2 * k), um = U(2 + 2 * k);
            acc += db[k] * (up - um) / (2.0 * H);
            acc += 0.5 * da[k * d + k] * (up - 2.0 * U(0) + um) / (H * H);
          }
          for (int k = 0; k < d; ++k)
            for (int l = k + 1; l < d; ++l) {
              const double mixed = (U(corner(k, l, 1, 1)) - U(corner(k, l, 1, -1)) -
                                    U(corner(k, l, -1, 1)) + U(corner(k, l, -1, -1))) /
                                   (4.0 * H * H);
              acc += da[k * d + l] * mixed;  // both off-diagonal entries, halved
            }
          g[o] = acc;
        } catch (...) {
#pragma omp critical(chaoskit_duhamel_err)
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
      const MeanSE ms = mean_se(g);
      rhs.add(wq * ms.mean);
      var += wq * wq * ms.se * ms.se;
    }
    pt.rhs = rhs.value();
    pt.rhs_se = std::sqrt(var);
    pt.residual = std::abs(pt.lhs - pt.rhs);
    pt.error = std::hypot(pt.lhs_se, pt.rhs_se);
    if (pt.residual >= res.max_residual) {
      res.max_residual = pt.residual;
      res.error_at_max = pt.error;
    }
    if (pt.rhs_se > 5.0 * pt.lhs_se && pt.rhs_se > 0.5 * std::abs(pt.rhs) && res.warning.empty())
      res.warning = "finite-difference noise dominates the generator term; raise inner or h";
    res.points.push_back(std::move(pt));
  }
  return res;
}

}  // namespace chaoskit
