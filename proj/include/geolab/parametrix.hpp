#pragma once
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "geolab/jacobi.hpp"
#include "geolab/quadrature.hpp"

namespace geolab {

namespace detail {

// coth r - 1/r; odd, -> 0 at the origin.  Series below the cancellation zone.
inline double coth_minus_inv_r(double r) {
  if (std::abs(r) < 0.05) {
    const double x = r * r;
    return r * (1.0 / 3.0 + x * (-1.0 / 45.0 + x * (2.0 / 945.0 - x / 4725.0)));
  }
  return 1.0 / std::tanh(r) - 1.0 / r;
}

// 1/r^2 - 1/sinh^2 r; even, -> 1/3 at the origin.
inline double inv_r2_minus_csch2(double r) {
  if (std::abs(r) < 0.05) {
    const double x = r * r;
    return 1.0 / 3.0 + x * (-1.0 / 15.0 + x * (2.0 / 189.0 - x / 675.0));
  }
  const double s = std::sinh(r);
  return 1.0 / (r * r) - 1.0 / (s * s);
}

}  // namespace detail

// Rotationally symmetric model: everything the coefficient recursions need is
// the normalized density Theta(r) (Theta(0) = 1) and its log-derivatives.  The
// full density is vartheta(r) = r^(n-1) Theta(r).
struct RadialModel {
  int n = 0;
  std::string name = "radial";
  std::function<double(double)> theta;
  std::function<double(double)> log_theta_prime;   // (log Theta)'(r)
  std::function<double(double)> log_theta_second;  // (log Theta)''(r); may be null

  double vartheta(double r) const { return std::pow(r, n - 1) * theta(r); }
  // (log vartheta)'(r) = (n-1)/r + (log Theta)'(r); callers handle r = 0
  double rho(double r) const { return (n - 1) / r + log_theta_prime(r); }
};

inline RadialModel radial_flat(int n) {
  if (n < 2) throw config_error("radial model: dimension must be at least 2");
  RadialModel m;
  m.n = n;
  m.name = "flat:n=" + std::to_string(n);
  m.theta = [](double) { return 1.0; };
  m.log_theta_prime = [](double) { return 0.0; };
  m.log_theta_second = [](double) { return 0.0; };
  return m;
}

// Constant curvature -1: Theta = (sinh r / r)^(n-1).
inline RadialModel radial_hyperbolic(int n) {
  if (n < 2) throw config_error("radial model: dimension must be at least 2");
  RadialModel m;
  m.n = n;
  m.name = "hyperbolic:n=" + std::to_string(n);
  const double p = n - 1;
  m.theta = [p](double r) {
    if (std::abs(r) < 1e-6) return std::pow(1.0 + r * r / 6.0, p);
    return std::pow(std::sinh(r) / r, p);
  };
  m.log_theta_prime = [p](double r) { return p * detail::coth_minus_inv_r(r); };
  m.log_theta_second = [p](double r) { return p * detail::inv_r2_minus_csch2(r); };
  return m;
}

// Model backed by the zero-seeded Jacobi field of an arbitrary profile; a
// series expansion around r = 0 bridges the region below the solver grid.
inline RadialModel radial_from_profile(const CurvatureProfile& profile, double r_max,
                                       double step = 1e-3) {
  if (!(r_max > 4 * step)) throw config_error("radial model: range too small");
  auto traj = std::make_shared<JacobiTrajectory>(field_A(profile, r_max, step));
  if (const auto tc = first_conjugate_time(*traj); tc && *tc <= r_max)
    throw conjugate_point_error(*tc);
  const int m = profile.block();
  const double tr_k0 = profile.evaluate(0.0).trace();
  const double lo = 4 * step;
  RadialModel model;
  model.n = profile.dim.n;
  model.name = "profile:" + profile.spec_string;
  model.theta = [traj, m, tr_k0, lo](double r) {
    if (r < lo) return 1.0 - r * r * tr_k0 / 6.0;  // det(Id - r^2 K0 / 6) + O(r^4)
    return traj->det_at(r) / std::pow(r, m);
  };
  model.log_theta_prime = [traj, m, tr_k0, lo](double r) {
    if (r < lo) return -r * tr_k0 / 3.0;
    const auto st = traj->eval(r);
    return (st.Xp * st.X.partialPivLu().inverse()).trace() - m / r;
  };
  // (log Theta)'' = -tr K(r) - tr(U^2) + m/r^2 with U = X' X^(-1), from X'' = -K X
  model.log_theta_second = [traj, profile, m, tr_k0, lo](double r) {
    if (r < lo) return -tr_k0 / 3.0;
    const auto st = traj->eval(r);
    const MatrixXd U = st.Xp * st.X.partialPivLu().inverse();
    return -profile.evaluate(r).trace() - (U * U).trace() + m / (r * r);
  };
  return model;
}

namespace detail {

// Finite-difference weights for the d-th derivative on integer offsets,
// solved from the moment conditions; exact for polynomials up to the
// stencil size.
inline std::vector<double> stencil_weights(const std::vector<int>& offsets, int d, double h) {
  const int m = static_cast<int>(offsets.size());
  MatrixXd A(m, m);
  VectorXd b = VectorXd::Zero(m);
  double fact = 1.0;
  for (int p = 0; p < m; ++p) {
    if (p > 0) fact *= p;
    for (int j = 0; j < m; ++j) A(p, j) = std::pow(double(offsets[j]), p);
    if (p == d) b(p) = fact;
  }
  const VectorXd w = A.fullPivLu().solve(b);
  std::vector<double> out(m);
  for (int j = 0; j < m; ++j) out[j] = w(j) / std::pow(h, d);
  return out;
}

}  // namespace detail

// Radial Laplacian f'' + ((n-1)/r + Theta'/Theta) f' on a uniform grid that
// starts at r = 0.  Values are treated as samples of an even function, which
// settles the stencils near the origin; the singular 1/r term is finite there
// because f'(0) = 0, giving Delta f(0) = n f''(0).
inline std::vector<double> radial_laplacian(const RadialModel& model,
                                            const std::vector<double>& r,
                                            const std::vector<double>& f) {
  const size_t N = r.size();
  if (N < 8) throw config_error("radial laplacian: need at least 8 nodes");
  if (f.size() != N) throw config_error("radial laplacian: value/grid size mismatch");
  if (std::abs(r[0]) > 1e-15) throw config_error("radial laplacian: grid must start at 0");
  const double h = r[1] - r[0];
  if (!(h > 0)) throw config_error("radial laplacian: grid must be ascending");
  for (size_t i = 1; i < N; ++i)
    if (std::abs(r[i] - r[i - 1] - h) > 1e-9 * (1.0 + r[i]))
      throw config_error("radial laplacian: grid must be uniform");

  const auto at = [&](long i) { return f[static_cast<size_t>(i < 0 ? -i : i)]; };
  std::vector<double> d1(N), d2(N);
  for (size_t i = 0; i < N; ++i) {
    const long j = static_cast<long>(i);
    if (i + 2 < N) {  // centered, even extension covers i < 2
      d1[i] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
      d2[i] = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1) -
               at(j + 2)) /
              (12.0 * h * h);
    } else {  // shifted stencils at the right edge
      static const std::vector<int> off1{-4, -3, -2, -1, 0};
      static const std::vector<int> off2{-5, -4, -3, -2, -1, 0};
      const auto w1 = detail::stencil_weights(off1, 1, h);
      const auto w2 = detail::stencil_weights(off2, 2, h);
      // weights sum to zero; differencing against f(j) keeps constants exact
      double s1 = 0.0, s2 = 0.0;
      for (size_t q = 0; q < off1.size(); ++q) s1 += w1[q] * (at(j + off1[q]) - at(j));
      for (size_t q = 0; q < off2.size(); ++q) s2 += w2[q] * (at(j + off2[q]) - at(j));
      d1[i] = s1;
      d2[i] = s2;
    }
  }
  std::vector<double> out(N);
  out[0] = model.n * d2[0];
  for (size_t i = 1; i < N; ++i) out[i] = d2[i] + model.rho(r[i]) * d1[i];
  return out;
}

struct CoefficientTable {
  std::vector<double> r;
  std::vector<std::vector<double>> u;  // u[k][i], k = 0..k_max
  std::string variant;
  std::string model;
  int n = 0;
};

namespace detail {

// (log Theta)''; falls back to differencing log_theta_prime when the model
// does not carry it, reflecting oddly through the origin.
inline double ltpp(const RadialModel& model, double r) {
  if (model.log_theta_second) return model.log_theta_second(r);
  const double d = 1e-4 * (1.0 + r);
  const auto odd = [&](double x) {
    return x >= 0 ? model.log_theta_prime(x) : -model.log_theta_prime(-x);
  };
  return (odd(r + d) - odd(r - d)) / (2.0 * d);
}

// (log Theta)'(r) / r, finite at the origin where it tends to (log Theta)''(0).
inline double ltp_over_r(const RadialModel& model, double r) {
  if (r == 0.0) return ltpp(model, 0.0);
  return model.log_theta_prime(r) / r;
}

// First derivative of samples of an even function on a uniform grid starting
// at 0; centered 5-point stencils, reflected through the origin, shifted at
// the right edge.
inline std::vector<double> fd1_even(const std::vector<double>& y, double h) {
  const size_t N = y.size();
  const auto at = [&](long i) { return y[static_cast<size_t>(i < 0 ? -i : i)]; };
  std::vector<double> d(N);
  d[0] = 0.0;
  for (size_t i = 1; i < N; ++i) {
    const long j = static_cast<long>(i);
    if (i + 2 < N) {
      d[i] = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
    } else {
      static const std::vector<int> off{-4, -3, -2, -1, 0};
      const auto w = stencil_weights(off, 1, h);
      double s = 0.0;
      for (size_t q = 0; q < off.size(); ++q) s += w[q] * (at(j + off[q]) - at(j));
      d[i] = s;
    }
  }
  return d;
}

// C^2 ramp: 1 below lo, 0 above hi.
inline double blend_weight(double x, double lo, double hi) {
  if (x <= lo) return 1.0;
  if (x >= hi) return 0.0;
  const double t = (x - lo) / (hi - lo);
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Both recursions integrate phi(s) = s^k G(s) with G smooth and even, then
// divide by r^(k+1) (times a regular factor).  Near r = 0 the division
// amplifies quadrature error, so there the integral is taken from an even
// sextic fitted to G instead (interpolation nodes at r_sw/2, r_sw, 3 r_sw/2).
// The handover to the Simpson prefix is a C^2 blend over [r_lo, r_hi], not a
// hard switch: a kink in the error would be magnified by ~1/h^2 when the next
// recursion level needs derivatives, destroying convergence under refinement.
struct ReducedPrefix {
  std::vector<double> red;  // (int_0^{r_i} s^k G ds) / r_i^(k+1); red[0] is the limit
  double G0 = 0, a = 0, b = 0, c = 0;
  double r_lo = 0, r_hi = 0;
};

inline ReducedPrefix reduced_prefix(const std::vector<double>& r,
                                    const std::vector<double>& integrand, int k,
                                    double G0) {
  const size_t N = r.size();
  const double h = r[1] - r[0];
  const double r_sw = std::min(0.25, 0.25 * r.back());

  ReducedPrefix out;
  out.G0 = G0;
  out.r_lo = 0.5 * r_sw;
  out.r_hi = 1.5 * r_sw;

  size_t m1 = std::max<size_t>(1, static_cast<size_t>(std::lround(r_sw / (2.0 * h))));
  if (3 * m1 + 1 >= N) m1 = (N - 1) / 3;
  Eigen::Matrix3d V;
  Eigen::Vector3d rhs;
  for (int j = 0; j < 3; ++j) {
    const double s = r[(j + 1) * m1];
    const double x = s * s;
    V(j, 0) = x;
    V(j, 1) = x * x;
    V(j, 2) = x * x * x;
    rhs(j) = integrand[(j + 1) * m1] / std::pow(s, k) - G0;
  }
  const Eigen::Vector3d abc = V.fullPivLu().solve(rhs);
  out.a = abc(0);
  out.b = abc(1);
  out.c = abc(2);
  const auto reduced = [&](double x) {  // int_0^x s^k G ds / x^(k+1)
    const double x2 = x * x;
    return G0 / (k + 1) +
           x2 * (out.a / (k + 3) + x2 * (out.b / (k + 5) + x2 * out.c / (k + 7)));
  };

  const auto cum = cumulative_simpson(integrand, h);
  out.red.resize(N);
  out.red[0] = G0 / (k + 1);
  for (size_t i = 1; i < N; ++i) {
    const double x = r[i];
    const double w = blend_weight(x, out.r_lo, out.r_hi);
    out.red[i] = w == 0.0 ? cum[i] / std::pow(x, k + 1)
                          : w * reduced(x) +
                                (1.0 - w) * cum[i] / std::pow(x, k + 1);
  }
  return out;
}

}  // namespace detail

namespace detail {

inline void check_coefficient_grid(const std::vector<double>& r) {
  if (r.size() < 16) throw config_error("coefficient grid: need at least 16 nodes");
  if (std::abs(r[0]) > 1e-15) throw config_error("coefficient grid: must start at r = 0");
  const double h = r[1] - r[0];
  if (!(h > 0)) throw config_error("coefficient grid: must be ascending");
  for (size_t i = 1; i < r.size(); ++i)
    if (std::abs(r[i] - r[i - 1] - h) > 1e-9 * (1.0 + r[i]))
      throw config_error("coefficient grid: must be uniform");
}

}  // namespace detail

// u_0 = Theta^(-1/2),
// u_{k+1}(r) = (r^(k+1) sqrt(Theta(r)))^(-1) * int_0^r s^k sqrt(Theta(s)) (-Delta u_k)(s) ds
//
// Each level's Laplacian is propagated through the recursion's own product
// structure u_{k+1} = R * I (R the prefactor, I the prefix integral) instead
// of being re-differenced from u samples.  Differencing would multiply the
// roundoff floor by ~1/h^2 per level, which makes deep levels degrade as the
// grid is refined; the propagated form only ever differentiates the smooth
// integrand once.
inline CoefficientTable hadamard_coefficients(const RadialModel& model, int k_max,
                                              const std::vector<double>& r_grid) {
  if (k_max < 0 || k_max > 8) throw config_error("coefficients: k_max out of range");
  detail::check_coefficient_grid(r_grid);
  const size_t N = r_grid.size();
  const double h = r_grid[1] - r_grid[0];
  const int n = model.n;

  CoefficientTable tab;
  tab.r = r_grid;
  tab.variant = "standard";
  tab.model = model.name;
  tab.n = n;

  std::vector<double> sqrt_theta(N), Lp(N), Lpp(N), lpr(N);
  for (size_t i = 0; i < N; ++i) {
    const double r = r_grid[i];
    sqrt_theta[i] = std::sqrt(model.theta(r));
    Lp[i] = i == 0 ? 0.0 : model.log_theta_prime(r);
    Lpp[i] = detail::ltpp(model, r);
    lpr[i] = detail::ltp_over_r(model, r);
  }

  std::vector<double> uk(N), lapk(N);
  for (size_t i = 0; i < N; ++i) {
    uk[i] = 1.0 / sqrt_theta[i];
    // Delta Theta^(-1/2) in closed form
    lapk[i] = uk[i] * (-0.25 * Lp[i] * Lp[i] - 0.5 * Lpp[i] - 0.5 * (n - 1) * lpr[i]);
  }
  tab.u.push_back(uk);

  for (int k = 0; k < k_max; ++k) {
    std::vector<double> what(N), phi(N);
    for (size_t i = 0; i < N; ++i) {
      what[i] = -lapk[i];
      phi[i] = std::pow(r_grid[i], k) * sqrt_theta[i] * what[i];
    }
    const auto rp = detail::reduced_prefix(r_grid, phi, k, what[0]);

    std::vector<double> next(N);
    for (size_t i = 0; i < N; ++i) next[i] = rp.red[i] / sqrt_theta[i];

    const auto dwhat = detail::fd1_even(what, h);
    std::vector<double> lapn(N);
    for (size_t i = 0; i < N; ++i) {
      const double r = r_grid[i];
      const double w = detail::blend_weight(r, rp.r_lo, rp.r_hi);
      double lap_s = 0.0, lap_d = 0.0;
      if (w > 0.0) {  // from the fitted series: u = Theta^(-1/2) red
        const double x = r * r;
        const double red = rp.G0 / (k + 1) +
                           x * (rp.a / (k + 3) + x * (rp.b / (k + 5) + x * rp.c / (k + 7)));
        const double rpor = 2 * rp.a / (k + 3) +
                            x * (4 * rp.b / (k + 5) + x * 6 * rp.c / (k + 7));
        const double redpp = 2 * rp.a / (k + 3) +
                             x * (12 * rp.b / (k + 5) + x * 30 * rp.c / (k + 7));
        lap_s = (redpp + (n - 1) * rpor -
                 red * (0.25 * Lp[i] * Lp[i] + 0.5 * Lpp[i] + 0.5 * (n - 1) * lpr[i])) /
                sqrt_theta[i];
      }
      if (w < 1.0) {  // direct: u' = gamma u + what / r
        const double alpha = 1.0 / r, alphap = -1.0 / (r * r);
        const double beta = 0.5 * Lp[i], betap = 0.5 * Lpp[i];
        const double rho = (n - 1) / r + Lp[i];
        const double gamma = -(k + 1) * alpha - beta;
        const double gammap = -(k + 1) * alphap - betap;
        lap_d = next[i] * (gammap + gamma * (gamma + rho)) +
                (what[i] / r) * (gamma + rho - alpha) + dwhat[i] / r;
      }
      lapn[i] = w * lap_s + (1.0 - w) * lap_d;
    }

    tab.u.push_back(next);
    uk = std::move(next);
    lapk = std::move(lapn);
  }
  return tab;
}

// Modified variant, with the density measured against the constant-curvature
// one: writing q(s) = sqrt(vartheta(s) / sinh(s)^(n-1)) (q(0) = 1),
//   utilde_0      = 1 / q,
//   utilde_{k+1}(r) = (sinh(r)^(k+1) q(r))^(-1) *
//                     int_0^r sinh(s)^k q(s) (-Delta + k^2 - n + 1) utilde_k(s) ds.
// Laplacians are propagated exactly as in hadamard_coefficients, with
// sinh in place of r and q in place of sqrt(Theta).
inline CoefficientTable modified_coefficients(const RadialModel& model, int k_max,
                                              const std::vector<double>& r_grid) {
  if (k_max < 0 || k_max > 8) throw config_error("coefficients: k_max out of range");
  detail::check_coefficient_grid(r_grid);
  const size_t N = r_grid.size();
  const double h = r_grid[1] - r_grid[0];
  const int n = model.n;
  const double p = 0.5 * (n - 1);

  CoefficientTable tab;
  tab.r = r_grid;
  tab.variant = "modified";
  tab.model = model.name;
  tab.n = n;

  // q and the log-derivatives of q: Lq' = L'/2 - p (coth r - 1/r)
  std::vector<double> q(N), Lp(N), Lqp(N), Lqpp(N), lqpr(N), cmir_r(N);
  for (size_t i = 0; i < N; ++i) {
    const double r = r_grid[i];
    q[i] = i == 0 ? 1.0 : std::sqrt(model.theta(r)) * std::pow(r / std::sinh(r), p);
    Lp[i] = i == 0 ? 0.0 : model.log_theta_prime(r);
    const double cm = detail::coth_minus_inv_r(r);
    Lqp[i] = 0.5 * Lp[i] - p * cm;
    Lqpp[i] = 0.5 * detail::ltpp(model, r) - p * detail::inv_r2_minus_csch2(r);
    lqpr[i] = i == 0 ? 0.5 * detail::ltpp(model, 0.0) - p / 3.0 : Lqp[i] / r;
    cmir_r[i] = i == 0 ? 1.0 / 3.0 : cm / r;
  }

  std::vector<double> uk(N), lapk(N);
  for (size_t i = 0; i < N; ++i) {
    uk[i] = 1.0 / q[i];
    lapk[i] = uk[i] * (Lqp[i] * Lqp[i] - Lqpp[i] - (n - 1) * lqpr[i] - Lp[i] * Lqp[i]);
  }
  tab.u.push_back(uk);

  for (int k = 0; k < k_max; ++k) {
    const double shift = double(k) * k - n + 1;
    std::vector<double> what(N), phi(N);
    for (size_t i = 0; i < N; ++i) {
      what[i] = -lapk[i] + shift * uk[i];
      phi[i] = std::pow(std::sinh(r_grid[i]), k) * q[i] * what[i];
    }
    const auto rp = detail::reduced_prefix(r_grid, phi, k, what[0]);

    std::vector<double> next(N);
    next[0] = rp.red[0];
    for (size_t i = 1; i < N; ++i)
      next[i] = rp.red[i] * std::pow(r_grid[i] / std::sinh(r_grid[i]), k + 1) / q[i];

    const auto dwhat = detail::fd1_even(what, h);
    std::vector<double> lapn(N);
    for (size_t i = 0; i < N; ++i) {
      const double r = r_grid[i];
      const double w = detail::blend_weight(r, rp.r_lo, rp.r_hi);
      double lap_s = 0.0, lap_d = 0.0;
      if (w > 0.0) {
        // series path: u = S red with S = (r/sinh r)^(k+1) / q, and
        // sigma = S'/S = -(k+1)(coth r - 1/r) - Lq'
        const double x = r * r;
        const double red = rp.G0 / (k + 1) +
                           x * (rp.a / (k + 3) + x * (rp.b / (k + 5) + x * rp.c / (k + 7)));
        const double rpor = 2 * rp.a / (k + 3) +
                            x * (4 * rp.b / (k + 5) + x * 6 * rp.c / (k + 7));
        const double redpp = 2 * rp.a / (k + 3) +
                             x * (12 * rp.b / (k + 5) + x * 30 * rp.c / (k + 7));
        const double sig = -(k + 1) * detail::coth_minus_inv_r(r) - Lqp[i];
        const double sigp = -(k + 1) * detail::inv_r2_minus_csch2(r) - Lqpp[i];
        const double sig_r = -(k + 1) * cmir_r[i] - lqpr[i];  // sigma / r
        const double rho_sig = (n - 1) * sig_r + Lp[i] * sig;
        const double S =
            i == 0 ? 1.0 : std::pow(r / std::sinh(r), k + 1) / q[i];
        lap_s = S * (redpp + 2 * sig * r * rpor + (n - 1) * rpor + Lp[i] * r * rpor +
                     red * (sig * sig + sigp + rho_sig));
      }
      if (w < 1.0) {
        const double alpha = 1.0 / std::tanh(r);
        const double alphap = 1.0 - alpha * alpha;  // -csch^2
        const double rho = (n - 1) / r + Lp[i];
        const double gamma = -(k + 1) * alpha - Lqp[i];
        const double gammap = -(k + 1) * alphap - Lqpp[i];
        const double mi = 1.0 / std::sinh(r);
        lap_d = next[i] * (gammap + gamma * (gamma + rho)) +
                what[i] * mi * (gamma + rho - alpha) + dwhat[i] * mi;
      }
      lapn[i] = w * lap_s + (1.0 - w) * lap_d;
    }

    tab.u.push_back(next);
    uk = std::move(next);
    lapk = std::move(lapn);
  }
  return tab;
}

struct GrowthFit {
  double C = 0.0;
  double alpha = 0.0;
  double max_log_excess = 0.0;  // sup over the grid of log|u_k| - (log C + alpha r)
  bool all_zero = false;
};

// Exponential envelopes |u_k(r)| <= C e^(alpha r), fitted by least squares on
// the tail half of the grid.
inline std::vector<GrowthFit> growth_fit(const CoefficientTable& tab) {
  std::vector<GrowthFit> out;
  for (const auto& row : tab.u) {
    GrowthFit g;
    double maxabs = 0.0;
    for (double v : row) maxabs = std::max(maxabs, std::abs(v));
    if (maxabs == 0.0) {
      g.all_zero = true;
      out.push_back(g);
      continue;
    }
    const double floor_v = 1e-14 * maxabs;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long cnt = 0;
    const size_t start = tab.r.size() / 2;
    for (size_t i = start; i < tab.r.size(); ++i) {
      if (std::abs(row[i]) < floor_v) continue;
      const double x = tab.r[i], y = std::log(std::abs(row[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    if (cnt < 2) {  // concentrated near the origin; flat envelope at the max
      g.C = maxabs;
      g.alpha = 0.0;
    } else {
      const double det = cnt * sxx - sx * sx;
      g.alpha = (cnt * sxy - sx * sy) / det;
      g.C = std::exp((sy - g.alpha * sx) / cnt);
    }
    for (size_t i = 0; i < tab.r.size(); ++i) {
      if (std::abs(row[i]) < floor_v) continue;
      g.max_log_excess = std::max(
          g.max_log_excess, std::log(std::abs(row[i])) - std::log(g.C) - g.alpha * tab.r[i]);
    }
    out.push_back(g);
  }
  return out;
}

inline std::vector<double> uniform_grid(double r_max, size_t count) {
  if (count < 2 || !(r_max > 0)) throw config_error("uniform grid: bad parameters");
  std::vector<double> r(count);
  for (size_t i = 0; i < count; ++i) r[i] = r_max * double(i) / double(count - 1);
  return r;
}

}  // namespace geolab
