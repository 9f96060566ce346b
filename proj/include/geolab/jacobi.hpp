#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "geolab/curvature.hpp"
#include "geolab/errors.hpp"
#include "geolab/linalg.hpp"

namespace geolab {

enum class SeedKind { zero_seeded, one_zero, zero_one, custom };

// Initial data for X'' + K(t) X = 0 posed at time t0.
struct JacobiSeed {
  double t0 = 0.0;
  MatrixXd X0, Xp0;
  SeedKind kind = SeedKind::custom;
};

// Fixed-step RK4 solution samples with cubic Hermite dense output.
// The grid is stored ascending even when integration ran backward.
struct JacobiTrajectory {
  CurvatureProfile profile;
  SeedKind seed = SeedKind::custom;
  std::string method = "rk4";
  double step = 0.0;  // requested step size
  std::vector<double> grid;
  std::vector<MatrixXd> X, Xp;

  int block() const { return profile.block(); }
  double t_front() const { return grid.front(); }
  double t_back() const { return grid.back(); }

  struct State {
    double t;
    MatrixXd X, Xp;
  };

  State eval(double t) const {
    const size_t i = locate(t);
    const double h = grid[i + 1] - grid[i];
    const double s = (t - grid[i]) / h;
    if (s < 1e-14) return {t, X[i], Xp[i]};
    if (s > 1.0 - 1e-14) return {t, X[i + 1], Xp[i + 1]};
    const double h00 = (2 * s - 3) * s * s + 1, h10 = ((s - 2) * s + 1) * s;
    const double h01 = (3 - 2 * s) * s * s, h11 = (s - 1) * s * s;
    State out{t, MatrixXd(), MatrixXd()};
    out.X = h00 * X[i] + (h10 * h) * Xp[i] + h01 * X[i + 1] + (h11 * h) * Xp[i + 1];
    // Hermite data for X' uses X'' = -K X at the bracketing nodes.
    const MatrixXd xpp_l = -profile.evaluate(grid[i]) * X[i];
    const MatrixXd xpp_r = -profile.evaluate(grid[i + 1]) * X[i + 1];
    out.Xp = h00 * Xp[i] + (h10 * h) * xpp_l + h01 * Xp[i + 1] + (h11 * h) * xpp_r;
    return out;
  }

  // X alone needs no curvature evaluations: the stored (X, X') pairs are the
  // Hermite data.  Quadratures over A^{-1} A^{-T} lean on this path.
  MatrixXd evalX(double t) const {
    const size_t i = locate(t);
    const double h = grid[i + 1] - grid[i];
    const double s = (t - grid[i]) / h;
    if (s < 1e-14) return X[i];
    if (s > 1.0 - 1e-14) return X[i + 1];
    const double h00 = (2 * s - 3) * s * s + 1, h10 = ((s - 2) * s + 1) * s;
    const double h01 = (3 - 2 * s) * s * s, h11 = (s - 1) * s * s;
    return h00 * X[i] + (h10 * h) * Xp[i] + h01 * X[i + 1] + (h11 * h) * Xp[i + 1];
  }

  double det_at(double t) const { return evalX(t).determinant(); }

 private:
  size_t locate(double t) const {
    if (t < grid.front() - 1e-12 || t > grid.back() + 1e-12)
      throw config_error("dense query t = " + std::to_string(t) + " outside [" +
                         std::to_string(grid.front()) + ", " + std::to_string(grid.back()) + "]");
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    size_t i = (it == grid.begin()) ? 0 : static_cast<size_t>(it - grid.begin()) - 1;
    return std::min(i, grid.size() - 2);
  }
};

// Integrates several seeds sharing the same start time in one sweep so the
// K(t) evaluations are shared between them.
inline std::vector<JacobiTrajectory> integrate_multi(const CurvatureProfile& profile,
                                                     const std::vector<JacobiSeed>& seeds,
                                                     double t_end, double step) {
  if (seeds.empty()) throw config_error("integrate: no seeds");
  if (!(step > 0.0)) throw config_error("integrate: step must be positive");
  const double t0 = seeds.front().t0;
  for (const auto& s : seeds)
    if (s.t0 != t0) throw config_error("integrate: seeds must share a start time");
  if (std::max(std::abs(t0), std::abs(t_end)) > profile.horizon + 1e-12)
    throw config_error("integrate: range exceeds profile horizon");
  const int m = profile.block();
  for (const auto& s : seeds)
    if (s.X0.rows() != m || s.X0.cols() != m || s.Xp0.rows() != m || s.Xp0.cols() != m)
      throw config_error("integrate: seed block size mismatch");

  const double span = t_end - t0;
  const long nsteps = std::max(1L, std::lround(std::abs(span) / step));
  const double h = span / static_cast<double>(nsteps);

  const size_t ns = seeds.size();
  std::vector<MatrixXd> x(ns), p(ns);
  for (size_t q = 0; q < ns; ++q) {
    x[q] = seeds[q].X0;
    p[q] = seeds[q].Xp0;
  }
  std::vector<double> grid(nsteps + 1);
  std::vector<std::vector<MatrixXd>> xs(ns), ps(ns);
  for (size_t q = 0; q < ns; ++q) {
    xs[q].reserve(nsteps + 1);
    ps[q].reserve(nsteps + 1);
    xs[q].push_back(x[q]);
    ps[q].push_back(p[q]);
  }
  grid[0] = t0;

  MatrixXd k_lo = profile.evaluate(t0);
  MatrixXd k1x, k1p, k2x, k2p, k3x, k3p, k4x, k4p;
  for (long i = 0; i < nsteps; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const MatrixXd k_mid = profile.evaluate(t + 0.5 * h);
    const MatrixXd k_hi = profile.evaluate(t + h);
    for (size_t q = 0; q < ns; ++q) {
      k1x = p[q];
      k1p = -(k_lo * x[q]);
      k2x = p[q] + (0.5 * h) * k1p;
      k2p = -(k_mid * (x[q] + (0.5 * h) * k1x));
      k3x = p[q] + (0.5 * h) * k2p;
      k3p = -(k_mid * (x[q] + (0.5 * h) * k2x));
      k4x = p[q] + h * k3p;
      k4p = -(k_hi * (x[q] + h * k3x));
      x[q] += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      p[q] += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
      if (!x[q].allFinite() || !p[q].allFinite()) throw integration_error(t);
      xs[q].push_back(x[q]);
      ps[q].push_back(p[q]);
    }
    grid[i + 1] = t0 + h * static_cast<double>(i + 1);
    k_lo = k_hi;
  }
  grid[nsteps] = t_end;

  std::vector<JacobiTrajectory> out;
  out.reserve(ns);
  for (size_t q = 0; q < ns; ++q) {
    JacobiTrajectory tr{profile, seeds[q].kind};
    tr.step = step;
    if (h >= 0) {
      tr.grid = grid;
      tr.X = std::move(xs[q]);
      tr.Xp = std::move(ps[q]);
    } else {
      tr.grid.assign(grid.rbegin(), grid.rend());
      tr.X.assign(std::make_move_iterator(xs[q].rbegin()), std::make_move_iterator(xs[q].rend()));
      tr.Xp.assign(std::make_move_iterator(ps[q].rbegin()), std::make_move_iterator(ps[q].rend()));
    }
    out.push_back(std::move(tr));
  }
  return out;
}

inline JacobiTrajectory integrate(const CurvatureProfile& profile, const JacobiSeed& seed,
                                  double t_end, double step) {
  return integrate_multi(profile, {seed}, t_end, step)[0];
}

// Zero-seeded field X(0)=0, X'(0)=Id.  The start is shifted off the origin by
// one step with the Taylor polynomial
//   X(s) = s*Id - s^3/6 * K(0),  X'(s) = Id - s^2/2 * K(0),
// valid on both rays (t_end may be negative).
inline JacobiTrajectory field_A(const CurvatureProfile& profile, double t_end, double step) {
  if (!(std::abs(t_end) > 2.0 * step))
    throw config_error("field_A: |t_end| must exceed two steps");
  const int m = profile.block();
  const double s0 = (t_end > 0 ? 1.0 : -1.0) * step;
  const MatrixXd k0 = profile.evaluate(0.0);
  JacobiSeed seed;
  seed.t0 = s0;
  seed.kind = SeedKind::zero_seeded;
  seed.X0 = s0 * MatrixXd::Identity(m, m) - (s0 * s0 * s0 / 6.0) * k0;
  seed.Xp0 = MatrixXd::Identity(m, m) - (s0 * s0 / 2.0) * k0;
  return integrate(profile, seed, t_end, step);
}

inline JacobiSeed seed_one_zero(int m) {
  return {0.0, MatrixXd::Identity(m, m), MatrixXd::Zero(m, m), SeedKind::one_zero};
}
inline JacobiSeed seed_zero_one(int m) {
  return {0.0, MatrixXd::Zero(m, m), MatrixXd::Identity(m, m), SeedKind::zero_one};
}

inline JacobiTrajectory field_J1(const CurvatureProfile& profile, double t_end, double step) {
  return integrate(profile, seed_one_zero(profile.block()), t_end, step);
}
inline JacobiTrajectory field_J2(const CurvatureProfile& profile, double t_end, double step) {
  return integrate(profile, seed_zero_one(profile.block()), t_end, step);
}

// Both canonical origin seeds in one integration sweep: (J1, J2).
inline std::pair<JacobiTrajectory, JacobiTrajectory> field_pair(const CurvatureProfile& profile,
                                                                double t_end, double step) {
  const int m = profile.block();
  auto v = integrate_multi(profile, {seed_one_zero(m), seed_zero_one(m)}, t_end, step);
  return {std::move(v[0]), std::move(v[1])};
}

// W(B,C) = B^T C' - B'^T C; constant in t for solutions over one profile.
inline MatrixXd wronskian(const JacobiTrajectory& b, const JacobiTrajectory& c, double t) {
  if (b.profile.spec_string != c.profile.spec_string)
    throw config_error("wronskian: trajectories from different profiles");
  const auto sb = b.eval(t), sc = c.eval(t);
  return MatrixXd(sb.X.transpose() * sc.Xp - sb.Xp.transpose() * sc.X);
}

struct WronskianDrift {
  double sup_drift = 0.0;        // sup_t ||W(t) - W(t_front)||
  double normalized = 0.0;       // sup_drift / (1 + sup||X|| * sup||X'||)
};

inline WronskianDrift wronskian_drift(const JacobiTrajectory& b, const JacobiTrajectory& c) {
  if (b.profile.spec_string != c.profile.spec_string)
    throw config_error("wronskian drift: trajectories from different profiles");
  const bool shared = b.grid.size() == c.grid.size() && b.grid.front() == c.grid.front() &&
                      b.grid.back() == c.grid.back();
  if (!shared) throw config_error("wronskian drift: trajectories must share a grid");
  MatrixXd w0;
  double sup = 0.0, sx = 0.0, sp = 0.0;
  for (size_t i = 0; i < b.grid.size(); ++i) {
    const MatrixXd w = b.X[i].transpose() * c.Xp[i] - b.Xp[i].transpose() * c.X[i];
    if (i == 0)
      w0 = w;
    else
      sup = std::max(sup, op_norm(MatrixXd(w - w0)));
    sx = std::max({sx, op_norm(b.X[i]), op_norm(c.X[i])});
    sp = std::max({sp, op_norm(b.Xp[i]), op_norm(c.Xp[i])});
  }
  return {sup, sup / (1.0 + sx * sp)};
}

// Earliest time (by |t|, away from the seed origin) where det X changes sign
// or the smallest singular value collapses below 1e-10 * |t|^(n-1).
// Sign changes are refined by bisection on the dense determinant.
inline std::optional<double> first_conjugate_time(const JacobiTrajectory& a) {
  const int m = a.block();
  const bool backward_ray = a.t_back() <= 0.0;
  const long n = static_cast<long>(a.grid.size());
  auto idx = [&](long q) { return backward_ray ? n - 1 - q : q; };

  double prev_det = 0.0;
  bool have_prev = false;
  double prev_t = 0.0;
  for (long q = 0; q < n; ++q) {
    const long i = idx(q);
    const double t = a.grid[i];
    if (std::abs(t) < 1e-300) continue;
    const double d = a.X[i].determinant();
    const double sv = smallest_singular_value(a.X[i]);
    if (sv < 1e-10 * std::pow(std::abs(t), m)) return t;
    if (have_prev && std::signbit(d) != std::signbit(prev_det)) {
      double lo = prev_t, hi = t;
      double flo = prev_det;
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-13 * std::max(1.0, std::abs(hi));
           ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = a.det_at(mid);
        if (std::signbit(fm) == std::signbit(flo)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    prev_det = d;
    prev_t = t;
    have_prev = true;
  }
  return std::nullopt;
}

}  // namespace geolab
