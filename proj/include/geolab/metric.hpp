#pragma once
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "geolab/curvature.hpp"

namespace geolab {

// Riemannian metric in a single coordinate chart.  `g` is required; `dg`
// (list of coordinate partials) and `d2g` (matrix of second partials) fall
// back to centered differences when absent.
struct CoordinateMetric {
  int n = 0;
  std::string name = "custom";
  std::function<MatrixXd(const VectorXd&)> g;
  std::function<std::vector<MatrixXd>(const VectorXd&)> dg;
  std::function<std::vector<std::vector<MatrixXd>>(const VectorXd&)> d2g;
  double cond_cap = 1e12;

  MatrixXd metric_at(const VectorXd& x) const {
    if (x.size() != n) throw config_error("metric: point has wrong dimension");
    MatrixXd m = g(x);
    if (m.rows() != n || m.cols() != n) throw config_error("metric: tensor has wrong shape");
    m = sym_part(m);
    if (!m.allFinite()) throw integration_error(0.0, "metric tensor not finite");
    if (min_eigenvalue_sym(m) <= 0.0 || cond_number(m) > cond_cap)
      throw integration_error(0.0, "metric tensor degenerate at the queried point");
    return m;
  }

  double fd_step(const VectorXd& x) const { return 1e-5 * (1.0 + x.norm()); }

  std::vector<MatrixXd> dg_at(const VectorXd& x) const {
    if (dg) return dg(x);
    const double h = fd_step(x);
    std::vector<MatrixXd> out(n);
    VectorXd xp = x, xm = x;
    for (int k = 0; k < n; ++k) {
      xp(k) += h;
      xm(k) -= h;
      out[k] = (g(xp) - g(xm)) / (2.0 * h);
      xp(k) = x(k);
      xm(k) = x(k);
    }
    return out;
  }

  std::vector<std::vector<MatrixXd>> d2g_at(const VectorXd& x) const {
    if (d2g) return d2g(x);
    std::vector<std::vector<MatrixXd>> out(n, std::vector<MatrixXd>(n));
    if (dg) {  // differentiate the supplied first derivatives
      const double h = fd_step(x);
      VectorXd xp = x, xm = x;
      for (int a = 0; a < n; ++a) {
        xp(a) += h;
        xm(a) -= h;
        const auto dp = dg(xp), dm = dg(xm);
        for (int k = 0; k < n; ++k) out[a][k] = (dp[k] - dm[k]) / (2.0 * h);
        xp(a) = x(a);
        xm(a) = x(a);
      }
      return out;
    }
    // second differences of g itself; wider step keeps the roundoff floor low
    const double h = 1e-4 * (1.0 + x.norm());
    const MatrixXd g0 = g(x);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        VectorXd q = x;
        MatrixXd v;
        if (a == b) {
          q(a) = x(a) + h;
          const MatrixXd gp = g(q);
          q(a) = x(a) - h;
          const MatrixXd gm = g(q);
          v = (gp - 2.0 * g0 + gm) / (h * h);
        } else {
          q(a) = x(a) + h;
          q(b) = x(b) + h;
          const MatrixXd gpp = g(q);
          q(b) = x(b) - h;
          const MatrixXd gpm = g(q);
          q(a) = x(a) - h;
          const MatrixXd gmm = g(q);
          q(b) = x(b) + h;
          const MatrixXd gmp = g(q);
          v = (gpp - gpm - gmp + gmm) / (4.0 * h * h);
        }
        out[a][b] = v;
        out[b][a] = v;
      }
    }
    return out;
  }

  // Gamma[rho](mu, nu)
  std::vector<MatrixXd> christoffel(const VectorXd& x) const {
    const MatrixXd ginv = metric_at(x).partialPivLu().inverse();
    const auto d = dg_at(x);
    std::vector<MatrixXd> gamma(n, MatrixXd::Zero(n, n));
    for (int r = 0; r < n; ++r)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          double s = 0.0;
          for (int l = 0; l < n; ++l)
            s += ginv(r, l) * (d[mu](l, nu) + d[nu](l, mu) - d[l](mu, nu));
          gamma[r](mu, nu) = 0.5 * s;
        }
    return gamma;
  }
};

namespace detail {

// dGamma[alpha][rho](mu, nu) assembled from dg and d2g; avoids differencing
// christoffel() so that finite-difference noise enters only once.
inline std::vector<std::vector<MatrixXd>> dchristoffel(const CoordinateMetric& m,
                                                       const VectorXd& x) {
  const int n = m.n;
  const MatrixXd ginv = m.metric_at(x).partialPivLu().inverse();
  const auto d = m.dg_at(x);
  const auto d2 = m.d2g_at(x);
  std::vector<MatrixXd> dginv(n);
  for (int a = 0; a < n; ++a) dginv[a] = -ginv * d[a] * ginv;

  std::vector<std::vector<MatrixXd>> out(n, std::vector<MatrixXd>(n, MatrixXd::Zero(n, n)));
  for (int a = 0; a < n; ++a)
    for (int r = 0; r < n; ++r)
      for (int mu = 0; mu < n; ++mu)
        for (int nu = 0; nu < n; ++nu) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += dginv[a](r, l) * (d[mu](l, nu) + d[nu](l, mu) - d[l](mu, nu));
            s += ginv(r, l) * (d2[a][mu](l, nu) + d2[a][nu](l, mu) - d2[a][l](mu, nu));
          }
          out[a][r](mu, nu) = 0.5 * s;
        }
  return out;
}

}  // namespace detail

// K_ij = < R(E_i, v) v, E_j >  with  R(X,Y)Z = R^r_{s mu nu} X^mu Y^nu Z^s d_r,
// the curvature operator the transverse Jacobi blocks solve against.
inline MatrixXd jacobi_operator(const CoordinateMetric& m, const VectorXd& x,
                                const VectorXd& v, const MatrixXd& E,
                                double* asymmetry = nullptr) {
  const int n = m.n;
  const int cols = static_cast<int>(E.cols());
  const MatrixXd gmat = m.metric_at(x);
  const auto gamma = m.christoffel(x);
  const auto dgamma = detail::dchristoffel(m, x);

  // B[r](s, mu) = sum_nu R^r_{s mu nu} v^nu
  std::vector<MatrixXd> B(n, MatrixXd::Zero(n, n));
  for (int r = 0; r < n; ++r)
    for (int s = 0; s < n; ++s)
      for (int mu = 0; mu < n; ++mu) {
        double acc = 0.0;
        for (int nu = 0; nu < n; ++nu) {
          double rtens = dgamma[mu][r](nu, s) - dgamma[nu][r](mu, s);
          for (int l = 0; l < n; ++l)
            rtens += gamma[r](mu, l) * gamma[l](nu, s) - gamma[r](nu, l) * gamma[l](mu, s);
          acc += rtens * v(nu);
        }
        B[r](s, mu) = acc;
      }

  MatrixXd W(n, cols);  // W^r_i = R(E_i, v) v
  for (int i = 0; i < cols; ++i)
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int s = 0; s < n; ++s)
        for (int mu = 0; mu < n; ++mu) acc += B[r](s, mu) * E(mu, i) * v(s);
      W(r, i) = acc;
    }
  const MatrixXd K = E.transpose() * gmat * W;
  if (asymmetry) *asymmetry = asym_norm(K);
  return sym_part(K);
}

struct GeodesicSpec {
  VectorXd x0;
  VectorXd u0;  // must be unit for the metric at x0
};

inline VectorXd unit_tangent(const CoordinateMetric& m, const VectorXd& x,
                             const VectorXd& direction) {
  const double q = direction.dot(m.metric_at(x) * direction);
  if (!(q > 0)) throw config_error("unit_tangent: direction degenerate");
  return direction / std::sqrt(q);
}

struct MetricProfileData {
  CurvatureProfile profile;
  double frame_drift = 0.0;        // sup || W^T g W - Id ||
  double curvature_asymmetry = 0.0;
  double sample_step = 0.0;
};

// Integrates the geodesic with a parallel orthonormal frame along both rays
// and samples the transverse curvature blocks on a uniform grid.  The frame
// matrix W carries the velocity in column 0; parallel transport keeps
// W^T g W = Id up to integrator drift, which is checked.
inline MetricProfileData profile_from_metric(const CoordinateMetric& metric,
                                             const GeodesicSpec& geo, double horizon,
                                             double sample_step = 1e-2,
                                             double drift_tol = 1e-6) {
  const int n = metric.n;
  if (n < 2) throw config_error("metric profile: dimension must be at least 2");
  if (!(horizon > 0) || !(sample_step > 0))
    throw config_error("metric profile: horizon and sample step must be positive");
  if (geo.x0.size() != n || geo.u0.size() != n)
    throw config_error("metric profile: geodesic data has wrong dimension");
  const MatrixXd g0 = metric.metric_at(geo.x0);
  const double speed = geo.u0.dot(g0 * geo.u0);
  if (std::abs(speed - 1.0) > 1e-10)
    throw config_error("metric profile: initial velocity must be unit speed");

  // initial frame: velocity first, then coordinate directions orthonormalized
  MatrixXd W(n, n);
  W.col(0) = geo.u0;
  int filled = 1;
  for (int k = 0; k < n && filled < n; ++k) {
    VectorXd c = VectorXd::Zero(n);
    c(k) = 1.0;
    for (int j = 0; j < filled; ++j) c -= (W.col(j).dot(g0 * c)) * W.col(j);
    const double q = c.dot(g0 * c);
    if (q > 1e-12) W.col(filled++) = c / std::sqrt(q);
  }
  if (filled != n) throw config_error("metric profile: could not build a frame");

  const int steps = std::max(1, static_cast<int>(std::lround(horizon / sample_step)));
  const double h = horizon / steps;
  const int sub = 4;  // integrator substeps per sample interval
  const double hs = h / sub;

  struct Node {
    VectorXd x;
    MatrixXd W;
  };
  const auto rhs = [&](const VectorXd& x, const MatrixXd& w, VectorXd& dx, MatrixXd& dw) {
    const auto gamma = metric.christoffel(x);
    const VectorXd v = w.col(0);
    dx = v;
    dw.resize(n, n);
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) dw(r, j) = -v.dot(gamma[r] * w.col(j));
  };
  const auto rk4 = [&](Node nd, double dt) {
    VectorXd k1x, k2x, k3x, k4x;
    MatrixXd k1w, k2w, k3w, k4w;
    rhs(nd.x, nd.W, k1x, k1w);
    rhs(nd.x + 0.5 * dt * k1x, nd.W + 0.5 * dt * k1w, k2x, k2w);
    rhs(nd.x + 0.5 * dt * k2x, nd.W + 0.5 * dt * k2w, k3x, k3w);
    rhs(nd.x + dt * k3x, nd.W + dt * k3w, k4x, k4w);
    nd.x += (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    nd.W += (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
    if (!nd.x.allFinite() || !nd.W.allFinite())
      throw integration_error(0.0, "geodesic integration diverged");
    return nd;
  };

  double frame_drift = 0.0, curvature_asymmetry = 0.0;
  std::vector<double> grid(2 * steps + 1);
  std::vector<MatrixXd> blocks(2 * steps + 1);
  const MatrixXd id = MatrixXd::Identity(n, n);
  for (int ray = 0; ray < 2; ++ray) {
    const double dir = ray == 0 ? 1.0 : -1.0;
    Node nd{geo.x0, W};
    for (int i = 0; i <= steps; ++i) {
      const double t = dir * i * h;
      if (i > 0)
        for (int s = 0; s < sub; ++s) nd = rk4(nd, dir * hs);
      const MatrixXd gm = metric.metric_at(nd.x);
      frame_drift =
          std::max(frame_drift, op_norm(MatrixXd(nd.W.transpose() * gm * nd.W - id)));
      double asym = 0.0;
      const MatrixXd K =
          jacobi_operator(metric, nd.x, nd.W.col(0), nd.W.rightCols(n - 1), &asym);
      curvature_asymmetry = std::max(curvature_asymmetry, asym);
      const int gi = ray == 0 ? steps + i : steps - i;
      grid[gi] = t;
      blocks[gi] = K;
    }
  }
  if (frame_drift > drift_tol)
    throw integration_error(horizon, "parallel frame drift exceeds tolerance");

  std::string spec = "metric:" + metric.name + ",horizon=" + fmt_g17(horizon);
  return MetricProfileData{
      profile_from_samples(Dimension(n), std::move(grid), std::move(blocks), std::move(spec)),
      frame_drift, curvature_asymmetry, h};
}

inline CoordinateMetric metric_euclidean(int n) {
  CoordinateMetric m;
  m.n = n;
  m.name = "euclidean" + std::to_string(n);
  m.g = [n](const VectorXd&) { return MatrixXd(MatrixXd::Identity(n, n)); };
  m.dg = [n](const VectorXd&) { return std::vector<MatrixXd>(n, MatrixXd::Zero(n, n)); };
  m.d2g = [n](const VectorXd&) {
    return std::vector<std::vector<MatrixXd>>(n,
                                              std::vector<MatrixXd>(n, MatrixXd::Zero(n, n)));
  };
  return m;
}

// Ball model of constant curvature -1: g = lambda^2 Id, lambda = 2/(1-|x|^2).
inline CoordinateMetric metric_poincare_ball(int n) {
  CoordinateMetric m;
  m.n = n;
  m.name = "poincare-ball" + std::to_string(n);
  const auto lam = [](const VectorXd& x) {
    const double r2 = x.squaredNorm();
    if (r2 >= 1.0) throw config_error("poincare ball: point outside the unit ball");
    return 2.0 / (1.0 - r2);
  };
  m.g = [n, lam](const VectorXd& x) {
    return MatrixXd(lam(x) * lam(x) * MatrixXd::Identity(n, n));
  };
  m.dg = [n, lam](const VectorXd& x) {
    const double l = lam(x);
    std::vector<MatrixXd> d(n);
    for (int k = 0; k < n; ++k) d[k] = 2.0 * l * l * l * x(k) * MatrixXd::Identity(n, n);
    return d;
  };
  m.d2g = [n, lam](const VectorXd& x) {
    const double l = lam(x);
    std::vector<std::vector<MatrixXd>> d(n, std::vector<MatrixXd>(n));
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < n; ++k) {
        const double c = 6.0 * l * l * l * l * x(a) * x(k) +
                         2.0 * l * l * l * (a == k ? 1.0 : 0.0);
        d[a][k] = c * MatrixXd::Identity(n, n);
      }
    return d;
  };
  return m;
}

// R^nf x H^nh, block diagonal in the coordinates (flat part first).
inline CoordinateMetric metric_product_flat_hyperbolic(int n_flat, int n_hyp) {
  if (n_flat < 1 || n_hyp < 2)
    throw config_error("product metric: needs n_flat >= 1 and n_hyp >= 2");
  const int n = n_flat + n_hyp;
  CoordinateMetric m;
  m.n = n;
  m.name = "flat" + std::to_string(n_flat) + "xhyp" + std::to_string(n_hyp);
  const CoordinateMetric ball = metric_poincare_ball(n_hyp);
  m.g = [n, n_flat, n_hyp, ball](const VectorXd& x) {
    MatrixXd g = MatrixXd::Identity(n, n);
    g.bottomRightCorner(n_hyp, n_hyp) = ball.g(x.tail(n_hyp));
    return g;
  };
  m.dg = [n, n_flat, n_hyp, ball](const VectorXd& x) {
    std::vector<MatrixXd> d(n, MatrixXd::Zero(n, n));
    const auto db = ball.dg(x.tail(n_hyp));
    for (int k = 0; k < n_hyp; ++k)
      d[n_flat + k].bottomRightCorner(n_hyp, n_hyp) = db[k];
    return d;
  };
  m.d2g = [n, n_flat, n_hyp, ball](const VectorXd& x) {
    std::vector<std::vector<MatrixXd>> d(n, std::vector<MatrixXd>(n, MatrixXd::Zero(n, n)));
    const auto db = ball.d2g(x.tail(n_hyp));
    for (int a = 0; a < n_hyp; ++a)
      for (int k = 0; k < n_hyp; ++k)
        d[n_flat + a][n_flat + k].bottomRightCorner(n_hyp, n_hyp) = db[a][k];
    return d;
  };
  return m;
}

}  // namespace geolab
