#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/expr.hpp"
#include "geolab/linalg.hpp"

namespace geolab {

struct Dimension {
  int n;
  explicit Dimension(int n_) : n(n_) {
    if (n_ < 2) throw config_error("dimension must be >= 2, got " + std::to_string(n_));
  }
  int transverse() const { return n - 1; }
};

enum class ProfileKind { constant, seeded, metric };

// Symmetric curvature block t -> K(t) along a unit-speed geodesic, together
// with the scan bounds used by the comparison estimates:
//   k_max   >= sup ||K(t)||,   K(t) >= -k_lower^2 * Id  on the scan grid.
struct CurvatureProfile {
  Dimension dim;
  ProfileKind kind = ProfileKind::constant;
  double k_max = 0.0;
  double k_lower = 0.0;
  double horizon = 0.0;
  std::string spec_string;
  // Defined for |t| <= horizon.  Constant and seeded kinds are extended
  // evenly to t < 0; metric kinds carry both rays of the geodesic.
  std::function<MatrixXd(double)> evaluate;
  // Fast path for bound scans: (min eigenvalue, max |eigenvalue|) of K(t).
  std::function<std::pair<double, double>(double)> eval_min_absmax;
  // Seeded profiles only: exact diagonal of the zero-seeded solution and its
  // derivative, w_i(t) = t*exp(phi_i(t)).
  std::function<VectorXd(double)> oracle_w;
  std::function<VectorXd(double)> oracle_wp;

  int block() const { return dim.transverse(); }
  bool has_oracle() const { return static_cast<bool>(oracle_w); }
  bool even_extension() const { return kind != ProfileKind::metric; }
};

struct BoundsEstimate {
  double k_lower = 0.0;
  double k_max = 0.0;
  double grid_step = 0.0;
  long samples = 0;
};

inline BoundsEstimate estimate_bounds(const CurvatureProfile& p, double grid_step) {
  if (!(grid_step > 0.0)) throw config_error("estimate_bounds: grid step must be positive");
  BoundsEstimate r;
  r.grid_step = grid_step;
  const double lo = p.even_extension() ? 0.0 : -p.horizon;
  double min_eig = 0.0, max_abs = 0.0;
  for (double t = lo; t <= p.horizon + 0.5 * grid_step; t += grid_step) {
    const double tc = std::min(t, p.horizon);
    double mn, mx;
    if (p.eval_min_absmax) {
      auto [a, b] = p.eval_min_absmax(tc);
      mn = a;
      mx = b;
    } else {
      const MatrixXd k = p.evaluate(tc);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym_part(k), Eigen::EigenvaluesOnly);
      mn = es.eigenvalues().minCoeff();
      mx = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    min_eig = std::min(min_eig, mn);
    max_abs = std::max(max_abs, mx);
    ++r.samples;
  }
  r.k_max = max_abs;
  r.k_lower = std::sqrt(std::max(0.0, -min_eig));
  return r;
}

inline CurvatureProfile constant_profile(Dimension dim, double c, double horizon = 64.0) {
  CurvatureProfile p{dim};
  p.kind = ProfileKind::constant;
  p.k_max = std::abs(c);
  p.k_lower = std::sqrt(std::max(-c, 0.0));
  p.horizon = horizon;
  p.spec_string = "constant:n=" + std::to_string(dim.n) + ",c=" + fmt_g17(c);
  const int m = dim.transverse();
  p.evaluate = [m, c](double) { return MatrixXd(c * MatrixXd::Identity(m, m)); };
  p.eval_min_absmax = [c](double) { return std::make_pair(c, std::abs(c)); };
  return p;
}

namespace detail {

// Per-direction data for w_i = t * exp(phi_i):
//   K_i = -w_i''/w_i = -(2 phi'/t + phi'^2 + phi'')
// The 2 phi'/t term is a 0/0 limit numerically, so below `floor_t` the value
// comes from a quadratic through K(0), K(floor), K(2 floor).  K(0) uses the
// jet at 0 when the expression is finite there, otherwise extrapolation.
struct SeededDirection {
  expr::Expr phi;
  double floor_t = 1e-3;
  double k0 = 0.0;
  std::array<double, 3> knode{};  // K at floor, 2*floor, 3*floor

  double k_formula(double t) const {
    const expr::Jet2 j = phi.eval_jet(t);
    return -(2.0 * j.d1 / t + j.d1 * j.d1 + j.d2);
  }
  double curvature(double t) const {
    t = std::abs(t);
    if (t >= floor_t) return k_formula(t);
    const double h = floor_t;
    const double l0 = (t - h) * (t - 2 * h) / (2 * h * h);
    const double l1 = -t * (t - 2 * h) / (h * h);
    const double l2 = t * (t - h) / (2 * h * h);
    return k0 * l0 + knode[0] * l1 + knode[1] * l2;
  }
};

inline bool jet_finite(const expr::Jet2& j) {
  return std::isfinite(j.v) && std::isfinite(j.d1) && std::isfinite(j.d2);
}

}  // namespace detail

// Diagonal profile seeded by per-direction expressions phi_i(t) with
// phi_i(0) = phi_i'(0) = 0; the zero-seeded solution is then exactly
// diag(t * exp(phi_i(t))), which the profile exposes as its oracle.
inline CurvatureProfile seeded_profile(const std::vector<std::string>& phi_exprs,
                                       double horizon = 20.0) {
  if (phi_exprs.empty()) throw config_error("seeded profile needs at least one phi");
  if (!(horizon > 0.0)) throw config_error("seeded profile: horizon must be positive");
  Dimension dim(static_cast<int>(phi_exprs.size()) + 1);

  auto dirs = std::make_shared<std::vector<detail::SeededDirection>>();
  std::string spec = "seeded:n=" + std::to_string(dim.n) + ",phi=";
  for (size_t i = 0; i < phi_exprs.size(); ++i) {
    detail::SeededDirection d{expr::Expr::parse(phi_exprs[i])};
    const expr::Jet2 at0 = d.phi.eval_jet(0.0);
    if (detail::jet_finite(at0)) {
      if (std::abs(at0.v) > 1e-10 || std::abs(at0.d1) > 1e-10)
        throw config_error("seeded profile: phi must satisfy phi(0)=phi'(0)=0, got \"" +
                           phi_exprs[i] + "\"");
      d.k0 = -3.0 * at0.d2;
    }
    const double eps = 1e-6;
    const expr::Jet2 near0 = d.phi.eval_jet(eps);
    if (!detail::jet_finite(near0) || std::abs(near0.v) > 1e-4 || std::abs(near0.d1) > 1e-4)
      throw config_error("seeded profile: phi not smooth/vanishing at 0: \"" + phi_exprs[i] + "\"");
    for (int q = 0; q < 3; ++q) d.knode[q] = d.k_formula((q + 1) * d.floor_t);
    if (!detail::jet_finite(at0)) {
      // quadratic extrapolation to 0 from the three nodes
      d.k0 = 3.0 * d.knode[0] - 3.0 * d.knode[1] + d.knode[2];
    }
    dirs->push_back(std::move(d));
    spec += (i ? ";" : "") + phi_exprs[i];
  }
  spec += ",horizon=" + fmt_g17(horizon);

  CurvatureProfile p{dim};
  p.kind = ProfileKind::seeded;
  p.horizon = horizon;
  p.spec_string = spec;
  const int m = dim.transverse();
  p.evaluate = [dirs, m](double t) {
    MatrixXd k = MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) k(i, i) = (*dirs)[i].curvature(t);
    return k;
  };
  p.eval_min_absmax = [dirs](double t) {
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (const auto& d : *dirs) {
      const double v = d.curvature(t);
      mn = std::min(mn, v);
      mx = std::max(mx, std::abs(v));
    }
    return std::make_pair(mn, mx);
  };
  p.oracle_w = [dirs, m](double t) {
    VectorXd w(m);
    for (int i = 0; i < m; ++i) w(i) = t * std::exp((*dirs)[i].phi.eval(t));
    return w;
  };
  p.oracle_wp = [dirs, m](double t) {
    VectorXd wp(m);
    for (int i = 0; i < m; ++i) {
      const expr::Jet2 j = (*dirs)[i].phi.eval_jet(t);
      wp(i) = std::exp(j.v) * (1.0 + t * j.d1);
    }
    return wp;
  };
  const BoundsEstimate b = estimate_bounds(p, 1e-3);
  p.k_lower = b.k_lower;
  p.k_max = b.k_max;
  return p;
}

// Uniformly sampled symmetric blocks with local cubic interpolation.
// Samples starting at t = 0 are extended evenly to t < 0.
class SampledBlock {
 public:
  SampledBlock(std::vector<double> t, std::vector<MatrixXd> k)
      : t_(std::move(t)), k_(std::move(k)) {
    if (t_.size() < 4) throw config_error("sampled profile needs >= 4 samples");
    if (t_.size() != k_.size()) throw config_error("sampled profile: t/K size mismatch");
    h_ = t_[1] - t_[0];
    if (!(h_ > 0)) throw config_error("sampled profile: grid must be ascending");
    for (size_t i = 1; i < t_.size(); ++i)
      if (std::abs(t_[i] - t_[i - 1] - h_) > 1e-9 * (1.0 + std::abs(t_[i])))
        throw config_error("sampled profile: grid must be uniform");
    for (auto& m : k_) m = sym_part(m);
  }

  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

  MatrixXd eval(double t) const {
    const double tc = std::clamp(t, t_.front(), t_.back());
    long j = static_cast<long>(std::floor((tc - t_.front()) / h_));
    j = std::clamp(j, 0L, static_cast<long>(t_.size()) - 2);
    // cubic through the 4 nodes around [j, j+1], shifted at the ends
    long j0 = std::clamp(j - 1, 0L, static_cast<long>(t_.size()) - 4);
    MatrixXd out = MatrixXd::Zero(k_[0].rows(), k_[0].cols());
    for (long q = 0; q < 4; ++q) {
      double l = 1.0;
      for (long r = 0; r < 4; ++r)
        if (r != q) l *= (tc - t_[j0 + r]) / (t_[j0 + q] - t_[j0 + r]);
      out += l * k_[j0 + q];
    }
    return out;
  }

 private:
  std::vector<double> t_;
  std::vector<MatrixXd> k_;
  double h_ = 0.0;
};

inline CurvatureProfile profile_from_samples(Dimension dim, std::vector<double> t,
                                             std::vector<MatrixXd> K, std::string spec) {
  const int m = dim.transverse();
  for (const auto& k : K)
    if (k.rows() != m || k.cols() != m)
      throw config_error("sampled profile: block size mismatch");
  auto table = std::make_shared<SampledBlock>(std::move(t), std::move(K));
  const bool even = table->t_min() >= 0.0;
  if (!even && std::abs(table->t_min() + table->t_max()) > 1e-9)
    throw config_error("sampled profile: two-ray grids must be symmetric about 0");

  CurvatureProfile p{dim};
  p.kind = ProfileKind::metric;  // sampled data carries no oracle
  p.horizon = table->t_max();
  p.spec_string = std::move(spec);
  if (even)
    p.evaluate = [table](double tt) { return table->eval(std::abs(tt)); };
  else
    p.evaluate = [table](double tt) { return table->eval(tt); };
  const BoundsEstimate b = estimate_bounds(p, std::max(1e-3, p.horizon / 20000.0));
  p.k_lower = b.k_lower;
  p.k_max = b.k_max;
  return p;
}

}  // namespace geolab
