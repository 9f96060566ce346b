#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "geolab/boundary.hpp"
#include "geolab/jacobi.hpp"

namespace geolab {

enum class RiccatiSource { zero_field, green_field, custom };

// V = X' X^{-1} along a Jacobi solution; solves V' + V^2 + K = 0.
struct RiccatiTrajectory {
  std::shared_ptr<const JacobiTrajectory> src;
  RiccatiSource source = RiccatiSource::custom;
  std::vector<double> grid;
  std::vector<MatrixXd> V;
  double max_symmetry_defect = 0.0;  // sup ||V - V^T|| / (1 + ||V||)

  MatrixXd eval(double t) const {
    const auto st = src->eval(t);
    if (smallest_singular_value(st.X) < 1e-14 * std::max(1.0, op_norm(st.X)))
      throw conjugate_point_error(t);
    return MatrixXd(st.Xp * st.X.partialPivLu().inverse());
  }
};

inline RiccatiTrajectory riccati_from(const JacobiTrajectory& traj, double t_min, double t_max,
                                      RiccatiSource source = RiccatiSource::custom) {
  RiccatiTrajectory rt;
  rt.src = std::make_shared<JacobiTrajectory>(traj);
  rt.source = source;
  for (size_t i = 0; i < traj.grid.size(); ++i) {
    const double t = traj.grid[i];
    if (t < t_min - 1e-12 || t > t_max + 1e-12) continue;
    const MatrixXd& x = traj.X[i];
    const double sv = smallest_singular_value(x);
    if (sv < 1e-12 * std::max(1.0, op_norm(x)))
      throw conjugate_point_error(t, "Riccati blow-up: zero of the solution at t = " +
                                         std::to_string(t));
    MatrixXd v = traj.Xp[i] * x.partialPivLu().inverse();
    rt.max_symmetry_defect =
        std::max(rt.max_symmetry_defect, asym_norm(v) / (1.0 + op_norm(v)));
    rt.grid.push_back(t);
    rt.V.push_back(std::move(v));
  }
  if (rt.grid.size() < 5) throw config_error("riccati_from: window too small");
  return rt;
}

// Riccati solution attached to the boundary field at the growth-matrix
// truncation horizon: seed (Id, slope(T)) integrated forward.
inline RiccatiTrajectory riccati_from_green(const CurvatureProfile& profile, double t_max,
                                            double step, double tol = 1e-8) {
  BoundaryFields bf(profile, 0.0, profile.horizon, step);
  const GreenLimitSlope gl = bf.green_limit(std::min(1.0, 0.5 * t_max), tol);
  const int m = profile.block();
  JacobiSeed seed{0.0, MatrixXd::Identity(m, m), gl.value, SeedKind::custom};
  const JacobiTrajectory d = integrate(profile, seed, t_max, step);
  return riccati_from(d, step, t_max, RiccatiSource::green_field);
}

// Defect of V' + V^2 + K = 0 with V' from the 5-point centered stencil on
// the uniform grid (matches the integrator's order; the 3-point stencil is
// too blunt near the 1/t singularity).
struct RiccatiResidual {
  double max_defect = 0.0;  // ||V' + V^2 + K|| / (1 + ||V||^2)
  double worst_t = 0.0;
};

inline RiccatiResidual riccati_residual_check(const RiccatiTrajectory& rt,
                                              const CurvatureProfile& profile) {
  RiccatiResidual r;
  const size_t n = rt.grid.size();
  if (n < 5) throw config_error("riccati residual: need at least 5 samples");
  const double h = rt.grid[1] - rt.grid[0];
  for (size_t i = 2; i + 2 < n; ++i) {
    const MatrixXd vp =
        (rt.V[i - 2] - 8.0 * rt.V[i - 1] + 8.0 * rt.V[i + 1] - rt.V[i + 2]) / (12.0 * h);
    const MatrixXd defect = vp + rt.V[i] * rt.V[i] + profile.evaluate(rt.grid[i]);
    const double scaled = op_norm(defect) / (1.0 + std::pow(op_norm(rt.V[i]), 2));
    if (scaled > r.max_defect) {
      r.max_defect = scaled;
      r.worst_t = rt.grid[i];
    }
  }
  return r;
}

struct BoundCheckEntry {
  double t = 0.0, norm = 0.0, bound = 0.0;
};
struct RiccatiBoundCheck {
  double max_ratio = 0.0;  // sup ||V(t)|| / (k coth(k t))
  double worst_t = 0.0;
  std::vector<BoundCheckEntry> entries;
};

// Comparison bound ||V(t)|| <= k coth(k t) for solutions of the Riccati
// equation with K >= -k^2 Id on (0, t].
inline RiccatiBoundCheck riccati_bound_check(const RiccatiTrajectory& rt, double k,
                                             const std::vector<double>& t_grid) {
  RiccatiBoundCheck out;
  for (double t : t_grid) {
    BoundCheckEntry e;
    e.t = t;
    e.norm = op_norm(rt.eval(t));
    e.bound = k_coth(k, t);
    out.entries.push_back(e);
    const double ratio = e.norm / e.bound;
    if (ratio > out.max_ratio) {
      out.max_ratio = ratio;
      out.worst_t = t;
    }
  }
  return out;
}

struct ThetaSample {
  double t = 0.0;
  double theta = 0.0;      // det X / t^(n-1)
  double vartheta = 0.0;   // det X
  double log_vartheta = 0.0;
};

// Volume densities along the geodesic from the zero-seeded field.  Throws
// if a conjugate point lies inside the requested range.
inline std::vector<ThetaSample> theta(const CurvatureProfile& profile,
                                      const std::vector<double>& t_grid, double step) {
  if (t_grid.empty()) throw config_error("theta: empty grid");
  double t_max = 0.0;
  for (double t : t_grid) {
    if (!(t >= step)) throw config_error("theta: t must be >= step");
    t_max = std::max(t_max, t);
  }
  const JacobiTrajectory a = field_A(profile, t_max, step);
  if (const auto tc = first_conjugate_time(a); tc && *tc <= t_max)
    throw conjugate_point_error(*tc);
  const int m = profile.block();
  std::vector<ThetaSample> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    ThetaSample s;
    s.t = t;
    s.vartheta = a.det_at(t);
    s.theta = s.vartheta / std::pow(t, m);
    s.log_vartheta = std::log(s.vartheta);
    out.push_back(s);
  }
  return out;
}

struct LogDerivativeCheck {
  double max_defect = 0.0;  // | d/dt log det X - tr(X' X^{-1}) |
  double worst_t = 0.0;
};

inline LogDerivativeCheck log_derivative_check(const CurvatureProfile& profile, double t_min,
                                               double t_max, double step) {
  const JacobiTrajectory a = field_A(profile, t_max, step);
  if (const auto tc = first_conjugate_time(a); tc && *tc <= t_max)
    throw conjugate_point_error(*tc);
  const size_t n = a.grid.size();
  std::vector<double> logdet(n);
  for (size_t i = 0; i < n; ++i) logdet[i] = std::log(std::abs(a.X[i].determinant()));
  const double h = a.grid[1] - a.grid[0];
  LogDerivativeCheck out;
  for (size_t i = 2; i + 2 < n; ++i) {
    const double t = a.grid[i];
    if (t < t_min || t > t_max) continue;
    const double dlog =
        (logdet[i - 2] - 8.0 * logdet[i - 1] + 8.0 * logdet[i + 1] - logdet[i + 2]) / (12.0 * h);
    const double tru = (a.Xp[i] * a.X[i].partialPivLu().inverse()).trace();
    const double defect = std::abs(dlog - tru);
    if (defect > out.max_defect) {
      out.max_defect = defect;
      out.worst_t = t;
    }
  }
  return out;
}

struct InverseNormEntry {
  double t = 0.0;
  double identity_residual = 0.0;   // relative defect of U - V = A^{-T} M^{-1} A^{-1}
  double inequality_ratio = 0.0;    // ||A^{-1}||^2 / (2 ||M(t)|| k coth(kt)), t <= T/2
};
struct InverseNormCheck {
  std::vector<InverseNormEntry> entries;
  double max_identity_residual = 0.0;
  double max_inequality_ratio = 0.0;  // over t <= T/2
  double T_used = 0.0;
  bool converged = false;
};

// Verifies U - V = A^{-T} M^{-1} A^{-1} with U from the zero-seeded field and
// V from the boundary field vanishing at the truncation horizon T.  With both
// sides truncated at the same T the identity is exact for every T, and the
// induced bound ||A^{-1}(t)||^2 <= 2 ||M(t)|| k coth(kt) is valid for t <= T/2.
inline InverseNormCheck inverse_norm_bound_check(const CurvatureProfile& profile,
                                                 const std::vector<double>& t_grid, double k,
                                                 double step, double tol = 1e-8) {
  if (t_grid.empty()) throw config_error("inverse norm check: empty grid");
  double t_max = 0.0, t_min = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!(t >= step)) throw config_error("inverse norm check: t must be >= step");
    t_max = std::max(t_max, t);
    t_min = std::min(t_min, t);
  }
  BoundaryFields bf(profile, 0.0, profile.horizon, step);
  const GrowthMatrix g = bf.growth(t_min, tol, /*T_min=*/std::min(2.0 * t_max, profile.horizon));
  const double T = g.T_used;

  const int m = profile.block();
  JacobiSeed seed{0.0, MatrixXd::Identity(m, m), bf.slope(T), SeedKind::custom};
  const JacobiTrajectory d = integrate(profile, seed, t_max, step);
  const JacobiTrajectory& a = bf.zero_field();

  std::vector<double> ts = t_grid;
  std::sort(ts.begin(), ts.end());
  InverseNormCheck out;
  out.T_used = T;
  out.converged = g.converged;
  MatrixXd m_tail = MatrixXd::Zero(m, m);
  double right = T;
  for (size_t q = ts.size(); q-- > 0;) {
    const double t = ts[q];
    m_tail += bf.integral_G(t, right);
    right = t;
    const MatrixXd M = sym_part(m_tail);

    const auto sa = a.eval(t);
    const auto sd = d.eval(t);
    const MatrixXd ainv = sa.X.partialPivLu().inverse();
    const MatrixXd u = sa.Xp * ainv;
    const MatrixXd v = sd.Xp * sd.X.partialPivLu().inverse();
    const MatrixXd lhs = u - v;
    const MatrixXd rhs = ainv.transpose() * M.partialPivLu().inverse() * ainv;

    InverseNormEntry e;
    e.t = t;
    e.identity_residual =
        op_norm(MatrixXd(lhs - rhs)) / std::max({op_norm(lhs), op_norm(rhs), 1e-300});
    const double lhs_norm = std::pow(op_norm(ainv), 2);
    const double rhs_norm = 2.0 * op_norm(M) * k_coth(k, t);
    e.inequality_ratio = lhs_norm / rhs_norm;
    out.max_identity_residual = std::max(out.max_identity_residual, e.identity_residual);
    if (t <= 0.5 * T)
      out.max_inequality_ratio = std::max(out.max_inequality_ratio, e.inequality_ratio);
    out.entries.push_back(e);
  }
  std::reverse(out.entries.begin(), out.entries.end());
  return out;
}

struct CertificateEntry {
  double t = 0.0;
  double vartheta = 0.0;
  double vartheta_inv = 0.0;
  double rhs = 0.0;     // (2 k coth(kt) ||N_{s,s}||)^{(n-1)/2}
  double margin = 0.0;  // rhs - 1/vartheta, must be >= 0
};

struct LowerBoundCertificate {
  std::string profile_id;
  double s = 0.0;
  double k = 0.0;
  double bridge_norm = 0.0;  // ||N_{s,s}||
  double C = 0.0;            // certified uniform lower bound: min_t rhs(t)^{-1}
  std::vector<CertificateEntry> entries;
  bool falsified = false;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
};

// Certified lower bound for the volume density: for t > s > 0 and
// K >= -k^2 Id,   1/vartheta(t) <= (2 k coth(kt) ||N_{s,s}||)^{(n-1)/2}.
// Margins below -margin_tol mark the certificate as falsified (a correct
// implementation never produces one).
inline LowerBoundCertificate lower_bound_certificate(const CurvatureProfile& profile, double s,
                                                     const std::vector<double>& t_grid,
                                                     double step, double margin_tol = 1e-8) {
  if (!(s > 0)) throw config_error("certificate: s must be positive");
  if (t_grid.empty()) throw config_error("certificate: empty t grid");
  double t_max = 0.0;
  for (double t : t_grid) {
    if (!(t > s)) throw config_error("certificate: t grid must lie strictly above s");
    t_max = std::max(t_max, t);
  }

  BoundaryFields bf(profile, -s, t_max, step);
  if (const auto tc = first_conjugate_time(bf.zero_field()); tc && *tc <= t_max)
    throw conjugate_point_error(*tc);
  if (s > 2 * step) {
    if (const auto tc = first_conjugate_time(bf.zero_field_backward()); tc && *tc >= -s)
      throw conjugate_point_error(*tc);
  }

  LowerBoundCertificate cert;
  cert.profile_id = profile.spec_string;
  cert.s = s;
  cert.k = profile.k_lower;
  cert.bridge_norm = op_norm(bf.bridge(s, s).value);
  const int m = profile.block();
  const JacobiTrajectory& a = bf.zero_field();
  double inv_rhs_min = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    CertificateEntry e;
    e.t = t;
    e.vartheta = a.det_at(t);
    e.vartheta_inv = 1.0 / e.vartheta;
    e.rhs = std::pow(2.0 * k_coth(cert.k, t) * cert.bridge_norm, 0.5 * m);
    e.margin = e.rhs - e.vartheta_inv;
    inv_rhs_min = std::min(inv_rhs_min, 1.0 / e.rhs);
    if (e.margin < cert.worst_margin) {
      cert.worst_margin = e.margin;
      cert.worst_t = t;
    }
    cert.entries.push_back(e);
  }
  cert.C = inv_rhs_min;
  cert.falsified = cert.worst_margin < -margin_tol;
  return cert;
}

struct DivergenceDiagnostic {
  std::vector<ThetaSample> samples;
  bool increasing_tail = true;  // vartheta nondecreasing on the second half
  double first_decrease_t = std::numeric_limits<double>::quiet_NaN();
};

inline DivergenceDiagnostic divergence_diagnostic(const CurvatureProfile& profile,
                                                  const std::vector<double>& t_grid,
                                                  double step) {
  DivergenceDiagnostic d;
  d.samples = theta(profile, t_grid, step);
  for (size_t i = d.samples.size() / 2; i + 1 < d.samples.size(); ++i) {
    if (d.samples[i + 1].vartheta < d.samples[i].vartheta) {
      d.increasing_tail = false;
      d.first_decrease_t = d.samples[i + 1].t;
      break;
    }
  }
  return d;
}

}  // namespace geolab
