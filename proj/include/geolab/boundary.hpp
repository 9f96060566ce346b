#pragma once
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "geolab/jacobi.hpp"
#include "geolab/quadrature.hpp"

namespace geolab {

struct BoundarySlope {
  double t = 0.0;
  MatrixXd value;  // D_t'(0) = -J2(t)^{-1} J1(t)
  std::string method = "bvp-rk4";
};

// Truncation of M(s) = int_s^inf A^{-1} A^{-T}; `value` is a lower bound of
// the full integral as a quadratic form whenever `converged` is false.
struct GrowthMatrix {
  double s = 0.0;
  MatrixXd value;
  double T_used = 0.0;
  double tail_increment = 0.0;
  bool converged = false;
};

struct BridgeMatrix {
  double s = 0.0, t = 0.0;
  MatrixXd value;  // symmetrized slope(-s) - slope(t)
  double asymmetry = 0.0;
};

struct GreenLimitSlope {
  MatrixXd value;  // slope at the truncation horizon
  double consistency_residual = 0.0;  // vs slope(s_fix) + M(s_fix)
  double T_used = 0.0;
  bool converged = false;
};

struct DInfinity {
  MatrixXd value;  // A(s) * M(s)
  double cond = 0.0;
  double T_used = 0.0;
  bool converged = false;
};

// Caches the canonical fields over one profile so repeated slope/bridge/
// growth queries share the integrations.  reach_neg <= 0 <= reach_pos give
// how far each ray is integrated.
class BoundaryFields {
 public:
  BoundaryFields(const CurvatureProfile& profile, double reach_neg, double reach_pos,
                 double step)
      : profile_(profile), step_(step) {
    if (!(step > 0)) throw config_error("boundary fields: step must be positive");
    if (reach_neg > 0 || reach_pos < 0) throw config_error("boundary fields: bad reach");
    if (reach_pos > 0) {
      auto [j1, j2] = field_pair(profile_, reach_pos, step);
      j1f_ = std::move(j1);
      j2f_ = std::move(j2);
      if (reach_pos > 2 * step) a_fwd_ = field_A(profile_, reach_pos, step);
    }
    if (reach_neg < 0) {
      auto [j1, j2] = field_pair(profile_, reach_neg, step);
      j1b_ = std::move(j1);
      j2b_ = std::move(j2);
      if (reach_neg < -2 * step) a_bwd_ = field_A(profile_, reach_neg, step);
    }
  }

  const CurvatureProfile& profile() const { return profile_; }
  double step() const { return step_; }
  const JacobiTrajectory& zero_field() const {
    if (!a_fwd_) throw config_error("boundary fields: forward ray not integrated");
    return *a_fwd_;
  }
  const JacobiTrajectory& zero_field_backward() const {
    if (!a_bwd_) throw config_error("boundary fields: backward ray not integrated");
    return *a_bwd_;
  }

  MatrixXd slope(double t) const {
    if (t == 0.0) throw config_error("slope: t must be nonzero");
    const JacobiTrajectory* j1 = t > 0 ? (j1f_ ? &*j1f_ : nullptr) : (j1b_ ? &*j1b_ : nullptr);
    const JacobiTrajectory* j2 = t > 0 ? (j2f_ ? &*j2f_ : nullptr) : (j2b_ ? &*j2b_ : nullptr);
    if (!j1 || !j2) throw config_error("slope: requested ray not integrated");
    const MatrixXd x1 = j1->evalX(t);
    const MatrixXd x2 = j2->evalX(t);
    if (smallest_singular_value(x2) < 1e-12 * std::max(1.0, op_norm(x2)))
      throw conjugate_point_error(t, "boundary solve singular at t = " + std::to_string(t));
    return MatrixXd(-x2.partialPivLu().solve(x1));
  }

  // int_a^b A^{-1} A^{-T}, composite Simpson at the integration step.
  MatrixXd integral_G(double a, double b) const {
    const JacobiTrajectory& A = zero_field();
    return simpson(
        [&](double x) {
          const MatrixXd inv = A.evalX(x).partialPivLu().inverse();
          return MatrixXd(inv * inv.transpose());
        },
        a, b, step_);
  }

  // Truncated growth matrix: doubling horizon from 4*max(1,s), stopping when
  // the doubling increment drops below tol (but not before T_min).
  GrowthMatrix growth(double s, double tol, double T_min = 0.0) const {
    const JacobiTrajectory& A = zero_field();
    const double reach = A.t_back();
    if (!(s >= A.t_front() && s < reach)) throw config_error("growth: s outside range");
    GrowthMatrix g;
    g.s = s;
    double T = std::min(4.0 * std::max(1.0, s), reach);
    if (T <= s) T = reach;
    if (T >= reach) {
      const double mid = 0.5 * (s + reach);
      const MatrixXd head = integral_G(s, mid);
      const MatrixXd tail = integral_G(mid, reach);
      g.value = sym_part(head + tail);
      g.T_used = reach;
      g.tail_increment = op_norm(tail);
      g.converged = g.tail_increment < tol;
      return g;
    }
    MatrixXd acc = integral_G(s, T);
    double tail = std::numeric_limits<double>::infinity();
    while (T < reach) {
      const double T2 = std::min(2.0 * T, reach);
      const MatrixXd inc = integral_G(T, T2);
      acc += inc;
      tail = op_norm(inc);
      T = T2;
      if (tail < tol && T >= T_min) break;
    }
    g.value = sym_part(acc);
    g.T_used = T;
    g.tail_increment = tail;
    g.converged = tail < tol;
    return g;
  }

  BridgeMatrix bridge(double s, double t) const {
    if (!(s > 0) || !(t > 0)) throw config_error("bridge: needs s > 0 and t > 0");
    const MatrixXd n = slope(-s) - slope(t);
    BridgeMatrix b;
    b.s = s;
    b.t = t;
    b.asymmetry = asym_norm(n);
    b.value = sym_part(n);
    return b;
  }

  GreenLimitSlope green_limit(double s_fix, double tol) const {
    const GrowthMatrix g = growth(s_fix, tol);
    GreenLimitSlope out;
    out.value = slope(g.T_used);
    out.consistency_residual = op_norm(MatrixXd(out.value - (slope(s_fix) + g.value)));
    out.T_used = g.T_used;
    out.converged = g.converged;
    return out;
  }

  DInfinity d_infinity(double s, double tol) const {
    const int m = profile_.block();
    DInfinity d;
    if (s == 0.0) {  // A(0) M(0) -> Id
      d.value = MatrixXd::Identity(m, m);
      d.cond = 1.0;
      d.T_used = 0.0;
      d.converged = true;
      return d;
    }
    const GrowthMatrix g = growth(s, tol);
    d.value = zero_field().evalX(s) * g.value;
    d.cond = cond_number(d.value);
    d.T_used = g.T_used;
    d.converged = g.converged;
    return d;
  }

  // Boundary field vanishing at t_van, evaluated at s: D_t(s) = A(s) int_s^t G.
  MatrixXd boundary_field_at(double t_van, double s_eval) const {
    const int m = profile_.block();
    if (s_eval == 0.0) return MatrixXd::Identity(m, m);
    if (!(s_eval > 0) || !(s_eval < t_van))
      throw config_error("boundary field: needs 0 <= s < t");
    if (s_eval < step_) throw config_error("boundary field: s below grid resolution");
    return MatrixXd(zero_field().evalX(s_eval) * integral_G(s_eval, t_van));
  }

 private:
  CurvatureProfile profile_;
  double step_;
  std::optional<JacobiTrajectory> a_fwd_, a_bwd_, j1f_, j2f_, j1b_, j2b_;
};

inline BoundarySlope slope_bvp(const CurvatureProfile& profile, double t, double step) {
  if (t == 0.0) throw config_error("slope_bvp: t must be nonzero");
  BoundaryFields bf(profile, std::min(t, 0.0), std::max(t, 0.0), step);
  return {t, bf.slope(t)};
}

inline MatrixXd slope_quadrature(const CurvatureProfile& profile, double t_van, double s_eval,
                                 double step) {
  if (!(t_van > 0)) throw config_error("slope_quadrature: t must be positive");
  BoundaryFields bf(profile, 0.0, t_van, step);
  return bf.boundary_field_at(t_van, s_eval);
}

inline GrowthMatrix growth_matrix(const CurvatureProfile& profile, double s, double step,
                                  double tol = 1e-8) {
  BoundaryFields bf(profile, 0.0, profile.horizon, step);
  return bf.growth(s, tol);
}

inline BridgeMatrix bridge_matrix(const CurvatureProfile& profile, double s, double t,
                                  double step) {
  BoundaryFields bf(profile, -s, t, step);
  return bf.bridge(s, t);
}

inline GreenLimitSlope green_limit_slope(const CurvatureProfile& profile, double s_fix,
                                         double step, double tol = 1e-8) {
  BoundaryFields bf(profile, 0.0, profile.horizon, step);
  return bf.green_limit(s_fix, tol);
}

inline DInfinity d_infinity(const CurvatureProfile& profile, double s, double step,
                            double tol = 1e-8) {
  BoundaryFields bf(profile, 0.0, profile.horizon, step);
  return bf.d_infinity(s, tol);
}

// ||slope(s) + Id/s|| / s for each requested s; the small-s defect of the
// boundary slope is O(1) in this scaling, with constant controlled by the
// curvature bound.
inline std::vector<double> slope_origin_ratios(const CurvatureProfile& profile,
                                               const std::vector<double>& s_list, double step) {
  double reach = 0.0;
  for (double s : s_list) {
    if (!(s > 0)) throw config_error("slope_origin_ratios: s must be positive");
    reach = std::max(reach, s);
  }
  BoundaryFields bf(profile, 0.0, reach, step);
  const int m = profile.block();
  std::vector<double> out;
  out.reserve(s_list.size());
  for (double s : s_list)
    out.push_back(op_norm(MatrixXd(bf.slope(s) + MatrixXd::Identity(m, m) / s)) / s);
  return out;
}

}  // namespace geolab
