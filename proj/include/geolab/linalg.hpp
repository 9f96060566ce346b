#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace geolab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd sym_part(const MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Largest |eigenvalue| of a symmetric matrix.
inline double op_norm_sym(const MatrixXd& m) {
  if (m.rows() == 1) return std::abs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Spectral norm.  Blocks here are (n-1)x(n-1) with small n, so the exact
// route (eigendecomposition when symmetric, SVD otherwise) is cheap.
inline double op_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale)
    return op_norm_sym(sym_part(m));
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(0);
}

inline double asym_norm(const MatrixXd& m) {
  return op_norm(MatrixXd(m - m.transpose()));
}

inline double min_eigenvalue_sym(const MatrixXd& m) {
  if (m.rows() == 1) return m(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double smallest_singular_value(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

inline double cond_number(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

// k*coth(k*t) with the k -> 0 limit 1/t; series for small k*t avoids the
// 0/0 evaluation.
inline double k_coth(double k, double t) {
  if (k <= 0.0) return 1.0 / t;
  const double x = k * t;
  if (std::abs(x) < 1e-4) return 1.0 / t + k * k * t / 3.0;
  return k / std::tanh(x);
}

// 17 significant digits: doubles round-trip exactly, so identical inputs
// give byte-identical CSV bodies.
inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace geolab
