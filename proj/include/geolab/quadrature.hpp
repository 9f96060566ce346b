#pragma once
#include <cmath>
#include <vector>

#include "geolab/errors.hpp"
#include "geolab/linalg.hpp"

namespace geolab {

// Composite Simpson over [a, b] with an even interval count close to
// (b-a)/target_h.  F maps double -> MatrixXd (or double via 1x1 use sites).
template <class F>
MatrixXd simpson(F&& f, double a, double b, double target_h) {
  if (!(b > a)) throw config_error("simpson: empty range");
  long n = static_cast<long>(std::ceil((b - a) / target_h));
  n += n % 2;
  n = std::max(n, 2L);
  const double h = (b - a) / static_cast<double>(n);
  MatrixXd acc = f(a) + f(b);
  for (long i = 1; i < n; ++i) acc += ((i % 2) ? 4.0 : 2.0) * f(a + h * static_cast<double>(i));
  return MatrixXd(acc * (h / 3.0));
}

// Prefix integrals of uniformly sampled values: out[j] = int_{x_0}^{x_j}.
// Even prefixes are plain composite Simpson; odd prefixes close the last
// interval with the quadratic through its three trailing nodes, keeping the
// cumulative error at Simpson order.
inline std::vector<double> cumulative_simpson(const std::vector<double>& y, double h) {
  const size_t n = y.size();
  if (n < 3) throw config_error("cumulative_simpson: need at least 3 samples");
  std::vector<double> out(n, 0.0);
  for (size_t j = 2; j < n; j += 2)
    out[j] = out[j - 2] + (h / 3.0) * (y[j - 2] + 4.0 * y[j - 1] + y[j]);
  out[1] = (h / 12.0) * (5.0 * y[0] + 8.0 * y[1] - y[2]);
  for (size_t j = 3; j < n; j += 2)
    out[j] = out[j - 1] + (h / 12.0) * (-y[j - 2] + 8.0 * y[j - 1] + 5.0 * y[j]);
  return out;
}

}  // namespace geolab
