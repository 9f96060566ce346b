#pragma once
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>
#include <vector>

#include "geolab/errors.hpp"

namespace geolab {

// Rectangular flat torus.  The Laplace spectrum is explicit: one eigenvalue
// sum_i (2 pi m_i / L_i)^2 per integer vector (m_1, ..., m_n), multiplicity
// counted by enumerating the vectors themselves.
struct FlatTorusModel {
  std::vector<double> lengths;

  explicit FlatTorusModel(std::vector<double> lengths_)
      : lengths(std::move(lengths_)) {
    if (lengths.empty())
      throw config_error("torus needs at least one side length");
    for (double L : lengths)
      if (!std::isfinite(L) || L <= 0.0)
        throw config_error("torus side lengths must be positive and finite");
  }

  int dim() const { return static_cast<int>(lengths.size()); }

  double volume() const {
    double v = 1.0;
    for (double L : lengths) v *= L;
    return v;
  }
};

namespace detail {

// Nested loops over one axis at a time.  partial <= budget holds on entry, so
// a leaf contributes one lattice point.  The per-axis weight w = (2 pi / L)^2
// grows with |m|, which lets the positive half of each loop stop early.
inline std::int64_t count_axis(const std::vector<double>& w,
                               const std::vector<std::int64_t>& radius,
                               std::size_t axis, double partial, double budget) {
  if (axis == w.size()) return 1;
  std::int64_t total = count_axis(w, radius, axis + 1, partial, budget);
  for (std::int64_t m = 1; m <= radius[axis]; ++m) {
    const double s =
        partial + w[axis] * static_cast<double>(m) * static_cast<double>(m);
    if (s > budget) break;
    total += 2 * count_axis(w, radius, axis + 1, s, budget);
  }
  return total;
}

}  // namespace detail

// Number of eigenvalues mu <= lambda^2, boundary ties included.  The
// comparison carries a 1e-12 relative guard band so that exact ties (square
// torus, integer lambda) are never dropped to roundoff.  The cap bounds the
// full enumeration box before any work happens.
inline std::int64_t count_eigenvalues(const FlatTorusModel& model, double lambda,
                                      double cap = 1e9) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw config_error("eigenvalue counting needs finite lambda >= 0");
  if (!(cap > 0.0)) throw config_error("enumeration cap must be positive");

  const int n = model.dim();
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> w(n);
  std::vector<std::int64_t> radius(n);
  double box = 1.0;
  for (int i = 0; i < n; ++i) {
    const double inv = two_pi / model.lengths[i];
    w[i] = inv * inv;
    radius[i] =
        static_cast<std::int64_t>(std::ceil(lambda * model.lengths[i] / two_pi));
    box *= 2.0 * static_cast<double>(radius[i]) + 1.0;
  }
  if (box > cap) throw enumeration_cap_error(box);

  const double budget = lambda * lambda * (1.0 + 1e-12);
  return detail::count_axis(w, radius, 0, 0.0, budget);
}

// Leading term of the counting asymptotics: omega_n vol(M) lambda^n / (2 pi)^n
// with omega_n the unit-ball volume pi^(n/2) / Gamma(n/2 + 1).
inline double weyl_leading(const FlatTorusModel& model, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw config_error("leading term needs finite lambda >= 0");
  const int n = model.dim();
  const double omega_n =
      std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  return omega_n * model.volume() * std::pow(lambda, n) /
         std::pow(2.0 * std::numbers::pi, n);
}

// Counting function alongside its leading term over a lambda grid.  The ratio
// column normalizes |N - leading| by lambda^(n-1)/log(lambda); that quotient
// only makes sense for lambda > e, so other rows hold NaN and an all-NaN
// column leaves sup_ratio NaN as well.
struct CountResult {
  int n = 0;
  std::vector<double> lambda_grid;
  std::vector<std::int64_t> counts;
  std::vector<double> leading;
  std::vector<double> remainder;  // counts - leading
  std::vector<double> ratio;      // NaN where lambda <= e
  double sup_ratio = std::numeric_limits<double>::quiet_NaN();
};

inline CountResult remainder_diagnostic(const FlatTorusModel& model,
                                        const std::vector<double>& lambda_grid,
                                        double cap = 1e9, int jobs = 1) {
  if (lambda_grid.empty())
    throw config_error("remainder diagnostic needs a nonempty lambda grid");
  for (double l : lambda_grid)
    if (!std::isfinite(l) || l < 0.0)
      throw config_error("lambda grid entries must be finite and >= 0");

  const std::size_t count = lambda_grid.size();
  CountResult out;
  out.n = model.dim();
  out.lambda_grid = lambda_grid;
  out.counts.assign(count, 0);
  out.leading.resize(count);
  out.remainder.resize(count);
  out.ratio.assign(count, std::numeric_limits<double>::quiet_NaN());

  // grid points are independent, so spread them over strided workers; the
  // output slots are disjoint and the merge order never changes the result
  const std::size_t workers =
      std::min<std::size_t>(std::max(jobs, 1), count);
  std::vector<std::exception_ptr> failures(workers);
  auto run = [&](std::size_t offset) {
    try {
      for (std::size_t i = offset; i < count; i += workers)
        out.counts[i] = count_eigenvalues(model, lambda_grid[i], cap);
    } catch (...) {
      failures[offset] = std::current_exception();
    }
  };
  if (workers <= 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t o = 0; o < workers; ++o) pool.emplace_back(run, o);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  for (std::size_t i = 0; i < count; ++i) {
    const double lambda = lambda_grid[i];
    out.leading[i] = weyl_leading(model, lambda);
    out.remainder[i] = static_cast<double>(out.counts[i]) - out.leading[i];
    if (lambda > std::numbers::e) {
      const double scale = std::pow(lambda, out.n - 1) / std::log(lambda);
      out.ratio[i] = std::abs(out.remainder[i]) / scale;
      if (!(out.ratio[i] <= out.sup_ratio)) out.sup_ratio = out.ratio[i];
    }
  }
  return out;
}

}  // namespace geolab
