#pragma once
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geolab/curvature.hpp"

namespace geolab {

// Reproducible family of convex seed exponents for the property suites.
// Each factor is phi(t) = sum of a*log(cosh(b t)): phi and phi' vanish at
// t = 0 as an admissible seed w_i = t exp(phi_i) requires, phi'' >= 0 makes
// the induced curvature -(phi'' + phi'^2) nonpositive (so zero-seeded fields
// never focus and two-sided bridge matrices stay positive semidefinite), and
// phi' is bounded, so the curvature stays bounded out to any horizon.
inline std::vector<CurvatureProfile> random_seeded_profiles(int count,
                                                            std::uint64_t seed,
                                                            double horizon = 20.0) {
  if (count < 0) throw config_error("random profiles: count must be >= 0");
  std::mt19937_64 rng(seed);
  // canonical [0,1) doubles straight from the raw stream keeps the family
  // identical across standard library implementations
  const auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const auto in = [&](double lo, double hi) { return lo + (hi - lo) * u01(); };

  std::vector<CurvatureProfile> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int n = 2 + static_cast<int>(rng() & 1u);
    std::vector<std::string> phis;
    for (int j = 0; j < n - 1; ++j) {
      std::string e;
      for (int term = 0; term < 2; ++term) {
        const double a = in(0.05, 0.4);
        const double b = in(0.4, 1.6);
        if (!e.empty()) e += "+";
        e += fmt_g17(a) + "*log(cosh(" + fmt_g17(b) + "*t))";
      }
      phis.push_back(std::move(e));
    }
    out.push_back(seeded_profile(phis, horizon));
  }
  return out;
}

}  // namespace geolab
