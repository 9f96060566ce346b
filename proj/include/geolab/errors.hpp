#pragma once
#include <stdexcept>
#include <string>

namespace geolab {

// Raised when a determinant sign change (or singular-value collapse) of the
// zero-seeded field is detected inside a range that requires invertibility.
struct conjugate_point_error : std::runtime_error {
  double t;
  explicit conjugate_point_error(double t_, const std::string& what_ = "")
      : std::runtime_error(what_.empty()
                               ? "conjugate point near t = " + std::to_string(t_)
                               : what_),
        t(t_) {}
};

// Non-finite state during time stepping; carries the last valid time.
struct integration_error : std::runtime_error {
  double t_last;
  explicit integration_error(double t_last_, const std::string& what_ = "")
      : std::runtime_error(what_.empty()
                               ? "non-finite state at t = " + std::to_string(t_last_)
                               : what_),
        t_last(t_last_) {}
};

// Bad scenario input: malformed profile strings, out-of-range parameters,
// unknown config keys.  The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what_) : std::runtime_error(what_) {}
};

// Lattice enumeration would exceed the configured point cap.
struct enumeration_cap_error : std::runtime_error {
  double estimated_points;
  explicit enumeration_cap_error(double est)
      : std::runtime_error("lattice enumeration too large: about " +
                           std::to_string(est) + " points"),
        estimated_points(est) {}
};

}  // namespace geolab
