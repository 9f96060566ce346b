#pragma once
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geolab/errors.hpp"
#include "geolab/linalg.hpp"

namespace geolab {

inline constexpr const char* kToolVersion = "1.0.0";

// CSV table whose body is a pure function of its cells: 17-significant-digit
// doubles (round-trip exact), '\n' line ends, no quoting, no locale.  NaN
// renders as an empty cell so optional columns stay machine-readable.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  static std::string cell(double x) {
    return std::isnan(x) ? std::string() : fmt_g17(x);
  }
  static std::string cell(std::int64_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }

  std::string body() const {
    std::string out = join(header);
    for (const auto& row : rows) {
      if (row.size() != header.size())
        throw std::logic_error("csv row width does not match the header");
      out += join(row);
    }
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot write \"" + path + "\"");
    f << body();
    if (!f) throw config_error("write failed for \"" + path + "\"");
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    line += '\n';
    return line;
  }
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string witness_label;  // what the number measures
  double witness = std::numeric_limits<double>::quiet_NaN();
};

// Tolerance knobs mirrored by the command line's --tol-scale.  Defaults are
// the pinned acceptance values; scaling touches every knob uniformly.
struct Tolerances {
  double closed_form_rel = 1e-6;
  double wronskian_drift = 1e-8;
  double riccati_ratio_slack = 1e-6;
  double bridge_symmetry = 1e-9;
  double bridge_psd = 1e-9;
  double certificate_margin = 1e-8;
  double identity_residual_constant = 1e-6;
  double identity_residual_seeded = 1e-5;
  double parametrix_flat_zero = 1e-10;
  double parametrix_convergence = 1e-6;

  Tolerances scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
      throw config_error("tolerance scale must be positive and finite");
    Tolerances t = *this;
    for (double* v : {&t.closed_form_rel, &t.wronskian_drift, &t.riccati_ratio_slack,
                      &t.bridge_symmetry, &t.bridge_psd, &t.certificate_margin,
                      &t.identity_residual_constant, &t.identity_residual_seeded,
                      &t.parametrix_flat_zero, &t.parametrix_convergence})
      *v *= factor;
    return t;
  }
};

// Machine-readable run summary.  Identical config and version reproduce every
// field except elapsed_seconds.
struct RunReport {
  std::string command;
  std::string tool_version = kToolVersion;
  std::vector<std::pair<std::string, std::string>> parameters;  // echoed config
  std::vector<std::string> profile_fingerprints;
  std::vector<CheckResult> checks;
  double elapsed_seconds = 0.0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["command"] = command;
    j["tool_version"] = tool_version;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : parameters) params[k] = v;
    j["parameters"] = std::move(params);
    j["profile_fingerprints"] = profile_fingerprints;
    nlohmann::ordered_json checks_json = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
      if (!c.pass && c.witness_label.empty())
        throw std::logic_error("failed check \"" + c.name + "\" carries no witness");
      nlohmann::ordered_json cj;
      cj["name"] = c.name;
      cj["status"] = c.pass ? "pass" : "fail";
      if (!c.witness_label.empty()) {
        cj["witness"] = {{"label", c.witness_label},
                         {"value", std::isnan(c.witness)
                                       ? nlohmann::ordered_json()
                                       : nlohmann::ordered_json(c.witness)}};
      }
      checks_json.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks_json);
    j["elapsed_seconds"] = elapsed_seconds;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot write \"" + path + "\"");
    f << to_json().dump(2) << '\n';
    if (!f) throw config_error("write failed for \"" + path + "\"");
  }
};

}  // namespace geolab
