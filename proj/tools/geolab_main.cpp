// Scenario runner for the geolab library: integrates profiles, sweeps
// geodesics, and emits deterministic CSV/JSON artifacts.  Exit codes:
//   0  every check passed
//   2  bad configuration (unknown keys, malformed values, empty axes)
//   3  numerical failure (conjugate point, divergence, enumeration cap)
//   4  a guaranteed bound came out falsified (implementation bug, or the
//      --inject-margin-offset fault used by the test suite)
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geolab/boundary.hpp"
#include "geolab/curvature.hpp"
#include "geolab/jacobi.hpp"
#include "geolab/metric.hpp"
#include "geolab/parametrix.hpp"
#include "geolab/profile_spec.hpp"
#include "geolab/random_profiles.hpp"
#include "geolab/report.hpp"
#include "geolab/riccati.hpp"
#include "geolab/weyl.hpp"

using namespace geolab;
namespace fs = std::filesystem;

namespace {

struct Global {
  std::string out_dir = ".";
  std::string config_path;
  int jobs = 1;
  double tol_scale = 1.0;
  std::uint64_t seed = 12345;
  Tolerances tol;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  std::string path(const std::string& name) const {
    return (fs::path(out_dir) / name).string();
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::vector<double> parse_grid(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : detail::split(text, ','))
    if (!part.empty()) out.push_back(detail::parse_double(part, what));
  if (out.empty()) throw config_error(what + ": empty list");
  return out;
}

std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 1) throw config_error("grid count must be >= 1");
  if (!(hi >= lo)) throw config_error("grid range is reversed");
  if (count == 1) return {hi};
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return g;
}

void emit_checks(const RunReport& rep) {
  for (const auto& c : rep.checks)
    std::printf("%s  %s (%s = %s)\n", c.pass ? "pass" : "FAIL", c.name.c_str(),
                c.witness_label.c_str(), fmt_g17(c.witness).c_str());
}

int finish(Global& g, RunReport& rep, const std::string& report_name) {
  rep.elapsed_seconds = g.elapsed();
  fs::create_directories(g.out_dir);
  rep.write(g.path(report_name));
  emit_checks(rep);
  return rep.all_pass() ? 0 : 4;
}

// ---------------------------------------------------------------- jacobi --

struct JacobiOpts {
  std::string profile;
  std::string seed_kind = "A";
  double t_max = 10.0;
  double step = 1e-3;
  std::string out;
};

int run_jacobi(Global& g, const JacobiOpts& o) {
  auto p = profile_from_spec(o.profile, std::max(20.0, o.t_max + 1.0));
  const JacobiTrajectory traj = o.seed_kind == "A" ? field_A(p, o.t_max, o.step)
                                : o.seed_kind == "J1"
                                    ? field_J1(p, o.t_max, o.step)
                                    : field_J2(p, o.t_max, o.step);
  const int m = p.block();
  CsvTable csv;
  csv.header.push_back("t");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      csv.header.push_back("X" + std::to_string(i) + std::to_string(j));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      csv.header.push_back("Xp" + std::to_string(i) + std::to_string(j));
  csv.header.push_back("detX");
  for (size_t idx = 0; idx < traj.grid.size(); ++idx) {
    std::vector<std::string> row;
    row.push_back(CsvTable::cell(traj.grid[idx]));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) row.push_back(CsvTable::cell(traj.X[idx](i, j)));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) row.push_back(CsvTable::cell(traj.Xp[idx](i, j)));
    row.push_back(CsvTable::cell(traj.X[idx].determinant()));
    csv.rows.push_back(std::move(row));
  }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("jacobi.csv") : o.out;
  csv.write(out);

  RunReport rep;
  rep.command = "jacobi";
  rep.parameters = {{"profile", o.profile},
                    {"seed", o.seed_kind},
                    {"t-max", fmt_g17(o.t_max)},
                    {"step", fmt_g17(o.step)},
                    {"out", out}};
  rep.profile_fingerprints = {profile_fingerprint(p)};
  bool finite = true;
  for (size_t idx = 0; idx < traj.grid.size() && finite; ++idx)
    finite = traj.X[idx].allFinite() && traj.Xp[idx].allFinite();
  rep.checks.push_back(
      {"states finite", finite, "rows", static_cast<double>(traj.grid.size())});
  return finish(g, rep, "jacobi_report.json");
}

// ---------------------------------------------------------------- bridge --

struct BridgeOpts {
  std::string profile;
  std::string s_grid;
  std::string t_grid = "0.1,0.5,1,2,5";
  double step = 1e-3;
  std::string out;
};

int run_bridge(Global& g, const BridgeOpts& o) {
  const auto s_values = parse_grid(o.s_grid, "bridge s grid");
  const auto t_values = parse_grid(o.t_grid, "bridge t grid");
  double max_s = 0.0, max_t = 0.0;
  for (double s : s_values) {
    if (!(s > 0)) throw config_error("bridge: s values must be positive");
    max_s = std::max(max_s, s);
  }
  for (double t : t_values) {
    if (!(t > 0)) throw config_error("bridge: t values must be positive");
    max_t = std::max(max_t, t);
  }

  auto p = profile_from_spec(o.profile, std::max({20.0, max_t + 1.0, max_s + 1.0}));
  BoundaryFields bf(p, -max_s, std::max(max_t, p.horizon), o.step);

  CsvTable csv;
  csv.header = {"s", "t", "lambda_min_N", "asymmetry_N", "norm_M", "tail_increment"};
  double worst_asym = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  for (double s : s_values) {
    const GrowthMatrix gm = bf.growth(s, 1e-8);
    const double norm_m = op_norm(gm.value);
    for (double t : t_values) {
      const BridgeMatrix br = bf.bridge(s, t);
      const double lmin = min_eigenvalue_sym(br.value);
      worst_asym = std::max(worst_asym, br.asymmetry / (1.0 + op_norm(br.value)));
      worst_eig = std::min(worst_eig, lmin);
      csv.rows.push_back({CsvTable::cell(s), CsvTable::cell(t), CsvTable::cell(lmin),
                          CsvTable::cell(br.asymmetry), CsvTable::cell(norm_m),
                          CsvTable::cell(gm.tail_increment)});
    }
  }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("bridge.csv") : o.out;
  csv.write(out);

  RunReport rep;
  rep.command = "bridge";
  rep.parameters = {{"profile", o.profile},
                    {"s-grid", o.s_grid},
                    {"t-grid", o.t_grid},
                    {"step", fmt_g17(o.step)},
                    {"out", out}};
  rep.profile_fingerprints = {profile_fingerprint(p)};
  rep.checks.push_back({"bridge symmetric", worst_asym <= g.tol.bridge_symmetry,
                        "worst relative asymmetry", worst_asym});
  rep.checks.push_back({"bridge positive semidefinite", worst_eig >= -g.tol.bridge_psd,
                        "smallest eigenvalue", worst_eig});
  return finish(g, rep, "bridge_report.json");
}

// ----------------------------------------------------------- theta-bound --

struct ThetaOpts {
  std::string profile;
  double s = 0.5;
  double t_min = -1.0;  // sentinel: defaults to 2 s
  double t_max = 10.0;
  int t_count = 17;
  double step = 1e-3;
  double inject = 0.0;
  std::string out;
};

int run_theta_bound(Global& g, const ThetaOpts& o) {
  const double t_lo = o.t_min > 0 ? o.t_min : 2.0 * o.s;
  auto p = profile_from_spec(o.profile, std::max(20.0, o.t_max + 1.0));
  auto cert = lower_bound_certificate(p, o.s, linspace(t_lo, o.t_max, o.t_count),
                                      o.step, g.tol.certificate_margin);
  if (o.inject != 0.0) {
    cert.worst_margin = std::numeric_limits<double>::infinity();
    for (auto& e : cert.entries) {
      e.margin += o.inject;
      if (e.margin < cert.worst_margin) {
        cert.worst_margin = e.margin;
        cert.worst_t = e.t;
      }
    }
    cert.falsified = cert.worst_margin < -g.tol.certificate_margin;
  }

  nlohmann::ordered_json cj;
  cj["schema_version"] = 1;
  cj["profile"] = cert.profile_id;
  cj["s"] = cert.s;
  cj["k"] = cert.k;
  cj["bridge_norm"] = cert.bridge_norm;
  cj["C"] = cert.C;
  cj["falsified"] = cert.falsified;
  cj["worst_margin"] = cert.worst_margin;
  cj["entries"] = nlohmann::ordered_json::array();
  CsvTable csv;
  csv.header = {"t", "vartheta", "rhs", "margin"};
  for (const auto& e : cert.entries) {
    cj["entries"].push_back({{"t", e.t},
                             {"vartheta", e.vartheta},
                             {"rhs", e.rhs},
                             {"margin", e.margin}});
    csv.rows.push_back({CsvTable::cell(e.t), CsvTable::cell(e.vartheta),
                        CsvTable::cell(e.rhs), CsvTable::cell(e.margin)});
  }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("theta_bound.csv") : o.out;
  csv.write(out);
  {
    std::ofstream f(g.path("theta_bound.json"), std::ios::binary);
    if (!f) throw config_error("cannot write certificate json");
    f << cj.dump(2) << '\n';
  }

  RunReport rep;
  rep.command = "theta-bound";
  rep.parameters = {{"profile", o.profile},
                    {"s", fmt_g17(o.s)},
                    {"t-min", fmt_g17(t_lo)},
                    {"t-max", fmt_g17(o.t_max)},
                    {"t-count", std::to_string(o.t_count)},
                    {"step", fmt_g17(o.step)},
                    {"out", out}};
  rep.profile_fingerprints = {profile_fingerprint(p)};
  rep.checks.push_back({"certificate margins nonnegative", !cert.falsified,
                        "worst margin", cert.worst_margin});
  rep.checks.push_back(
      {"uniform constant positive", cert.C > 0.0, "C", cert.C});
  return finish(g, rep, "theta_bound_report.json");
}

// ------------------------------------------------------------ parametrix --

struct ParametrixOpts {
  std::string model = "hyperbolic:n=2";
  std::string variant = "standard";
  int k_max = 3;
  double r_max = 8.0;
  int r_count = 1601;
  std::string out;
};

int run_parametrix(Global& g, const ParametrixOpts& o) {
  const auto colon = o.model.find(':');
  if (colon == std::string::npos)
    throw config_error("parametrix model must look like flat:n=3 or hyperbolic:n=2");
  const std::string kind = o.model.substr(0, colon);
  const auto [key, value] = detail::key_value(o.model.substr(colon + 1), o.model);
  if (key != "n") throw config_error("parametrix model: expected n=<int>");
  const int n = detail::parse_int(value, "parametrix model n");
  RadialModel rm;
  if (kind == "flat")
    rm = radial_flat(n);
  else if (kind == "hyperbolic")
    rm = radial_hyperbolic(n);
  else
    throw config_error("parametrix model kind must be flat or hyperbolic");
  if (o.r_count < 16) throw config_error("parametrix needs at least 16 grid points");

  const auto grid = uniform_grid(o.r_max, static_cast<size_t>(o.r_count));
  const CoefficientTable tab = o.variant == "standard"
                                   ? hadamard_coefficients(rm, o.k_max, grid)
                               : o.variant == "modified"
                                   ? modified_coefficients(rm, o.k_max, grid)
                                   : throw config_error(
                                         "variant must be standard or modified");

  CsvTable csv;
  csv.header.push_back("r");
  for (int k = 0; k <= o.k_max; ++k) csv.header.push_back("u_" + std::to_string(k));
  for (size_t i = 0; i < tab.r.size(); ++i) {
    std::vector<std::string> row{CsvTable::cell(tab.r[i])};
    for (int k = 0; k <= o.k_max; ++k) row.push_back(CsvTable::cell(tab.u[k][i]));
    csv.rows.push_back(std::move(row));
  }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("parametrix.csv") : o.out;
  csv.write(out);

  const auto fits = growth_fit(tab);
  bool envelopes_ok = true;
  double worst_excess = 0.0;
  for (const auto& f : fits) {
    if (f.all_zero) continue;
    envelopes_ok = envelopes_ok && std::isfinite(f.alpha) && std::isfinite(f.C) &&
                   f.C > 0.0 && std::isfinite(f.max_log_excess);
    worst_excess = std::max(worst_excess, f.max_log_excess);
  }

  RunReport rep;
  rep.command = "parametrix";
  rep.parameters = {{"model", o.model},
                    {"variant", o.variant},
                    {"k-max", std::to_string(o.k_max)},
                    {"r-max", fmt_g17(o.r_max)},
                    {"r-count", std::to_string(o.r_count)},
                    {"out", out}};
  rep.checks.push_back({"growth envelopes finite", envelopes_ok,
                        "worst log excess", worst_excess});
  if (kind == "flat" && o.variant == "standard" && o.k_max >= 1) {
    double worst = 0.0;
    for (int k = 1; k <= o.k_max; ++k)
      for (double v : tab.u[k]) worst = std::max(worst, std::abs(v));
    rep.checks.push_back({"flat coefficients vanish",
                          worst <= g.tol.parametrix_flat_zero, "max residual", worst});
  }
  return finish(g, rep, "parametrix_report.json");
}

// ------------------------------------------------------------------ weyl --

struct WeylOpts {
  std::string torus;
  double lambda_max = 0.0;
  int lambda_count = 50;
  double cap = 1e9;
  std::string out;
};

int run_weyl(Global& g, const WeylOpts& o) {
  if (o.torus.rfind("L=", 0) != 0)
    throw config_error("torus must look like L=<f>[,<f>...]");
  std::vector<double> lengths = parse_grid(o.torus.substr(2), "torus lengths");
  FlatTorusModel model(std::move(lengths));
  if (!(o.lambda_max > 0)) throw config_error("weyl needs lambda-max > 0");
  const auto grid =
      linspace(o.lambda_max / o.lambda_count, o.lambda_max, o.lambda_count);
  const CountResult res = remainder_diagnostic(model, grid, o.cap, g.jobs);

  CsvTable csv;
  csv.header = {"lambda", "count", "leading", "remainder", "ratio"};
  bool nondecreasing = true;
  for (size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && res.counts[i] < res.counts[i - 1]) nondecreasing = false;
    csv.rows.push_back({CsvTable::cell(res.lambda_grid[i]),
                        CsvTable::cell(res.counts[i]), CsvTable::cell(res.leading[i]),
                        CsvTable::cell(res.remainder[i]), CsvTable::cell(res.ratio[i])});
  }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("weyl.csv") : o.out;
  csv.write(out);

  bool ratios_finite = true;
  for (double r : res.ratio)
    if (!std::isnan(r) && !std::isfinite(r)) ratios_finite = false;

  RunReport rep;
  rep.command = "weyl";
  rep.parameters = {{"torus", o.torus},
                    {"lambda-max", fmt_g17(o.lambda_max)},
                    {"lambda-count", std::to_string(o.lambda_count)},
                    {"out", out}};
  rep.checks.push_back({"counts nondecreasing", nondecreasing, "points",
                        static_cast<double>(grid.size())});
  rep.checks.push_back(
      {"remainder ratio bounded", ratios_finite, "sup ratio", res.sup_ratio});
  return finish(g, rep, "weyl_report.json");
}

// ----------------------------------------------------------------- sweep --

struct SweepOpts {
  std::string metric_kind = "poincare-ball";
  int dim = 3;
  int n_flat = 1;
  int n_hyp = 2;
  int geodesics = 0;
  std::string s_grid;
  double t_max = 10.0;
  int t_count = 17;
  double step = 1e-3;
  double sample_step = 1e-2;
  std::string out;
};

int run_sweep(Global& g, const SweepOpts& o) {
  if (o.geodesics < 1) throw config_error("sweep: geodesic axis is empty");
  const auto s_values = parse_grid(o.s_grid, "sweep s grid");
  double max_s = 0.0;
  for (double s : s_values) {
    if (!(s > 0)) throw config_error("sweep: s values must be positive");
    max_s = std::max(max_s, s);
  }
  if (!(o.t_max > 2.0 * max_s))
    throw config_error("sweep: t-max must exceed twice the largest s");

  CoordinateMetric metric;
  if (o.metric_kind == "poincare-ball")
    metric = metric_poincare_ball(o.dim);
  else if (o.metric_kind == "euclidean")
    metric = metric_euclidean(o.dim);
  else if (o.metric_kind == "product-flat-hyperbolic")
    metric = metric_product_flat_hyperbolic(o.n_flat, o.n_hyp);
  else
    throw config_error("sweep metric must be poincare-ball, euclidean, or "
                       "product-flat-hyperbolic");
  const int n = metric.n;

  // geodesics drawn once, in order, from the seeded stream: the sweep is a
  // pure function of (metric, seed, axes)
  std::mt19937_64 rng(g.seed);
  const auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<GeodesicSpec> geos;
  for (int i = 0; i < o.geodesics; ++i) {
    GeodesicSpec geo;
    geo.x0 = VectorXd(n);
    for (int j = 0; j < n; ++j) geo.x0(j) = 0.5 * u01() - 0.25;
    VectorXd dir(n);
    double norm = 0.0;
    do {
      for (int j = 0; j < n; ++j) dir(j) = 2.0 * u01() - 1.0;
      norm = dir.norm();
    } while (norm < 0.1);
    geo.u0 = unit_tangent(metric, geo.x0, dir);
    geos.push_back(std::move(geo));
  }

  const double horizon = o.t_max + 1.0;
  enum class CellStatus { ok, conjugate, failed };
  struct Cell {
    CellStatus status = CellStatus::failed;
    double k = 0.0, bridge_norm = 0.0, C = 0.0, worst_margin = 0.0;
    bool falsified = false;
    std::string note;
  };
  const size_t cells_per_geo = s_values.size();
  std::vector<Cell> cells(geos.size() * cells_per_geo);
  std::vector<std::string> fingerprints(geos.size());

  const auto work = [&](size_t gi) {
    std::string geo_error;
    std::optional<CurvatureProfile> profile;
    try {
      auto data = profile_from_metric(metric, geos[gi], horizon, o.sample_step);
      profile.emplace(std::move(data.profile));
      profile->spec_string = detail::metric_spec_string(o.metric_kind, geos[gi].x0,
                                                        geos[gi].u0, horizon);
      fingerprints[gi] = profile_fingerprint(*profile);
    } catch (const std::exception& e) {
      geo_error = e.what();
    }
    for (size_t si = 0; si < cells_per_geo; ++si) {
      Cell& cell = cells[gi * cells_per_geo + si];
      if (!geo_error.empty()) {
        cell.note = geo_error;
        continue;
      }
      const double s = s_values[si];
      try {
        const auto cert =
            lower_bound_certificate(*profile, s, linspace(2.0 * s, o.t_max, o.t_count),
                                    o.step, g.tol.certificate_margin);
        cell.status = CellStatus::ok;
        cell.k = cert.k;
        cell.bridge_norm = cert.bridge_norm;
        cell.C = cert.C;
        cell.worst_margin = cert.worst_margin;
        cell.falsified = cert.falsified;
      } catch (const conjugate_point_error& e) {
        cell.status = CellStatus::conjugate;
        cell.note = e.what();
      } catch (const std::exception& e) {
        cell.note = e.what();
      }
    }
  };

  const size_t workers = std::min<size_t>(std::max(g.jobs, 1), geos.size());
  if (workers <= 1) {
    for (size_t gi = 0; gi < geos.size(); ++gi) work(gi);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (size_t gi = w; gi < geos.size(); gi += workers) work(gi);
      });
    for (auto& t : pool) t.join();
  }

  CsvTable csv;
  csv.header = {"geodesic", "s", "k", "bridge_norm", "C", "worst_margin", "status"};
  double min_margin = std::numeric_limits<double>::infinity();
  double min_C = std::numeric_limits<double>::infinity();
  int failed = 0;
  bool falsified = false;
  for (size_t gi = 0; gi < geos.size(); ++gi)
    for (size_t si = 0; si < cells_per_geo; ++si) {
      const Cell& cell = cells[gi * cells_per_geo + si];
      const char* status = cell.status == CellStatus::ok        ? "ok"
                           : cell.status == CellStatus::conjugate ? "conjugate-point"
                                                                  : "error";
      if (cell.status == CellStatus::ok) {
        min_margin = std::min(min_margin, cell.worst_margin);
        min_C = std::min(min_C, cell.C);
        falsified = falsified || cell.falsified;
        csv.rows.push_back({CsvTable::cell(static_cast<std::int64_t>(gi)),
                            CsvTable::cell(s_values[si]), CsvTable::cell(cell.k),
                            CsvTable::cell(cell.bridge_norm), CsvTable::cell(cell.C),
                            CsvTable::cell(cell.worst_margin), status});
      } else {
        ++failed;
        csv.rows.push_back({CsvTable::cell(static_cast<std::int64_t>(gi)),
                            CsvTable::cell(s_values[si]), "", "", "", "", status});
      }
    }
  fs::create_directories(g.out_dir);
  const std::string out = o.out.empty() ? g.path("sweep.csv") : o.out;
  csv.write(out);

  RunReport rep;
  rep.command = "sweep";
  rep.parameters = {{"metric", o.metric_kind},
                    {"dim", std::to_string(o.dim)},
                    {"geodesics", std::to_string(o.geodesics)},
                    {"s-grid", o.s_grid},
                    {"t-max", fmt_g17(o.t_max)},
                    {"t-count", std::to_string(o.t_count)},
                    {"seed", std::to_string(g.seed)},
                    {"jobs", std::to_string(g.jobs)},
                    {"out", out}};
  rep.profile_fingerprints = fingerprints;
  rep.checks.push_back({"all cells completed", failed == 0, "failed cells",
                        static_cast<double>(failed)});
  rep.checks.push_back({"certificate margins nonnegative", !falsified,
                        "min margin", min_margin});
  rep.checks.push_back({"uniform constant positive",
                        min_C > 0.0 && std::isfinite(min_C), "min C", min_C});
  rep.elapsed_seconds = g.elapsed();
  rep.write(g.path("sweep_report.json"));
  emit_checks(rep);
  if (falsified) return 4;
  if (failed > 0) return 3;
  return rep.all_pass() ? 0 : 4;
}

// -------------------------------------------------------------- selftest --

int run_selftest(Global& g) {
  RunReport rep;
  rep.command = "selftest";
  const auto add = [&rep](const std::string& name, bool pass,
                          const std::string& label, double witness) {
    rep.checks.push_back({name, pass, label, witness});
  };

  {
    auto p = constant_profile(Dimension(3), 0.0);
    const auto a = field_A(p, 2.0, 1e-3);
    const double err = op_norm(MatrixXd(a.eval(2.0).X - 2.0 * MatrixXd::Identity(2, 2)));
    add("flat zero-seeded field is linear", err <= g.tol.closed_form_rel,
        "deviation at t=2", err);
  }
  {
    auto p = constant_profile(Dimension(2), -1.0);
    const auto a = field_A(p, 3.0, 1e-3);
    const double err = std::abs(a.det_at(2.0) - std::sinh(2.0)) / std::sinh(2.0);
    add("hyperbolic density matches sinh", err <= g.tol.closed_form_rel,
        "relative error at t=2", err);
  }
  {
    auto p = constant_profile(Dimension(2), 1.0);
    const auto a = field_A(p, 4.0, 1e-3);
    const auto tc = first_conjugate_time(a);
    const double err = tc ? std::abs(*tc - std::numbers::pi) : 1.0;
    add("unit sphere conjugate point sits at pi", err <= 1e-6, "deviation", err);
  }
  {
    auto p = constant_profile(Dimension(2), -1.0);
    const auto rt = riccati_from(field_A(p, 3.0, 1e-3), 0.5, 3.0);
    const auto chk = riccati_bound_check(rt, 1.0, {0.5, 1.0, 2.0, 3.0});
    const double err = std::abs(chk.max_ratio - 1.0);
    add("riccati bound saturates at constant curvature",
        err <= g.tol.riccati_ratio_slack, "deviation of max ratio from 1", err);
  }
  {
    auto p = constant_profile(Dimension(2), -1.0);
    const auto cert =
        lower_bound_certificate(p, 0.5, linspace(1.0, 10.0, 19), 1e-3,
                                g.tol.certificate_margin);
    double dev = std::abs(cert.bridge_norm - 4.3280);
    for (const auto& e : cert.entries)
      if (std::abs(e.t - 2.0) < 1e-9) {
        dev = std::max(dev, std::abs(e.rhs - 2.9965));
        dev = std::max(dev, std::abs(e.vartheta_inv - 0.2757));
      }
    add("certificate reproduces the pinned cell",
        !cert.falsified && dev <= 1e-4, "worst deviation", dev);
  }
  {
    const auto tab = hadamard_coefficients(radial_flat(2), 2, uniform_grid(6.0, 601));
    double worst = 0.0;
    for (int k = 1; k <= 2; ++k)
      for (double v : tab.u[k]) worst = std::max(worst, std::abs(v));
    add("flat parametrix coefficients vanish", worst <= g.tol.parametrix_flat_zero,
        "max residual", worst);
  }
  {
    const auto tab = modified_coefficients(radial_hyperbolic(2), 0, uniform_grid(6.0, 601));
    double worst = 0.0;
    for (double v : tab.u[0]) worst = std::max(worst, std::abs(v - 1.0));
    add("modified leading coefficient is one", worst <= g.tol.parametrix_flat_zero,
        "max residual", worst);
  }
  {
    const auto n = count_eigenvalues(FlatTorusModel({2.0 * std::numbers::pi,
                                                     2.0 * std::numbers::pi}),
                                     5.0);
    add("square torus count is exact", n == 81, "count", static_cast<double>(n));
  }
  return finish(g, rep, "selftest_report.json");
}

// ------------------------------------------------------------ dispatcher --

int dispatch(std::vector<std::string> args, bool allow_config);

// Scenario files carry the same keys as the flags; they are replayed through
// the regular parser so validation cannot drift between the two paths.
std::vector<std::string> args_from_config(const std::string& path,
                                          const std::string& argv0) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config \"" + path + "\"");
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("config \"" + path + "\": " + e.what());
  }
  if (!j.is_object() || !j.contains("command") || !j["command"].is_string())
    throw config_error("config needs a string \"command\"");
  detail::reject_unknown_keys(
      j, {"command", "parameters", "out-dir", "jobs", "tol-scale", "seed"}, "config");

  const auto to_text = [](const nlohmann::ordered_json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return fmt_g17(v.get<double>());
    if (v.is_array()) {
      std::string s;
      for (const auto& item : v) {
        if (!item.is_number()) throw config_error("config arrays must hold numbers");
        if (!s.empty()) s += ',';
        s += item.is_number_integer() ? std::to_string(item.get<long long>())
                                      : fmt_g17(item.get<double>());
      }
      return s;
    }
    throw config_error("config values must be scalars or numeric arrays");
  };

  std::vector<std::string> args{argv0};
  for (const char* key : {"out-dir", "jobs", "tol-scale", "seed"})
    if (j.contains(key)) {
      args.push_back(std::string("--") + key);
      args.push_back(to_text(j[key]));
    }
  args.push_back(j["command"].get<std::string>());
  if (j.contains("parameters")) {
    if (!j["parameters"].is_object())
      throw config_error("config \"parameters\" must be an object");
    for (const auto& item : j["parameters"].items()) {
      args.push_back("--" + item.key());
      args.push_back(to_text(item.value()));
    }
  }
  return args;
}

int dispatch(std::vector<std::string> args, bool allow_config) {
  CLI::App app{"desk-scale toolkit for Jacobi fields, Riccati comparison bounds, "
               "volume-density certificates, radial expansion coefficients, and "
               "flat-torus eigenvalue counts"};
  app.require_subcommand(0, 1);
  app.fallthrough();  // global flags may follow the subcommand name

  Global g;
  app.add_option("--out-dir", g.out_dir, "directory for CSV/JSON artifacts")
      ->envname("GEOLAB_OUT_DIR");
  app.add_option("--jobs", g.jobs, "concurrent workers for sweeps and grids")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol-scale", g.tol_scale, "multiply every tolerance knob");
  app.add_option("--seed", g.seed, "random stream for generated geodesics");
  if (allow_config)
    app.add_option("--config", g.config_path, "run a JSON scenario file");

  JacobiOpts jo;
  auto* jacobi = app.add_subcommand("jacobi", "integrate one field and dump it");
  jacobi->add_option("--profile", jo.profile, "profile spec")->required();
  jacobi->add_option("--seed", jo.seed_kind, "initial condition")
      ->check(CLI::IsMember({"A", "J1", "J2"}));
  jacobi->add_option("--t-max", jo.t_max, "integration horizon");
  jacobi->add_option("--step", jo.step, "integrator step");
  jacobi->add_option("--out", jo.out, "CSV path");

  BridgeOpts bo;
  auto* bridge = app.add_subcommand("bridge", "two-sided slope differences");
  bridge->add_option("--profile", bo.profile, "profile spec")->required();
  bridge->add_option("--s-grid", bo.s_grid, "comma list of s > 0")->required();
  bridge->add_option("--t-grid", bo.t_grid, "comma list of t > 0");
  bridge->add_option("--step", bo.step, "integrator step");
  bridge->add_option("--out", bo.out, "CSV path");

  ThetaOpts to;
  auto* theta = app.add_subcommand("theta-bound", "volume-density lower bound");
  theta->add_option("--profile", to.profile, "profile spec")->required();
  theta->add_option("--s", to.s, "bridge offset s > 0");
  theta->add_option("--t-min", to.t_min, "first sample (default 2 s)");
  theta->add_option("--t-max", to.t_max, "last sample");
  theta->add_option("--t-count", to.t_count, "number of samples");
  theta->add_option("--step", to.step, "integrator step");
  theta->add_option("--inject-margin-offset", to.inject,
                    "testing fault: shift every margin by this amount");
  theta->add_option("--out", to.out, "CSV path");

  ParametrixOpts po;
  auto* param = app.add_subcommand("parametrix", "radial expansion coefficients");
  param->add_option("--model", po.model, "flat:n=<int> or hyperbolic:n=<int>");
  param->add_option("--k-max", po.k_max, "highest coefficient order");
  param->add_option("--r-max", po.r_max, "radial horizon");
  param->add_option("--r-count", po.r_count, "grid points");
  param->add_option("--variant", po.variant, "standard or modified")
      ->check(CLI::IsMember({"standard", "modified"}));
  param->add_option("--out", po.out, "CSV path");

  WeylOpts wo;
  auto* weyl = app.add_subcommand("weyl", "torus eigenvalue counting");
  weyl->add_option("--torus", wo.torus, "L=<f>[,<f>...] side lengths")->required();
  weyl->add_option("--lambda-max", wo.lambda_max, "largest lambda")->required();
  weyl->add_option("--lambda-count", wo.lambda_count, "grid points");
  weyl->add_option("--cap", wo.cap, "enumeration point cap");
  weyl->add_option("--out", wo.out, "CSV path");

  SweepOpts so;
  auto* sweep = app.add_subcommand("sweep", "certificate over random geodesics x s");
  sweep->add_option("--metric", so.metric_kind,
                    "poincare-ball, euclidean, or product-flat-hyperbolic");
  sweep->add_option("--dim", so.dim, "manifold dimension");
  sweep->add_option("--n-flat", so.n_flat, "product factor: flat dimension");
  sweep->add_option("--n-hyp", so.n_hyp, "product factor: hyperbolic dimension");
  sweep->add_option("--geodesics", so.geodesics, "geodesic axis length")->required();
  sweep->add_option("--s-grid", so.s_grid, "comma list of s > 0")->required();
  sweep->add_option("--t-max", so.t_max, "certificate horizon");
  sweep->add_option("--t-count", so.t_count, "samples per cell");
  sweep->add_option("--step", so.step, "integrator step");
  sweep->add_option("--sample-step", so.sample_step, "curvature sampling step");
  sweep->add_option("--out", so.out, "CSV path");

  auto* selftest = app.add_subcommand("selftest", "bundled closed-form suite");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!g.config_path.empty()) {
    if (app.get_subcommands().size() > 0)
      throw config_error("--config replaces the subcommand; give one or the other");
    return dispatch(args_from_config(g.config_path, args.front()), false);
  }

  g.tol = Tolerances{}.scaled(g.tol_scale);
  if (jacobi->parsed()) return run_jacobi(g, jo);
  if (bridge->parsed()) return run_bridge(g, bo);
  if (theta->parsed()) return run_theta_bound(g, to);
  if (param->parsed()) return run_parametrix(g, po);
  if (weyl->parsed()) return run_weyl(g, wo);
  if (sweep->parsed()) return run_sweep(g, so);
  if (selftest->parsed()) return run_selftest(g);
  std::fputs(app.help().c_str(), stderr);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return dispatch(std::move(args), true);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const conjugate_point_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const integration_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const enumeration_cap_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
}
