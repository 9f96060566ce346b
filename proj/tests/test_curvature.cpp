#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "geolab/curvature.hpp"

using Catch::Approx;
using namespace geolab;

TEST_CASE("constant profiles", "[curvature]") {
  SECTION("flat n=2") {
    const auto p = constant_profile(Dimension(2), 0.0);
    REQUIRE(p.block() == 1);
    REQUIRE(p.evaluate(1.7)(0, 0) == 0.0);
    REQUIRE(p.k_max == 0.0);
    REQUIRE(p.k_lower == 0.0);
  }
  SECTION("n=3 c=-1") {
    const auto p = constant_profile(Dimension(3), -1.0);
    const MatrixXd k = p.evaluate(2.0);
    REQUIRE(k.rows() == 2);
    REQUIRE(k(0, 0) == Approx(-1.0));
    REQUIRE(k(0, 1) == Approx(0.0));
    REQUIRE(p.k_lower == Approx(1.0));
    REQUIRE(p.k_max == Approx(1.0));
  }
  SECTION("positive curvature has k_lower = 0") {
    const auto p = constant_profile(Dimension(2), 1.0);
    REQUIRE(p.k_lower == 0.0);
    REQUIRE(p.k_max == Approx(1.0));
  }
  SECTION("even in t") {
    const auto p = constant_profile(Dimension(4), -2.5);
    REQUIRE((p.evaluate(-3.0) - p.evaluate(3.0)).norm() == 0.0);
  }
}

TEST_CASE("dimension must be at least 2", "[curvature]") {
  REQUIRE_THROWS_AS(Dimension(1), config_error);
  REQUIRE_THROWS_AS(Dimension(0), config_error);
}

TEST_CASE("seeded diagonal profiles", "[curvature]") {
  SECTION("phi = 0 gives the flat line") {
    const auto p = seeded_profile({"0"});
    REQUIRE(p.block() == 1);
    for (double t : {0.0, 0.3, 2.0, 9.0}) {
      REQUIRE(p.evaluate(t)(0, 0) == Approx(0.0).margin(1e-12));
      if (t > 0) REQUIRE(p.oracle_w(t)(0) == Approx(t).epsilon(1e-14));
    }
  }
  SECTION("phi = log(sinh(t)/t) gives constant curvature -1") {
    const auto p = seeded_profile({"log(sinh(t)/t)"}, 12.0);
    for (double t : {1e-4, 0.01, 0.1, 0.5, 1.0, 3.0, 10.0})
      REQUIRE(p.evaluate(t)(0, 0) == Approx(-1.0).margin(1e-6));
    for (double t : {0.1, 1.0, 5.0}) {
      REQUIRE(p.oracle_w(t)(0) == Approx(std::sinh(t)).epsilon(1e-12));
      REQUIRE(p.oracle_wp(t)(0) == Approx(std::cosh(t)).epsilon(1e-12));
    }
    REQUIRE(p.k_lower == Approx(1.0).margin(1e-6));
  }
  SECTION("sign-changing curvature") {
    const auto p = seeded_profile({"0.3*sin(t)*tanh(t)^2"}, 12.0);
    int sign_changes = 0;
    double prev = p.evaluate(0.5)(0, 0);
    for (double t = 0.6; t <= 10.0; t += 0.1) {
      const double v = p.evaluate(t)(0, 0);
      if (std::signbit(v) != std::signbit(prev) && std::abs(v) > 1e-8) ++sign_changes;
      prev = v;
    }
    REQUIRE(sign_changes >= 2);
    REQUIRE(p.k_lower > 0.0);
    REQUIRE(p.k_max >= p.k_lower * p.k_lower);
  }
  SECTION("multi-direction profile is diagonal with the listed entries") {
    const auto p = seeded_profile({"0.2*(1-cos(t))", "0.1*(sin(t)-t)"});
    REQUIRE(p.block() == 2);
    const MatrixXd k = p.evaluate(1.3);
    REQUIRE(k(0, 1) == 0.0);
    REQUIRE(k(1, 0) == 0.0);
    const VectorXd w = p.oracle_w(2.0);
    REQUIRE(w(0) == Approx(2.0 * std::exp(0.2 * (1 - std::cos(2.0)))).epsilon(1e-13));
  }
  SECTION("even extension") {
    const auto p = seeded_profile({"0.2*(1-cos(t))"});
    REQUIRE(p.evaluate(-1.7)(0, 0) == Approx(p.evaluate(1.7)(0, 0)).epsilon(1e-14));
  }
  SECTION("seeds violating phi(0)=phi'(0)=0 are rejected") {
    REQUIRE_THROWS_AS(seeded_profile({"t"}), config_error);
    REQUIRE_THROWS_AS(seeded_profile({"1+t^2"}), config_error);
    REQUIRE_THROWS_AS(seeded_profile({"log(t)"}), config_error);
    REQUIRE_THROWS_AS(seeded_profile({"sin(t)"}), config_error);
  }
}

TEST_CASE("bound estimation", "[curvature]") {
  SECTION("constant closed forms") {
    const auto b = estimate_bounds(constant_profile(Dimension(3), -4.0), 1e-2);
    REQUIRE(b.k_lower == Approx(2.0));
    REQUIRE(b.k_max == Approx(4.0));
    const auto b0 = estimate_bounds(constant_profile(Dimension(2), 0.0), 1e-2);
    REQUIRE(b0.k_lower == 0.0);
    REQUIRE(b0.k_max == 0.0);
  }
  SECTION("diagonal fast path agrees with the matrix scan") {
    auto p = seeded_profile({"0.3*sin(t)*tanh(t)^2", "0.2*(1-cos(t))"}, 10.0);
    const auto fast = estimate_bounds(p, 1e-2);
    p.eval_min_absmax = nullptr;  // force the eigenvalue path
    const auto slow = estimate_bounds(p, 1e-2);
    REQUIRE(fast.k_lower == Approx(slow.k_lower).margin(1e-12));
    REQUIRE(fast.k_max == Approx(slow.k_max).margin(1e-12));
  }
}

TEST_CASE("sampled profiles interpolate cubically", "[curvature]") {
  const int m = 2;
  std::vector<double> ts;
  std::vector<MatrixXd> ks;
  for (double t = 0.0; t <= 10.0 + 1e-12; t += 0.01) {
    ts.push_back(t);
    ks.push_back(-std::cos(t) * MatrixXd::Identity(m, m));
  }
  const auto p = profile_from_samples(Dimension(3), ts, ks, "samples:test");
  SECTION("values") {
    for (double t : {0.005, 0.5, 2.5, 7.77, 9.995})
      REQUIRE(p.evaluate(t)(0, 0) == Approx(-std::cos(t)).margin(1e-8));
  }
  SECTION("even extension when samples start at 0") {
    REQUIRE(p.evaluate(-2.5)(0, 0) == Approx(p.evaluate(2.5)(0, 0)));
  }
  SECTION("bounds from the scan") {
    REQUIRE(p.k_lower == Approx(1.0).margin(1e-3));
    REQUIRE(p.k_max == Approx(1.0).margin(1e-3));
  }
  SECTION("asymmetric samples are symmetrized") {
    std::vector<MatrixXd> bad = ks;
    for (auto& k : bad) k(0, 1) += 0.2;
    const auto q = profile_from_samples(Dimension(3), ts, bad, "samples:asym");
    const MatrixXd k = q.evaluate(1.0);
    REQUIRE(k(0, 1) == Approx(k(1, 0)));
    REQUIRE(k(0, 1) == Approx(0.1).margin(1e-8));
  }
  SECTION("bad inputs") {
    std::vector<double> tbad = ts;
    tbad[5] += 0.004;
    REQUIRE_THROWS_AS(profile_from_samples(Dimension(3), tbad, ks, "x"), config_error);
    REQUIRE_THROWS_AS(profile_from_samples(Dimension(2), ts, ks, "x"), config_error);
  }
}
