#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "geolab/jacobi.hpp"

using Catch::Approx;
using namespace geolab;

namespace {
double rel_err(const MatrixXd& got, const MatrixXd& want) {
  return (got - want).norm() / std::max(1e-300, want.norm());
}
}  // namespace

TEST_CASE("zero-seeded field against closed forms", "[jacobi]") {
  SECTION("flat: X = t * Id, exact for RK4 up to roundoff") {
    const auto a = field_A(constant_profile(Dimension(3), 0.0), 5.0, 1e-3);
    REQUIRE(rel_err(a.evalX(5.0), 5.0 * MatrixXd::Identity(2, 2)) < 1e-12);
    REQUIRE(rel_err(a.evalX(2.34), 2.34 * MatrixXd::Identity(2, 2)) < 1e-12);
    REQUIRE(rel_err(a.eval(3.1).Xp, MatrixXd::Identity(2, 2)) < 1e-12);
  }
  SECTION("c=-1: X = sinh, X' = cosh") {
    const auto a = field_A(constant_profile(Dimension(2), -1.0), 10.0, 1e-3);
    for (double t : {0.5, 2.0, 2.37, 10.0}) {
      REQUIRE(a.evalX(t)(0, 0) == Approx(std::sinh(t)).epsilon(1e-8));
      REQUIRE(a.eval(t).Xp(0, 0) == Approx(std::cosh(t)).epsilon(1e-8));
    }
  }
  SECTION("c=-4: X = sinh(2t)/2") {
    const auto a = field_A(constant_profile(Dimension(2), -4.0), 4.0, 1e-3);
    REQUIRE(a.evalX(3.0)(0, 0) == Approx(std::sinh(6.0) / 2.0).epsilon(1e-8));
  }
  SECTION("backward ray, c=-1: X(-t) = -sinh(t)") {
    const auto a = field_A(constant_profile(Dimension(2), -1.0), -3.0, 1e-3);
    REQUIRE(a.t_front() == Approx(-3.0));
    REQUIRE(a.evalX(-3.0)(0, 0) == Approx(-std::sinh(3.0)).epsilon(1e-8));
    REQUIRE(a.evalX(-1.5)(0, 0) == Approx(-std::sinh(1.5)).epsilon(1e-8));
  }
  SECTION("seeded profile matches its diagonal oracle") {
    const auto p = seeded_profile({"0.2*(1-cos(t))", "0.1*(sin(t)-t)"}, 12.0);
    const auto a = field_A(p, 8.0, 1e-3);
    for (double t : {0.5, 2.0, 8.0}) {
      const VectorXd w = p.oracle_w(t);
      const MatrixXd want = w.asDiagonal();
      REQUIRE(rel_err(a.evalX(t), want) < 1e-6);
      const VectorXd wp = p.oracle_wp(t);
      REQUIRE(rel_err(a.eval(t).Xp, MatrixXd(wp.asDiagonal())) < 1e-6);
    }
  }
}

TEST_CASE("origin-seeded pair against closed forms", "[jacobi]") {
  SECTION("c=+1: J1 = cos") {
    const auto j1 = field_J1(constant_profile(Dimension(2), 1.0), 3.0, 1e-3);
    REQUIRE(j1.evalX(M_PI / 3.0)(0, 0) == Approx(0.5).margin(1e-9));
  }
  SECTION("c=-1: J1 = cosh, J2 = sinh") {
    const auto [j1, j2] = field_pair(constant_profile(Dimension(3), -1.0), 6.0, 1e-3);
    REQUIRE(j1.evalX(4.0)(0, 0) == Approx(std::cosh(4.0)).epsilon(1e-8));
    REQUIRE(j1.evalX(4.0)(0, 1) == Approx(0.0).margin(1e-10));
    REQUIRE(j2.evalX(4.0)(1, 1) == Approx(std::sinh(4.0)).epsilon(1e-8));
  }
}

TEST_CASE("integration is linear in the seed", "[jacobi]") {
  const auto p = seeded_profile({"0.3*sin(t)*tanh(t)^2"}, 10.0);
  const int m = 1;
  JacobiSeed s1{0.0, 0.3 * MatrixXd::Identity(m, m), 0.7 * MatrixXd::Identity(m, m)};
  JacobiSeed s2{0.0, -0.2 * MatrixXd::Identity(m, m), 0.4 * MatrixXd::Identity(m, m)};
  JacobiSeed s3{0.0, s1.X0 + 2.0 * s2.X0, s1.Xp0 + 2.0 * s2.Xp0};
  const auto x1 = integrate(p, s1, 3.0, 1e-3);
  const auto x2 = integrate(p, s2, 3.0, 1e-3);
  const auto x3 = integrate(p, s3, 3.0, 1e-3);
  const MatrixXd want = x1.evalX(3.0) + 2.0 * x2.evalX(3.0);
  REQUIRE(rel_err(x3.evalX(3.0), want) < 1e-12);
}

TEST_CASE("fourth-order convergence under step halving", "[jacobi]") {
  const auto p = constant_profile(Dimension(2), -1.0);
  auto err_at = [&](double h) {
    const auto a = field_A(p, 2.0, h);
    return std::abs(a.evalX(2.0)(0, 0) - std::sinh(2.0));
  };
  const double e1 = err_at(4e-3), e2 = err_at(2e-3);
  REQUIRE(e1 / e2 > 12.0);
  REQUIRE(e1 / e2 < 20.0);
}

TEST_CASE("wronskian conservation", "[jacobi]") {
  SECTION("canonical pair has W = Id") {
    const auto [j1, j2] = field_pair(constant_profile(Dimension(3), -1.0), 8.0, 1e-3);
    const MatrixXd w = wronskian(j1, j2, 5.0);
    REQUIRE(rel_err(w, MatrixXd::Identity(2, 2)) < 1e-9);
  }
  SECTION("self wronskian vanishes") {
    const auto a = field_A(constant_profile(Dimension(2), -1.0), 5.0, 1e-3);
    REQUIRE(op_norm(wronskian(a, a, 3.0)) < 1e-10);
  }
  SECTION("normalized drift stays below 1e-8 on a seeded profile") {
    const auto p = seeded_profile({"0.3*sin(t)*tanh(t)^2", "0.2*(1-cos(t))"}, 12.0);
    const auto [j1, j2] = field_pair(p, 10.0, 1e-3);
    const auto d = wronskian_drift(j1, j2);
    REQUIRE(d.normalized < 1e-8);
  }
  SECTION("profiles must match") {
    const auto a = field_A(constant_profile(Dimension(2), -1.0), 3.0, 1e-3);
    const auto b = field_A(constant_profile(Dimension(2), 0.0), 3.0, 1e-3);
    REQUIRE_THROWS_AS(wronskian(a, b, 2.0), config_error);
  }
}

TEST_CASE("conjugate point detection", "[jacobi]") {
  SECTION("c=+1 has its first conjugate point at pi") {
    const auto a = field_A(constant_profile(Dimension(2), 1.0), 4.0, 1e-3);
    const auto t = first_conjugate_time(a);
    REQUIRE(t.has_value());
    REQUIRE(*t == Approx(M_PI).margin(1e-6));
  }
  SECTION("multi-block positive curvature") {
    const auto a = field_A(constant_profile(Dimension(4), 1.0), 4.0, 1e-3);
    const auto t = first_conjugate_time(a);
    REQUIRE(t.has_value());
    REQUIRE(*t == Approx(M_PI).margin(1e-5));
  }
  SECTION("backward ray mirrors the conjugate point") {
    const auto a = field_A(constant_profile(Dimension(2), 1.0), -4.0, 1e-3);
    const auto t = first_conjugate_time(a);
    REQUIRE(t.has_value());
    REQUIRE(*t == Approx(-M_PI).margin(1e-5));
  }
  SECTION("nonpositive curvature has none") {
    REQUIRE_FALSE(first_conjugate_time(field_A(constant_profile(Dimension(2), -1.0), 10.0, 1e-3)));
    REQUIRE_FALSE(first_conjugate_time(field_A(constant_profile(Dimension(3), 0.0), 4.0, 1e-3)));
  }
}

TEST_CASE("integration error paths", "[jacobi]") {
  SECTION("overflow aborts with the last valid time") {
    bool threw = false;
    try {
      field_A(constant_profile(Dimension(2), -1e8), 10.0, 1e-3);
    } catch (const integration_error& e) {
      threw = true;
      REQUIRE(e.t_last > 0.0);
      REQUIRE(e.t_last < 10.0);
    }
    REQUIRE(threw);
  }
  SECTION("range beyond the working horizon is rejected") {
    const auto p = seeded_profile({"0"}, 5.0);
    REQUIRE_THROWS_AS(field_A(p, 8.0, 1e-3), config_error);
  }
  SECTION("dense queries outside the stored range are rejected") {
    const auto a = field_A(constant_profile(Dimension(2), 0.0), 2.0, 1e-3);
    REQUIRE_THROWS_AS(a.evalX(2.5), config_error);
  }
}
