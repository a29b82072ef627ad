#include <doctest.h>

#include <cmath>

#include "jcpulse/compiler.hpp"
#include "jcpulse/model.hpp"
#include "jcpulse/rng.hpp"
#include "jcpulse/simulator.hpp"

using namespace jcpulse;

namespace {

Mat embed(int n, int pair, const Eigen::Matrix2cd& g) {
  Mat u = Mat::Identity(n, n);
  u.block<2, 2>(pair, pair) = g;
  return u;
}

Mat reconstruct(int n, const std::vector<TwoLevelFactor>& fs) {
  Mat u = Mat::Identity(n, n);
  for (const TwoLevelFactor& f : fs) u = u * embed(n, f.pair, f.g).adjoint();
  return u;
}

Eigen::Matrix2cd euler_matrix(double a, double b, double c) {
  Eigen::Matrix2cd y, x, z;
  y << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
  x << std::cos(b), cx(0, std::sin(b)), cx(0, std::sin(b)), std::cos(b);
  z << std::exp(cx(0, c)), 0, 0, std::exp(cx(0, -c));
  return y * x * z;
}

}  // namespace

TEST_CASE("two-level decomposition closes on special unitaries") {
  for (const int n : {4, 6, 10}) {
    const Mat u = random_su(n, 1000 + n);
    double residual = 0.0;
    const auto fs = two_level_decompose(u, &residual);
    CHECK(residual < 1e-10);
    for (const auto& f : fs) {
      CHECK(f.pair >= 0);
      CHECK(f.pair + 1 < n);
      CHECK((f.g.adjoint() * f.g - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
    }
    CHECK((reconstruct(n, fs) - u).norm() < 1e-9);
  }
}

TEST_CASE("decomposition of a diagonal target uses only phase factors") {
  const int n = 4;
  Mat u = Mat::Identity(n, n);
  u(0, 0) = std::exp(cx(0, 0.4));
  u(1, 1) = std::exp(cx(0, -0.9));
  u(2, 2) = std::exp(cx(0, 0.5));
  u(3, 3) = cx(1, 0) / (u(0, 0) * u(1, 1) * u(2, 2));
  double residual = 0.0;
  const auto fs = two_level_decompose(u, &residual);
  CHECK(residual < 1e-12);
  for (const auto& f : fs) {
    CHECK(std::abs(f.g(0, 1)) == 0.0);
    CHECK(std::abs(f.g(1, 0)) == 0.0);
  }
  CHECK((reconstruct(n, fs) - u).norm() < 1e-12);
}

TEST_CASE("euler split solves random two-level blocks") {
  for (int trial = 0; trial < 500; ++trial) {
    const Mat su = random_su(2, 5000 + trial);
    Eigen::Matrix2cd g = su;
    const EulerAngles e = euler_yxz(g);
    CHECK(e.err < 1e-10);
    CHECK((euler_matrix(e.a, e.b, e.c) - g).norm() < 1e-9);
  }
}

TEST_CASE("euler split keeps pure rotations pure") {
  const EulerAngles id = euler_yxz(Eigen::Matrix2cd::Identity());
  CHECK(std::fabs(id.a) < 1e-12);
  CHECK(std::fabs(id.b) < 1e-12);
  CHECK(std::fabs(id.c) < 1e-12);

  const EulerAngles y = euler_yxz(euler_matrix(0.7, 0, 0));
  CHECK(y.a == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(std::fabs(y.b) < 1e-12);
  CHECK(std::fabs(y.c) < 1e-12);

  const EulerAngles x = euler_yxz(euler_matrix(0, 0.5, 0));
  CHECK(std::fabs(x.a) < 1e-12);
  CHECK(x.b == doctest::Approx(0.5).epsilon(1e-10));

  const EulerAngles z = euler_yxz(euler_matrix(0, 0, 0.3));
  CHECK(std::fabs(z.b) < 1e-12);
  CHECK(z.c == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("native single-pulse targets compile to one pulse") {
  const TruncatedSpace bare{1, 0};
  const TruncatedSpace buffered{1, 1};

  const Mat ident = builtin_target("identity", 4);
  const CompilationResult rid = compile(ident, 1, 1e-3, 1000, 1'000'000);
  CHECK(rid.complete);
  CHECK(rid.pulses.empty());
  CHECK(rid.predicted_fidelity == 1.0);

  const ControlPulse cp = carrier_pulse(0.4, 1.1);
  const CompilationResult rc = compile(pulse_unitary(bare, cp), 1, 1e-3, 1000, 1'000'000);
  CHECK(rc.complete);
  REQUIRE(rc.pulses.size() == 1);
  CHECK(rc.pulses[0].channel == Channel::carrier);
  CHECK(rc.pulses[0].theta == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(rc.pulses[0].phi == doctest::Approx(1.1).epsilon(1e-10));

  for (const long long k : {17LL, 99LL}) {  // even and odd boundary signs
    const ControlPulse rp = restricted_red_pulse(buffered, k, 0.9);
    const Mat target = pulse_unitary(buffered, rp).topLeftCorner(4, 4);
    const CompilationResult rr = compile(target, 1, 1e-3, 1000, 1'000'000);
    CHECK(rr.complete);
    REQUIRE(rr.pulses.size() == 1);
    REQUIRE(rr.pulses[0].restricted());
    CHECK(*rr.pulses[0].restricted_k == k);
  }
}

TEST_CASE("random four-level targets compile within tolerance") {
  const TruncatedSpace space{1, 1};
  for (const std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const Mat target = random_su(4, seed);
    const CompilationResult r = compile(target, 1, 1e-3, 2'000'000, 10'000'000);
    REQUIRE(r.complete);
    CHECK(r.total_error_bound <= 1e-3 * (1 + 1e-9));
    CHECK(r.predicted_fidelity >= 1.0 - 1e-3);

    const Mat achieved = apply_sequence(space, r.pulses).topLeftCorner(4, 4);
    CHECK(operator_distance(achieved, target) <= r.total_error_bound + 1e-9);
    CHECK(fidelity(achieved, target) >= 0.999);
    CHECK(leakage_norm(apply_sequence(space, r.pulses), space) == 0.0);

    int from_factors = 0;
    for (const FactorRecord& f : r.factors) from_factors += f.pulse_count;
    CHECK(from_factors == static_cast<int>(r.pulses.size()));
  }
}

TEST_CASE("builtin targets compile on the four-level block") {
  const TruncatedSpace space{1, 1};
  for (const char* name : {"swap01", "fourier"}) {
    const Mat target = builtin_target(name, 4);
    const CompilationResult r = compile(target, 1, 1e-3, 2'000'000, 10'000'000);
    REQUIRE(r.complete);
    const Mat achieved = apply_sequence(space, r.pulses).topLeftCorner(4, 4);
    CHECK(fidelity(achieved, target) >= 0.999);
  }
}

TEST_CASE("exhausted pulse budget is reported, with the prefix kept") {
  const CompilationResult r = compile(random_su(4, 9), 1, 1e-3, 10, 10'000'000);
  CHECK(!r.complete);
  CHECK(!r.diagnostic.empty());
  CHECK(r.diagnostic.find("budget") != std::string::npos);
  CHECK(!r.factors.empty());
}

TEST_CASE("ten-level targets fail honestly at modest scan bounds") {
  const CompilationResult r = compile(random_su(10, 4), 4, 1e-2, 500'000, 100'000);
  CHECK(!r.complete);
  CHECK(!r.diagnostic.empty());
  CHECK(r.diagnostic.find("pair") != std::string::npos);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(builtin_target("nope", 4), std::invalid_argument);
  CHECK_THROWS_AS(compile(Mat::Ones(4, 4), 1, 1e-3, 100, 1000), std::invalid_argument);
  CHECK_THROWS_AS(compile(Mat::Identity(6, 6), 1, 1e-3, 100, 1000), std::invalid_argument);
  CHECK_THROWS_AS(compile(Mat::Identity(4, 4), 1, 0.0, 100, 1000), std::invalid_argument);
}
