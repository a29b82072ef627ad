#include <doctest.h>

#include <cmath>
#include <random>

#include "jcpulse/model.hpp"
#include "jcpulse/simulator.hpp"

using namespace jcpulse;

namespace {

std::vector<ControlPulse> random_sequence(const TruncatedSpace& space, int count,
                                          std::uint64_t seed, bool restricted_only) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  std::uniform_int_distribution<long long> kdist(1, 500);
  std::uniform_int_distribution<int> coin(0, 2);
  std::vector<ControlPulse> seq;
  seq.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int kind = restricted_only ? (i % 2) : coin(rng);
    if (kind == 0) {
      seq.push_back(carrier_pulse(angle(rng), angle(rng)));
    } else if (kind == 1 || restricted_only) {
      seq.push_back(restricted_red_pulse(space, kdist(rng), angle(rng)));
    } else {
      seq.push_back(red_pulse(angle(rng), angle(rng)));
    }
  }
  return seq;
}

}  // namespace

TEST_CASE("empty sequence is the identity") {
  const TruncatedSpace space{3, 2};
  const Mat u = apply_sequence(space, {});
  CHECK((u - Mat::Identity(space.dim(), space.dim())).norm() == 0.0);
}

TEST_CASE("pulses compose right to left") {
  const TruncatedSpace space{2, 1};
  const ControlPulse a = carrier_pulse(0.3, 0.1);
  const ControlPulse b = red_pulse(0.7, 1.2);
  const Mat ua = pulse_unitary(space, a);
  const Mat ub = pulse_unitary(space, b);
  const Mat u = apply_sequence(space, {a, b});
  CHECK((u - ub * ua).norm() < 1e-15);
  CHECK((u - ua * ub).norm() > 1e-3);  // the order genuinely matters here
}

TEST_CASE("carrier pulses never leak") {
  const TruncatedSpace space{3, 2};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  std::vector<ControlPulse> seq;
  for (int i = 0; i < 50; ++i) seq.push_back(carrier_pulse(angle(rng), angle(rng)));
  CHECK(leakage_norm(apply_sequence(space, seq), space) == 0.0);
}

TEST_CASE("restricted pulses keep leakage at exactly zero") {
  const TruncatedSpace space{4, 1};
  const auto seq = random_sequence(space, 10000, 7, /*restricted_only=*/true);
  const Mat u = apply_sequence(space, seq);
  CHECK(leakage_norm(u, space) == 0.0);
  // and the product stays numerically unitary over 10^4 factors
  const Mat defect = u.adjoint() * u - Mat::Identity(space.dim(), space.dim());
  CHECK(defect.norm() < 1e-11);
}

TEST_CASE("an unrestricted red pulse leaks by sin of the boundary angle") {
  const TruncatedSpace space{1, 1};
  const Mat u = apply_sequence(space, {red_pulse(0.3, 0.0)});
  // boundary bond angle is theta * sqrt(2) at m_max = 1
  CHECK(leakage_norm(u, space) == doctest::Approx(std::fabs(std::sin(0.3 * std::sqrt(2.0))))
                                      .epsilon(1e-9));
}

TEST_CASE("leakage needs a buffer to measure") {
  const TruncatedSpace bare{2, 0};
  const Mat u = Mat::Identity(bare.dim(), bare.dim());
  CHECK_THROWS_AS(leakage_norm(u, bare), std::invalid_argument);
}

TEST_CASE("restricted dynamics do not depend on the buffer depth") {
  const TruncatedSpace thin{3, 1};
  const TruncatedSpace thick{3, 3};
  const auto seq = random_sequence(thin, 200, 23, /*restricted_only=*/true);
  const Mat a = apply_sequence(thin, seq);
  const Mat b = apply_sequence(thick, seq);
  const int n = thin.controlled_dim();
  CHECK((a.topLeftCorner(n, n) - b.topLeftCorner(n, n)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fidelity ignores global phase and detects mismatch") {
  const TruncatedSpace space{2, 1};
  const auto seq = random_sequence(space, 40, 31, false);
  const Mat u = apply_sequence(space, seq);
  CHECK(fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(u, std::exp(cx(0, 0.7)) * u) == doctest::Approx(1.0).epsilon(1e-12));
  const Mat v = apply_sequence(space, random_sequence(space, 40, 32, false));
  CHECK(fidelity(u, v) < 0.99);
}

TEST_CASE("operator distance is the largest singular value of the gap") {
  Mat a = Mat::Identity(3, 3);
  Mat b = a;
  b(2, 2) = std::exp(cx(0, pi));  // flips the corner: gap has singular value 2
  CHECK(operator_distance(a, a) == 0.0);
  CHECK(operator_distance(a, b) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("evaluation report fields") {
  const TruncatedSpace space{2, 2};
  const auto seq = random_sequence(space, 60, 5, false);
  const Mat u = apply_sequence(space, seq);

  const EvaluationReport bare = evaluate_sequence(space, seq);
  CHECK(bare.fidelity_vs_target == -1.0);
  CHECK((bare.achieved - u).norm() == 0.0);
  const int n = space.controlled_dim();
  CHECK((bare.restricted - u.topLeftCorner(n, n)).norm() == 0.0);
  CHECK(bare.leakage == leakage_norm(u, space));
  CHECK(bare.unitarity_defect < 1e-12);

  // the target comparison runs on the controlled block, so a leakage-free
  // sequence reproducing its own block scores exactly 1
  const auto clean = random_sequence(space, 60, 6, /*restricted_only=*/true);
  const Mat v = apply_sequence(space, clean);
  const EvaluationReport aimed = evaluate_sequence(space, clean, v.topLeftCorner(n, n));
  CHECK(aimed.fidelity_vs_target == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(evaluate_sequence(space, clean, u), std::invalid_argument);
}

TEST_CASE("batch evaluation matches the serial loop bit for bit") {
  const TruncatedSpace space{3, 1};
  std::vector<std::vector<ControlPulse>> seqs;
  for (int i = 0; i < 24; ++i) seqs.push_back(random_sequence(space, 64, 100 + i, false));
  const auto parallel = batch_evaluate(space, seqs, std::nullopt, true);
  const auto serial = batch_evaluate(space, seqs, std::nullopt, false);
  REQUIRE(parallel.size() == seqs.size());
  REQUIRE(serial.size() == seqs.size());
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const EvaluationReport one = evaluate_sequence(space, seqs[i]);
    CHECK((parallel[i].achieved - serial[i].achieved).norm() == 0.0);
    CHECK((parallel[i].achieved - one.achieved).norm() == 0.0);
    CHECK(parallel[i].leakage == serial[i].leakage);
    CHECK(parallel[i].unitarity_defect == serial[i].unitarity_defect);
  }
}
