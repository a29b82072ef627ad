#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "jcpulse/arith.hpp"
#include "jcpulse/kscan.hpp"
#include "jcpulse/model.hpp"

using namespace jcpulse;

namespace {

KSearchSpec make_spec(int m, long long core, double target, double eps,
                      KSearchSpec::Parity parity = KSearchSpec::Parity::any,
                      long long k_max = 10'000'000) {
  KSearchSpec s;
  s.m = m;
  s.target_core = core;
  s.target_angle = target;
  s.epsilon = eps;
  s.k_max = k_max;
  s.parity = parity;
  return s;
}

// independent full-precision recomputation of the wrapped bond angle at k
double recomputed_angle(int m, long long p, long long k) {
  const long double ratio = static_cast<long double>(p) / static_cast<long double>(m + 1);
  const long double c = static_cast<long double>(pi) * std::sqrt(ratio);
  return wrap_angle(static_cast<long double>(k) * c);
}

}  // namespace

TEST_CASE("reference search at m=1") {
  const KSearchResult r = find_k(make_spec(1, 1, 0.0, 0.1));
  REQUIRE(r.found);
  CHECK(r.k == 17);
  // wrapped angle of level 1 at k=17, pinned against an independent
  // high-precision evaluation
  CHECK(std::fabs(r.achieved_angles.at(1) - 0.0653931312685998) < 1e-12);
  CHECK(r.target_deviation <= 0.1);
  CHECK(r.max_offtarget_deviation == 0.0);  // no suppressed levels at m=1
}

TEST_CASE("epsilon grid at m=1 pins the minimal indices") {
  const double grid[5] = {0.3, 0.1, 0.03, 0.01, 0.003};
  const long long expect[5] = {17, 17, 99, 478, 577};
  long long prev = -1;
  for (int i = 0; i < 5; ++i) {
    const KSearchResult r = find_k(make_spec(1, 1, 0.0, grid[i]));
    REQUIRE(r.found);
    CHECK(r.k == expect[i]);
    // tightening epsilon never shrinks the minimal index
    if (i > 0) CHECK(r.k >= prev);
    prev = r.k;
  }
}

TEST_CASE("suppression search at m=4 with even parity") {
  const KSearchResult r =
      find_k(make_spec(4, 3, pi / 2, 0.05, KSearchSpec::Parity::even));
  REQUIRE(r.found);
  CHECK(r.k == 423878);
  CHECK(r.k % 2 == 0);
}

TEST_CASE("parity split at tight epsilon") {
  const KSearchResult even =
      find_k(make_spec(1, 1, 0.0, 7e-6, KSearchSpec::Parity::even));
  const KSearchResult odd = find_k(make_spec(1, 1, 0.0, 7e-6, KSearchSpec::Parity::odd));
  REQUIRE(even.found);
  REQUIRE(odd.found);
  CHECK(even.k == 1331714);
  CHECK(odd.k == 665857);
}

TEST_CASE("results satisfy their own bounds under independent recomputation") {
  const KSearchSpec specs[] = {
      make_spec(1, 1, 0.0, 0.05),
      make_spec(4, 3, pi / 2, 0.1, KSearchSpec::Parity::even),
      make_spec(4, 2, 0.7, 0.1, KSearchSpec::Parity::even),
      make_spec(2, 2, 1.0, 0.05, KSearchSpec::Parity::even),
  };
  for (const KSearchSpec& spec : specs) {
    const KSearchResult r = find_k(spec);
    REQUIRE(r.found);
    const GroupPartition part = partition_groups(spec.m);
    for (const auto& [core, members] : part.groups) {
      const long long level = members.front();
      const double angle = recomputed_angle(spec.m, level, r.k);
      if (core == spec.target_core) {
        CHECK(std::fabs(wrap_angle(static_cast<long double>(angle) -
                                   static_cast<long double>(spec.target_angle))) <=
              spec.epsilon * (1 + 1e-12));
      } else {
        for (long long p : members)
          CHECK(std::fabs(recomputed_angle(spec.m, p, r.k)) <= spec.epsilon * (1 + 1e-12));
      }
    }
    for (const auto& [level, angle] : r.achieved_angles)
      CHECK(std::fabs(angle - recomputed_angle(spec.m, level, r.k)) < 1e-12);
  }
}

TEST_CASE("vacuous bound accepts the first candidate") {
  const KSearchResult r = find_k(make_spec(4, 1, 0.0, pi));
  REQUIRE(r.found);
  CHECK(r.k == 1);
}

TEST_CASE("epsilon domain is validated") {
  CHECK_THROWS_AS(find_k(make_spec(1, 1, 0.0, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(find_k(make_spec(1, 1, 0.0, 3.2)), std::invalid_argument);
}

TEST_CASE("serial and parallel scans are bit-identical") {
  const KSearchSpec specs[] = {
      make_spec(1, 1, 0.0, 0.01),
      make_spec(4, 3, pi / 2, 0.05, KSearchSpec::Parity::even),
      make_spec(4, 1, 0.4, 0.02, KSearchSpec::Parity::odd),
      make_spec(6, 5, 2.0, 1e-4),  // not found within this bound
  };
  for (const KSearchSpec& base : specs) {
    KSearchSpec spec = base;
    if (spec.epsilon == 1e-4) spec.k_max = 2000;
    const KSearchResult a = find_k_serial(spec);
    const KSearchResult b = find_k_parallel(spec);
    CHECK(a.found == b.found);
    CHECK(a.k == b.k);
    CHECK(a.target_deviation == b.target_deviation);
    CHECK(a.max_offtarget_deviation == b.max_offtarget_deviation);
    CHECK(a.worst_constraint == b.worst_constraint);
    CHECK(a.achieved_angles == b.achieved_angles);
  }
}

TEST_CASE("miss reports the least-violating candidate") {
  KSearchSpec spec = make_spec(4, 3, pi / 2, 1e-7, KSearchSpec::Parity::even, 5000);
  const KSearchResult r = find_k(spec);
  CHECK(!r.found);
  CHECK(r.k >= 1);
  CHECK(r.k <= spec.k_max);
  CHECK(r.worst_constraint > spec.epsilon);
}

TEST_CASE("cache stores hits and survives corruption") {
  const std::string path = "test_kscan_cache.json";
  std::remove(path.c_str());
  const KSearchSpec spec = make_spec(1, 1, 0.0, 0.1);
  {
    KScanCache cache(path);
    const KSearchResult r = find_k(spec, &cache);
    CHECK(r.k == 17);
  }
  {
    // warm lookup returns the stored result
    KScanCache cache(path);
    const auto hit = cache.lookup(spec);
    REQUIRE(hit.has_value());
    CHECK(hit->k == 17);
    // a stored index above the caller's scan bound must not be served
    KSearchSpec tight = spec;
    tight.k_max = 5;
    CHECK(!cache.lookup(tight).has_value());
    const KSearchResult again = find_k(tight, &cache);
    CHECK(!again.found);
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << "{ this is not json";
  }
  {
    KScanCache cache(path);  // prints a warning, then recomputes
    const KSearchResult r = find_k(spec, &cache);
    CHECK(r.found);
    CHECK(r.k == 17);
  }
  std::remove(path.c_str());
}

TEST_CASE("cache roundtrips through JSON") {
  KSearchResult r;
  r.found = true;
  r.k = 42;
  r.achieved_angles[1] = 0.125;
  r.achieved_angles[3] = -0.25;
  r.max_offtarget_deviation = 0.25;
  r.target_deviation = 0.125;
  r.worst_constraint = 0.25;
  nlohmann::ordered_json j;
  to_json(j, r);
  KSearchResult back;
  from_json(j, back);
  CHECK(back.found == r.found);
  CHECK(back.k == r.k);
  CHECK(back.achieved_angles == r.achieved_angles);
  CHECK(back.worst_constraint == r.worst_constraint);
}

TEST_CASE("approximate inverse powers") {
  // exact rational rotation: U^5 = I, so U^4 = U^{-1}
  const int n = 3;
  Mat u = Mat::Identity(n, n);
  const double phase = 2 * pi * 2 / 5;
  u(1, 1) = std::exp(cx(0, phase));
  u(2, 2) = std::exp(cx(0, -phase));
  const InversePowerResult r = approx_inverse_power(u, 1e-9, 100);
  REQUIRE(r.found);
  CHECK(r.p == 4);
  CHECK(r.residual < 1e-9);

  Mat v = Mat::Identity(2, 2);
  v(0, 0) = std::exp(cx(0, 1.0));
  v(1, 1) = std::exp(cx(0, -1.0));
  const InversePowerResult r2 = approx_inverse_power(v, 0.1, 10000);
  REQUIRE(r2.found);
  CHECK(r2.p == 43);
  CHECK(r2.residual == doctest::Approx(0.0250352833).epsilon(1e-6));
  // certified residual equals the direct matrix-power distance
  CHECK(std::fabs((matrix_power(v, r2.p) - v.adjoint()).norm() - r2.residual) < 1e-9);

  const InversePowerResult miss = approx_inverse_power(v, 1e-6, 50);
  CHECK(!miss.found);
}

TEST_CASE("matrix power by squaring") {
  Mat u(2, 2);
  u << cx(0, 0), cx(1, 0), cx(-1, 0), cx(0, 0);  // rotation by pi/2
  CHECK((matrix_power(u, 4) - Mat::Identity(2, 2)).norm() < 1e-15);
  CHECK((matrix_power(u, 0) - Mat::Identity(2, 2)).norm() == 0.0);
  CHECK((matrix_power(u, 3) - u.adjoint()).norm() < 1e-15);
}
