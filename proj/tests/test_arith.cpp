#include <doctest.h>

#include <vector>

#include "jcpulse/arith.hpp"

using namespace jcpulse;

TEST_CASE("primality and perfect squares") {
  CHECK(!is_prime(0));
  CHECK(!is_prime(1));
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK(!is_prime(9));
  CHECK(is_prime(97));
  CHECK(!is_prime(91));
  CHECK(is_prime(7919));
  CHECK(is_perfect_square(0));
  CHECK(is_perfect_square(1));
  CHECK(!is_perfect_square(2));
  CHECK(is_perfect_square(144));
  CHECK(!is_perfect_square(145));
  CHECK(is_perfect_square(1LL << 40));
}

TEST_CASE("squarefree part") {
  CHECK(squarefree_part(1) == 1);
  CHECK(squarefree_part(4) == 1);
  CHECK(squarefree_part(8) == 2);
  CHECK(squarefree_part(12) == 3);
  CHECK(squarefree_part(18) == 2);
  CHECK(squarefree_part(49) == 1);
  CHECK(squarefree_part(50) == 2);
  CHECK(squarefree_part(720) == 5);
  CHECK(squarefree_part(9973) == 9973);
}

TEST_CASE("group partition matches the perfect-square pairing oracle") {
  for (int m : {1, 2, 4, 9, 30, 100}) {
    const GroupPartition part = partition_groups(m);
    // levels p, q share a group exactly when p*q is a perfect square
    std::vector<long long> core_of(m + 1, 0);
    for (const auto& [core, members] : part.groups)
      for (long long p : members) core_of[p] = core;
    long long count = 0;
    for (long long p = 1; p <= m; ++p) {
      CHECK(core_of[p] == squarefree_part(p));
      ++count;
      for (long long q = p + 1; q <= m; ++q)
        CHECK((core_of[p] == core_of[q]) == is_perfect_square(p * q));
    }
    CHECK(count == m);
  }
}

TEST_CASE("partition of m=4 is the documented split") {
  const GroupPartition part = partition_groups(4);
  REQUIRE(part.groups.size() == 3);
  CHECK(part.groups.at(1) == std::vector<long long>{1, 4});
  CHECK(part.groups.at(2) == std::vector<long long>{2});
  CHECK(part.groups.at(3) == std::vector<long long>{3});
}

TEST_CASE("subspace selection rules") {
  for (int m : {4, 6, 12}) {
    const SubspaceSelection sel = select_subspace(m);
    CHECK(sel.valid());
    CHECK(sel.rule == SubspaceSelection::Rule::twin_prime);
    CHECK(sel.witness == m - 1);
  }
  for (int m : {5, 9}) {
    const SubspaceSelection sel = select_subspace(m);
    CHECK(sel.valid());
    CHECK(sel.rule == SubspaceSelection::Rule::two_q);
    CHECK(sel.witness == (m + 1) / 2);
  }
  for (int m : {0, 1, 3, 7}) CHECK(!select_subspace(m).valid());
}

TEST_CASE("accepted sizes up to 200 match the reference lists") {
  const std::vector<int> twin = {4, 6, 12, 18, 30, 42, 60, 72, 102, 108, 138, 150, 180, 192, 198};
  const std::vector<int> twoq = {5,  9,  13, 21,  25,  33,  37,  45,  57,  61,  73,  81,
                                 85, 93, 105, 117, 121, 133, 141, 145, 157, 165, 177, 193};
  std::vector<int> got_twin, got_twoq;
  for (int m = 2; m <= 200; ++m) {
    const SubspaceSelection sel = select_subspace(m);
    if (sel.rule == SubspaceSelection::Rule::twin_prime) got_twin.push_back(m);
    if (sel.rule == SubspaceSelection::Rule::two_q) got_twoq.push_back(m);
  }
  CHECK(got_twin == twin);
  CHECK(got_twoq == twoq);
}

TEST_CASE("irrationality certificate") {
  // p*(m+1) is a perfect square for some p <= m exactly when a bond-angle
  // ratio is rational
  CHECK(verify_irrationality(4));
  CHECK(verify_irrationality(6));
  CHECK(!verify_irrationality(3));   // 1*4 is a square
  CHECK(!verify_irrationality(8));   // 1*9 is a square
  CHECK(!verify_irrationality(48));  // 1*49 is a square
  for (int m = 2; m <= 200; ++m)
    if (select_subspace(m).valid()) CHECK(verify_irrationality(m));
}
