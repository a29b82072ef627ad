#pragma once

#include <map>
#include <vector>

namespace jcpulse {

bool is_prime(long long n);
bool is_perfect_square(long long n);

// n = s * q^2 with s squarefree; returns s.
long long squarefree_part(long long n);

// Ladder levels 1..m grouped by the squarefree part of the level index.
// Two levels land in the same group exactly when their product is a perfect
// square, i.e. their bond angles under a restricted pulse are commensurate
// with integer ratio.
struct GroupPartition {
  int m = 0;
  std::map<long long, std::vector<long long>> groups;  // core -> sorted members
};
GroupPartition partition_groups(int m);

// Which single level can serve as the isolated rotation target for a given
// truncation size. Checked in order:
//   - m-1 and m+1 both prime -> witness m-1
//   - m+1 = 2q with q an odd prime -> witness q
// otherwise the size is rejected.
struct SubspaceSelection {
  enum class Rule { twin_prime, two_q, invalid };
  Rule rule = Rule::invalid;
  long long witness = 0;
  bool valid() const { return rule != Rule::invalid; }
};
SubspaceSelection select_subspace(int m);

// True when no bond angle ratio sqrt(p/(m+1)), p <= m, is rational, i.e.
// p*(m+1) is never a perfect square.
bool verify_irrationality(int m);

}  // namespace jcpulse
