#include "jcpulse/arith.hpp"

#include <cmath>
#include <stdexcept>

namespace jcpulse {

bool is_prime(long long n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (long long d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

bool is_perfect_square(long long n) {
  if (n < 0) return false;
  long long r = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(n))));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r * r == n;
}

long long squarefree_part(long long n) {
  if (n <= 0) throw std::invalid_argument("squarefree_part needs n >= 1");
  long long core = 1;
  for (long long d = 2; d * d <= n; ++d) {
    if (n % d) continue;
    int mult = 0;
    while (n % d == 0) {
      n /= d;
      ++mult;
    }
    if (mult % 2) core *= d;
  }
  return core * n;  // leftover n is prime (or 1) with multiplicity one
}

GroupPartition partition_groups(int m) {
  if (m < 1) throw std::invalid_argument("partition_groups needs m >= 1");
  GroupPartition part;
  part.m = m;
  for (long long p = 1; p <= m; ++p) part.groups[squarefree_part(p)].push_back(p);
  return part;
}

SubspaceSelection select_subspace(int m) {
  SubspaceSelection sel;
  if (m < 2) return sel;
  if (is_prime(m - 1) && is_prime(m + 1)) {
    sel.rule = SubspaceSelection::Rule::twin_prime;
    sel.witness = m - 1;
    return sel;
  }
  if ((m + 1) % 2 == 0) {
    const long long q = (m + 1) / 2;
    if (q % 2 == 1 && is_prime(q)) {
      sel.rule = SubspaceSelection::Rule::two_q;
      sel.witness = q;
    }
  }
  return sel;
}

bool verify_irrationality(int m) {
  for (long long p = 1; p <= m; ++p)
    if (is_perfect_square(p * (m + 1))) return false;
  return true;
}

}  // namespace jcpulse
