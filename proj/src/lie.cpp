#include "jcpulse/lie.hpp"

#include <deque>

namespace jcpulse {

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

namespace {

cx hs_inner(const Mat& a, const Mat& b) { return (a.adjoint() * b).trace(); }

// One projection sweep of x against basis, in basis order.
void project_out(const std::vector<Mat>& basis, Mat& x) {
  for (const Mat& e : basis) x -= hs_inner(e, x) * e;
}

}  // namespace

LieBasis lie_closure(const std::vector<Mat>& generators, double rank_tol) {
  LieBasis basis;
  std::deque<Mat> queue(generators.begin(), generators.end());
  while (!queue.empty()) {
    Mat x = std::move(queue.front());
    queue.pop_front();
    const double orig = x.norm();
    // commutators of unit-norm elements that vanish algebraically come back
    // as rounding noise around 1e-16; the relative test below would happily
    // accept such noise as a new direction, so zero them out first
    if (orig < 1e-12) continue;
    project_out(basis.elements, x);
    project_out(basis.elements, x);  // second pass keeps the basis orthonormal
    const double res = x.norm();
    if (res > rank_tol * orig) {
      basis.elements.push_back(x / res);
      basis.residual_history.push_back(res);
      const Mat& fresh = basis.elements.back();
      for (size_t j = 0; j + 1 < basis.elements.size(); ++j)
        queue.push_back(commutator(fresh, basis.elements[j]));
    }
  }
  return basis;
}

bool is_fully_controllable(const LieBasis& basis, int n) {
  return basis.dim() == n * n - 1;
}

double projection_residual(const LieBasis& basis, const Mat& x) {
  Mat r = x;
  project_out(basis.elements, r);
  project_out(basis.elements, r);
  return r.norm();
}

}  // namespace jcpulse
