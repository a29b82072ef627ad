#pragma once

#include "jcpulse/types.hpp"

namespace jcpulse {

Mat commutator(const Mat& a, const Mat& b);

// Orthonormal basis (Hilbert-Schmidt inner product) of the Lie algebra
// generated by a set of skew-Hermitian matrices, together with the residual
// norm recorded for every accepted element.
struct LieBasis {
  std::vector<Mat> elements;
  std::vector<double> residual_history;
  int dim() const { return static_cast<int>(elements.size()); }
};

// Breadth-first closure: a FIFO queue is seeded with the generators in input
// order. Each candidate is orthogonalised against the current basis (two
// Gram-Schmidt passes); if the residual exceeds rank_tol times the
// candidate's own norm it is appended, and its commutators with all previous
// basis elements are enqueued in basis order.
LieBasis lie_closure(const std::vector<Mat>& generators, double rank_tol = 1e-9);

// span contains su(N) traceless skew-Hermitian algebra, i.e. dim == N^2 - 1.
bool is_fully_controllable(const LieBasis& basis, int n);

// Coefficients of the best Hilbert-Schmidt projection of x onto the basis
// span; returns the residual norm of x minus the projection.
double projection_residual(const LieBasis& basis, const Mat& x);

}  // namespace jcpulse
