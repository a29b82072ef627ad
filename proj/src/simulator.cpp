#include "jcpulse/simulator.hpp"

#include <stdexcept>

#include "jcpulse/model.hpp"

namespace jcpulse {

Mat apply_sequence(const TruncatedSpace& space, const std::vector<ControlPulse>& seq) {
  Mat u = Mat::Identity(space.dim(), space.dim());
  for (const ControlPulse& p : seq) u = pulse_unitary(space, p) * u;
  return u;
}

double leakage_norm(const Mat& u, const TruncatedSpace& space) {
  const int nc = space.controlled_dim();
  const int nb = space.dim() - nc;
  if (nb <= 0) throw std::invalid_argument("leakage needs at least one buffer level");
  const Mat block = u.block(nc, 0, nb, nc);  // controlled column -> buffer rows
  if (block.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(block);
  return svd.singularValues()(0);
}

double fidelity(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("fidelity needs matrices of equal shape");
  return std::abs((a.adjoint() * b).trace()) / static_cast<double>(a.rows());
}

double operator_distance(const Mat& a, const Mat& b) {
  Eigen::JacobiSVD<Mat> svd(a - b);
  return svd.singularValues()(0);
}

EvaluationReport evaluate_sequence(const TruncatedSpace& space,
                                   const std::vector<ControlPulse>& seq,
                                   const std::optional<Mat>& target) {
  EvaluationReport rep;
  rep.achieved = apply_sequence(space, seq);
  const int nc = space.controlled_dim();
  rep.restricted = rep.achieved.topLeftCorner(nc, nc);
  rep.leakage = leakage_norm(rep.achieved, space);
  rep.unitarity_defect =
      (rep.achieved.adjoint() * rep.achieved - Mat::Identity(space.dim(), space.dim())).norm();
  if (target) {
    if (target->rows() != nc)
      throw std::invalid_argument("target must act on the controlled block");
    rep.fidelity_vs_target = fidelity(*target, rep.restricted);
  }
  return rep;
}

std::vector<EvaluationReport> batch_evaluate(const TruncatedSpace& space,
                                             const std::vector<std::vector<ControlPulse>>& seqs,
                                             const std::optional<Mat>& target, bool parallel) {
  std::vector<EvaluationReport> out(seqs.size());
  const int n = static_cast<int>(seqs.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) out[i] = evaluate_sequence(space, seqs[i], target);
  return out;
}

}  // namespace jcpulse
