#pragma once

#include <optional>

#include "jcpulse/types.hpp"

namespace jcpulse {

// Product of pulse propagators, last pulse leftmost: U = U_n ... U_2 U_1.
Mat apply_sequence(const TruncatedSpace& space, const std::vector<ControlPulse>& seq);

// Largest singular value of the block mapping controlled states to buffer
// states: how much population a single application can move past m_max.
double leakage_norm(const Mat& u, const TruncatedSpace& space);

// |tr(a^dag b)| / n for n x n unitaries: 1 iff equal up to global phase.
double fidelity(const Mat& a, const Mat& b);

// Largest singular value of a - b: global-phase-sensitive distance.
double operator_distance(const Mat& a, const Mat& b);

struct EvaluationReport {
  Mat achieved;                  // full truncated space
  Mat restricted;                // controlled block of achieved
  double leakage = 0.0;
  double fidelity_vs_target = -1.0;  // -1 when no target was supplied
  double unitarity_defect = 0.0;     // ||U^dag U - I||_HS on the full space
};

EvaluationReport evaluate_sequence(const TruncatedSpace& space,
                                   const std::vector<ControlPulse>& seq,
                                   const std::optional<Mat>& target = std::nullopt);

// Same reports as evaluating one by one; parallel over independent items.
std::vector<EvaluationReport> batch_evaluate(const TruncatedSpace& space,
                                             const std::vector<std::vector<ControlPulse>>& seqs,
                                             const std::optional<Mat>& target = std::nullopt,
                                             bool parallel = true);

}  // namespace jcpulse
