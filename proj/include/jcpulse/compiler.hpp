#pragma once

#include "jcpulse/synthesis.hpp"

namespace jcpulse {

// Adjacent-pair two-level factors: u = g_1^dag g_2^dag ... g_K^dag with each
// g acting on rows (pair, pair+1). Produced by bottom-up column elimination
// followed by a diagonal phase sweep, so any special unitary reduces to
// factors on adjacent pairs only.
struct TwoLevelFactor {
  int pair = 0;
  Eigen::Matrix2cd g;
};
std::vector<TwoLevelFactor> two_level_decompose(const Mat& u, double* residual = nullptr);

// g = exp(a*Y) exp(b*X) exp(c*Z) with Y = [[0,1],[-1,0]], X = i[[0,1],[1,0]],
// Z = i*diag(1,-1). Solved by a finite branch search; err is the exact
// reconstruction defect of the returned angles.
struct EulerAngles {
  double a = 0, b = 0, c = 0;
  double err = 0;
};
EulerAngles euler_yxz(const Eigen::Matrix2cd& g);

struct FactorRecord {
  int pair = 0;
  double a = 0, b = 0, c = 0;
  double error_bound = 0;
  int pulse_count = 0;
};

struct CompilationResult {
  bool complete = false;
  std::vector<ControlPulse> pulses;
  double predicted_fidelity = 0.0;   // 1 - accumulated operator-norm bound
  double total_error_bound = 0.0;
  double decomposition_residual = 0.0;
  std::vector<FactorRecord> factors;
  std::string diagnostic;  // set when incomplete
};

// Compile a controlled-block unitary (dim 2(m+1)) into a pulse sequence.
// The global phase is stripped first; tolerance is the total operator-norm
// error budget. An unrealizable factor or an exhausted pulse budget yields
// an incomplete result carrying the realizable prefix and a diagnostic.
CompilationResult compile(const Mat& target, int m, double tolerance, long long pulse_budget,
                          long long k_max, KScanCache* cache = nullptr);

// "identity", "swap01" (exchange of the two lowest states), "fourier"
Mat builtin_target(const std::string& name, int n);

}  // namespace jcpulse
