#pragma once

#include <cstdint>
#include <random>

#include "jcpulse/types.hpp"

namespace jcpulse {

// Deterministic random stream. Gaussian variates use an explicit Box-Muller
// transform instead of std::normal_distribution, whose output is not pinned
// by the standard and may differ between library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double gaussian();
  cx complex_gaussian();  // standard complex normal / sqrt(2)

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Haar-distributed special unitary via complex Ginibre + QR, with the phase
// convention fixed by the R diagonal and the determinant stripped.
Mat random_su(int n, std::uint64_t seed);

}  // namespace jcpulse
