#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace jcpulse {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Joint basis of a two-level system coupled to a truncated oscillator ladder.
// State (level n, spin s) sits at row 2n + s, spin 0 = down, 1 = up.
// The controlled block is levels 0..m_max; n_buffer extra levels are kept so
// that population escaping past m_max is representable and measurable.
struct TruncatedSpace {
  int m_max = 1;
  int n_buffer = 1;

  int levels() const { return m_max + n_buffer + 1; }
  int dim() const { return 2 * levels(); }
  int controlled_dim() const { return 2 * (m_max + 1); }
  static int idx(int level, int spin) { return 2 * level + spin; }
};

enum class Channel { carrier, red_sideband };

// One laser pulse: channel, area theta >= 0, phase phi in [0, 2pi).
// Restricted red-sideband pulses have theta = k*pi/sqrt(m_max+1); such pulses
// act as exactly (-1)^k on the boundary pair and cannot leak out of the
// controlled block. k is kept alongside theta so the propagator can pin the
// boundary block exactly instead of trusting theta*sqrt(m_max+1) ~ k*pi.
struct ControlPulse {
  Channel channel = Channel::carrier;
  double theta = 0.0;
  double phi = 0.0;
  std::optional<long long> restricted_k;

  bool restricted() const { return restricted_k.has_value(); }
};

double restricted_red_theta(const TruncatedSpace& space, long long k);
ControlPulse carrier_pulse(double theta, double phi);
ControlPulse red_pulse(double theta, double phi);
ControlPulse restricted_red_pulse(const TruncatedSpace& space, long long k, double phi);

// Physical model parameters; only sanity-checked, the pulse algebra is
// phrased in interaction-picture rotation angles and does not need them.
struct ModelParams {
  double omega_c = 1.0;   // oscillator frequency
  double omega_z = 1.0;   // spin splitting
  double eta = 0.1;       // coupling strength
  bool valid() const { return omega_c > 0 && omega_z > 0 && eta > 0; }
};

}  // namespace jcpulse
