#include "jcpulse/model.hpp"

#include <cmath>
#include <stdexcept>

namespace jcpulse {

double restricted_red_theta(const TruncatedSpace& space, long long k) {
  if (k < 0) throw std::invalid_argument("restricted pulse index k must be >= 0");
  return static_cast<double>(k) * pi / std::sqrt(static_cast<double>(space.m_max + 1));
}

ControlPulse carrier_pulse(double theta, double phi) {
  ControlPulse p;
  p.channel = Channel::carrier;
  p.theta = theta;
  p.phi = phi;
  return p;
}

ControlPulse red_pulse(double theta, double phi) {
  ControlPulse p;
  p.channel = Channel::red_sideband;
  p.theta = theta;
  p.phi = phi;
  return p;
}

ControlPulse restricted_red_pulse(const TruncatedSpace& space, long long k, double phi) {
  ControlPulse p;
  p.channel = Channel::red_sideband;
  p.theta = restricted_red_theta(space, k);
  p.phi = phi;
  p.restricted_k = k;
  return p;
}

namespace {

// e^{i*phi} with crisp values when phi is an exact double multiple of pi/2
// built from the shared pi constant. Pulse phases are quoted in those units,
// and the generators at the quadrant phases have integer entries; without the
// snap, cos(pi/2) leaves an ~6e-17 residue in every one of them.
cx unit_phase(double phi) {
  const double half = pi / 2;
  const double q = std::round(phi / half);
  if (phi == q * half && std::fabs(q) < 9e15) {
    switch (static_cast<long long>(q) & 3) {
      case 0: return cx(1, 0);
      case 1: return cx(0, 1);
      case 2: return cx(-1, 0);
      default: return cx(0, -1);
    }
  }
  return std::exp(cx(0, phi));
}

}  // namespace

Mat carrier_hamiltonian(const TruncatedSpace& space, double phi) {
  const int d = space.dim();
  Mat h = Mat::Zero(d, d);
  const cx up = cx(0, 1) * unit_phase(phi);
  const cx dn = cx(0, 1) * unit_phase(-phi);
  for (int n = 0; n < space.levels(); ++n) {
    h(TruncatedSpace::idx(n, 1), TruncatedSpace::idx(n, 0)) = up;
    h(TruncatedSpace::idx(n, 0), TruncatedSpace::idx(n, 1)) = dn;
  }
  return h;
}

Mat red_sideband_hamiltonian(const TruncatedSpace& space, double phi) {
  const int d = space.dim();
  Mat h = Mat::Zero(d, d);
  for (int n = 0; n + 1 < space.levels(); ++n) {
    const double w = std::sqrt(static_cast<double>(n + 1));
    h(TruncatedSpace::idx(n + 1, 0), TruncatedSpace::idx(n, 1)) = cx(0, w) * unit_phase(phi);
    h(TruncatedSpace::idx(n, 1), TruncatedSpace::idx(n + 1, 0)) = cx(0, w) * unit_phase(-phi);
  }
  return h;
}

Mat expm_skew(const Mat& a) {
  // a = i*h with h Hermitian; exponentiate through the spectrum of h = -i*a.
  Mat herm = cx(0, -1) * a;
  Eigen::SelfAdjointEigenSolver<Mat> es(herm);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  const auto& lam = es.eigenvalues();
  Vec phases(lam.size());
  for (Eigen::Index j = 0; j < lam.size(); ++j) phases(j) = std::exp(cx(0, lam(j)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double wrap_angle(long double x) {
  long double r = std::remainderl(x, 2.0L * static_cast<long double>(pi));
  if (r <= -static_cast<long double>(pi)) r += 2.0L * static_cast<long double>(pi);
  return static_cast<double>(r);
}

double restricted_bond_angle(const TruncatedSpace& space, long long k, int bond) {
  // theta * sqrt(p) with theta = k*pi/sqrt(m+1), reduced before the cast to
  // double so the k*pi product does not eat the tail of the mantissa.
  const long double p = static_cast<long double>(bond);
  const long double m1 = static_cast<long double>(space.m_max + 1);
  const long double c = static_cast<long double>(pi) * std::sqrt(p / m1);
  return wrap_angle(static_cast<long double>(k) * c);
}

namespace {

inline void set_bond(Mat& u, int row_a, int row_b, double beta, double phi) {
  const double cb = std::cos(beta);
  const double sb = std::sin(beta);
  u(row_a, row_a) = cb;
  u(row_b, row_b) = cb;
  u(row_a, row_b) = cx(0, sb) * unit_phase(-phi);
  u(row_b, row_a) = cx(0, sb) * unit_phase(phi);
}

}  // namespace

Mat pulse_unitary(const TruncatedSpace& space, const ControlPulse& pulse) {
  const int d = space.dim();
  Mat u = Mat::Identity(d, d);
  if (pulse.channel == Channel::carrier) {
    for (int n = 0; n < space.levels(); ++n)
      set_bond(u, TruncatedSpace::idx(n, 0), TruncatedSpace::idx(n, 1), pulse.theta, pulse.phi);
    return u;
  }
  for (int p = 1; p < space.levels(); ++p) {
    const int row_a = TruncatedSpace::idx(p - 1, 1);
    const int row_b = TruncatedSpace::idx(p, 0);
    if (pulse.restricted()) {
      const long long k = *pulse.restricted_k;
      if (p == space.m_max + 1) {
        // boundary bond angle is k*pi exactly: block is (-1)^k * I
        const double s = (k % 2 != 0) ? -1.0 : 1.0;
        u(row_a, row_a) = s;
        u(row_b, row_b) = s;
      } else {
        set_bond(u, row_a, row_b, restricted_bond_angle(space, k, p), pulse.phi);
      }
    } else {
      set_bond(u, row_a, row_b, pulse.theta * std::sqrt(static_cast<double>(p)), pulse.phi);
    }
  }
  return u;
}

Mat pulse_unitary_eig(const TruncatedSpace& space, const ControlPulse& pulse) {
  const Mat h = pulse.channel == Channel::carrier ? carrier_hamiltonian(space, pulse.phi)
                                                  : red_sideband_hamiltonian(space, pulse.phi);
  return expm_skew(pulse.theta * h);
}

}  // namespace jcpulse
