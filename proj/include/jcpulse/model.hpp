#pragma once

#include "jcpulse/types.hpp"

namespace jcpulse {

// Skew-Hermitian control generators on the truncated space.
//
// carrier at phase phi couples (n,down) <-> (n,up) on every level with
// matrix elements  H(2n+1, 2n) = i e^{i phi},  H(2n, 2n+1) = i e^{-i phi}.
// phi = 0 gives per-level blocks i*[[0,1],[1,0]]; phi = pi/2 gives
// [[0,1],[-1,0]].
Mat carrier_hamiltonian(const TruncatedSpace& space, double phi);

// red sideband couples (n,up) <-> (n+1,down) with weight sqrt(n+1):
// H(2n+2, 2n+1) = i sqrt(n+1) e^{i phi} and the conjugate partner.
// phi = 0 gives sqrt(p)*i[[0,1],[1,0]] on each ladder bond, phi = pi/2
// gives sqrt(p)*[[0,1],[-1,0]].
Mat red_sideband_hamiltonian(const TruncatedSpace& space, double phi);

// exp(A) for skew-Hermitian A via the spectral decomposition of -iA.
Mat expm_skew(const Mat& a);

// Angle of ladder bond p (couples rows 2p-1 and 2p, 0-based) under a
// restricted red pulse with index k, wrapped into (-pi, pi]. Evaluated in
// extended precision so large k keeps ~1e-12 absolute accuracy.
double restricted_bond_angle(const TruncatedSpace& space, long long k, int bond);

// Wrap into (-pi, pi].
double wrap_angle(long double x);

// Propagator of one pulse, in closed form: both channels decompose into
// disjoint 2x2 bonds, each of which exponentiates to
//   [[cos b, i e^{-i phi} sin b], [i e^{i phi} sin b, cos b]],  b = theta*w.
// For restricted pulses the boundary bond angle is k*pi exactly, so that
// block is pinned to (-1)^k * I; the propagator is then exactly
// block-diagonal between controlled block and buffer.
Mat pulse_unitary(const TruncatedSpace& space, const ControlPulse& pulse);

// Same propagator through expm_skew; cross-check for pulse_unitary.
Mat pulse_unitary_eig(const TruncatedSpace& space, const ControlPulse& pulse);

}  // namespace jcpulse
