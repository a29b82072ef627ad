#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jcpulse/kscan.hpp"
#include "jcpulse/report.hpp"
#include "jcpulse/types.hpp"

namespace jcpulse {

// Recipe tree explaining how a generator or pulse block was obtained; purely
// descriptive, carried along so reports can show the construction.
struct ConstructionNode {
  std::string op;  // pulse | product | sum | scale | commutator | conjugate | strang | reference
  std::string label;
  double scalar = 1.0;
  std::optional<ControlPulse> pulse;
  std::vector<ConstructionNode> children;
};

ConstructionNode pulse_node(const std::string& label, const ControlPulse& p);
ConstructionNode ref_node(const std::string& label);
ConstructionNode combine_node(const std::string& op, const std::string& label,
                              std::vector<ConstructionNode> children, double scalar = 1.0);

// A pulse block realizing exp(alpha * generator) on the controlled block,
// with a certified operator-norm error bound.
struct SynthesisMacro {
  std::string name;
  Mat generator;  // ideal skew-Hermitian generator, controlled dim
  double alpha = 1.0;
  std::vector<ControlPulse> pulses;
  double error_bound = 0.0;
  ConstructionNode construction;
  std::optional<KSearchResult> kinfo;
};

struct MacroOutcome {
  bool ok = false;
  SynthesisMacro macro;
  std::string diagnostic;
};

// Canonical skew-Hermitian patterns, 0-based rows a < b.
Mat pattern_r(int n, int a, int b);  // E_ab - E_ba
Mat pattern_x(int n, int a, int b);  // i(E_ab + E_ba)
Mat pattern_z(int n, int a, int b);  // i(E_aa - E_bb)

// Ladder-bond weights of the ideal nearest-neighbour chain on the controlled
// block: bond j odd -> 1, bond j = 2p with p = c*q^2 -> q*sqrt(c).
std::vector<double> chain_weights(int m);
Mat chain_generator(int m);  // sum_j w_j R_j, the full weighted chain

// sum over members p = c*q^2 <= m of q * R_{2p}: all bonds of one squarefree
// group rotate with exactly commensurate angles, so one restricted pulse can
// drive them together.
Mat group_generator(int m, long long core);

// Realize exp(alpha * group_generator) with a single even-k restricted pulse.
// Even k keeps the boundary block at +1; the error bound is the sum of
// per-bond rotation defects 2|sin(dev/2)|.
MacroOutcome group_generator_macro(int m, long long core, double alpha, double eps,
                                   long long k_max, KScanCache* cache = nullptr);

// Realize exp(alpha * chain_generator) by symmetric splitting between the
// carrier half (exact) and the commuting product of group macros. eps is the
// total error budget; infeasible scans fail honestly.
MacroOutcome chain_macro(int m, double alpha, double eps, long long k_max,
                         KScanCache* cache = nullptr);

// Single-bond generators on the top pair of the N=4 controlled block, driven
// through a sign-injector sandwich: an odd-k restricted pulse acts as
// diag(1,1,1,-1) up to a small bond-1 rotation, and conjugating half a
// carrier pulse with it isolates the top bond. The injector inverse is
// realized as one pulse with index p*k, p from approx_inverse_power.
struct BoundaryTrio {
  SynthesisMacro h6;  // top-bond X flavour
  SynthesisMacro h7;  // top-bond R flavour
  SynthesisMacro h8;  // chain minus top bond
  long long injector_k = 0;
  long long inverse_power = 0;
};
std::optional<BoundaryTrio> su4_boundary_generators(double alpha, double eps, long long k_max,
                                                    KScanCache* cache, std::string* diagnostic);

// Weighted two-term recursion transporting a top-pair generator down the
// chain: out[j] = ([h8, out[j+1]] + w_{j+1} out[j+2]) / w_j, weights read
// from the first superdiagonal of h8. Seeded with R gives E_jN - E_Nj,
// seeded with X gives i(E_jN + E_Nj); exact in floating point.
std::vector<Mat> m_chain(const Mat& h8, const Mat& h7, int n);
std::vector<Mat> j_chain(const Mat& h8, const Mat& h6, int n);

// Commutator walk from the witness-level bond out to the top bond of the
// chain, in both flavours. All steps evaluate to exact single-bond patterns.
struct ChainWalk {
  int n = 0;
  long long witness = 0;
  std::vector<Mat> s;  // s[0]..s[6] = S1..S7, R flavour
  std::vector<Mat> t;  // t[0]..t[6], X flavour twin walk (t[0] == s[0])
  ConstructionNode provenance;
};
ChainWalk s_chain(int m);

// Full canonical generator set of su(N) on the controlled block, each with a
// construction tree tracing back to chain and boundary macros.
struct BasisElement {
  std::string label;
  Mat matrix;
  ConstructionNode construction;
};
std::vector<BasisElement> full_basis(int m);

// Adjacent-pair rotation macros for the compiler. A pair admits isolated
// rotations when it is either a singleton-core red bond, the top carrier
// bond (via the injector sandwich), or any pair at m = 1.
bool pair_supported(int m, int pair, std::string* why);

struct PairKit {
  int m = 1;
  long long injector_k = -1;  // found lazily on first sandwich use
  double injector_bound = 0.0;
  double scan_eps = 0.0;
  long long k_max = 0;
};
std::optional<PairKit> make_pair_kit(int m, double scan_eps, long long k_max, KScanCache* cache,
                                     std::string* diag);

// flavor 'R' = plane rotation, 'X' = imaginary off-diagonal, 'Z' = traceless
// diagonal; pair is the 0-based upper row of the adjacent pair.
MacroOutcome pair_rotation_macro(PairKit& kit, int pair, char flavor, double t,
                                 KScanCache* cache);

jrep construction_to_json(const ConstructionNode& node);
jrep macro_to_json(const SynthesisMacro& macro);

}  // namespace jcpulse
