#include "jcpulse/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jcpulse/arith.hpp"
#include "jcpulse/lie.hpp"
#include "jcpulse/model.hpp"

namespace jcpulse {

namespace {

constexpr double phi_r = pi / 2;  // R-flavour phase: blocks [[0,1],[-1,0]]
constexpr double phi_x = 0.0;     // X-flavour phase: blocks i[[0,1],[1,0]]
constexpr double bound_slack = 1e-12;

double wrap2pi(double phi) {
  double r = std::fmod(phi, 2 * pi);
  if (r < 0) r += 2 * pi;
  return r;
}

double flip(double phi) { return wrap2pi(phi + pi); }

ControlPulse carrier_signed(double t, double phi) {
  return t >= 0 ? carrier_pulse(t, wrap2pi(phi)) : carrier_pulse(-t, flip(phi));
}

// core and multiplier of a ladder level: p = c * q^2
void core_mult(long long p, long long* core, long long* q) {
  *core = squarefree_part(p);
  *q = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(p / *core))));
}

double sine_defect(double dev) { return 2.0 * std::fabs(std::sin(0.5 * dev)); }

std::vector<ControlPulse> inverted(const std::vector<ControlPulse>& seq) {
  std::vector<ControlPulse> inv(seq.rbegin(), seq.rend());
  for (ControlPulse& p : inv) p.phi = flip(p.phi);
  return inv;
}

// merge adjacent pulses on the same channel and phase (areas add)
void append_merged(std::vector<ControlPulse>& seq, const ControlPulse& p) {
  if (!seq.empty()) {
    ControlPulse& last = seq.back();
    if (last.channel == p.channel && !last.restricted() && !p.restricted() &&
        std::fabs(wrap_angle(static_cast<long double>(last.phi) -
                             static_cast<long double>(p.phi))) < 1e-15) {
      last.theta += p.theta;
      if (last.theta == 0.0) seq.pop_back();
      return;
    }
  }
  if (p.theta == 0.0 && !p.restricted()) return;
  seq.push_back(p);
}

void append_all(std::vector<ControlPulse>& seq, const std::vector<ControlPulse>& more) {
  for (const ControlPulse& p : more) append_merged(seq, p);
}

}  // namespace

ConstructionNode pulse_node(const std::string& label, const ControlPulse& p) {
  ConstructionNode n;
  n.op = "pulse";
  n.label = label;
  n.pulse = p;
  return n;
}

ConstructionNode ref_node(const std::string& label) {
  ConstructionNode n;
  n.op = "reference";
  n.label = label;
  return n;
}

ConstructionNode combine_node(const std::string& op, const std::string& label,
                              std::vector<ConstructionNode> children, double scalar) {
  ConstructionNode n;
  n.op = op;
  n.label = label;
  n.scalar = scalar;
  n.children = std::move(children);
  return n;
}

Mat pattern_r(int n, int a, int b) {
  Mat m = Mat::Zero(n, n);
  m(a, b) = 1.0;
  m(b, a) = -1.0;
  return m;
}

Mat pattern_x(int n, int a, int b) {
  Mat m = Mat::Zero(n, n);
  m(a, b) = cx(0, 1);
  m(b, a) = cx(0, 1);
  return m;
}

Mat pattern_z(int n, int a, int b) {
  Mat m = Mat::Zero(n, n);
  m(a, a) = cx(0, 1);
  m(b, b) = cx(0, -1);
  return m;
}

std::vector<double> chain_weights(int m) {
  const int n = 2 * (m + 1);
  std::vector<double> w(n, 0.0);  // w[j] for bonds j = 1..n-1
  for (int j = 1; j < n; ++j) {
    if (j % 2 == 1) {
      w[j] = 1.0;
    } else {
      long long core = 0, q = 0;
      core_mult(j / 2, &core, &q);
      w[j] = static_cast<double>(q) * std::sqrt(static_cast<double>(core));
    }
  }
  return w;
}

Mat chain_generator(int m) {
  const int n = 2 * (m + 1);
  const std::vector<double> w = chain_weights(m);
  Mat g = Mat::Zero(n, n);
  for (int j = 1; j < n; ++j) g += w[j] * pattern_r(n, j - 1, j);
  return g;
}

Mat group_generator(int m, long long core) {
  const int n = 2 * (m + 1);
  Mat g = Mat::Zero(n, n);
  bool seen = false;
  for (long long p = 1; p <= m; ++p) {
    long long c = 0, q = 0;
    core_mult(p, &c, &q);
    if (c != core) continue;
    seen = true;
    g += static_cast<double>(q) * pattern_r(n, static_cast<int>(2 * p - 1), static_cast<int>(2 * p));
  }
  if (!seen) throw std::invalid_argument("group_generator: core has no level in 1..m");
  return g;
}

MacroOutcome group_generator_macro(int m, long long core, double alpha, double eps,
                                   long long k_max, KScanCache* cache) {
  MacroOutcome out;
  KSearchSpec spec;
  spec.m = m;
  spec.target_core = core;
  spec.target_angle = wrap_angle(static_cast<long double>(alpha));
  spec.epsilon = eps;
  spec.k_max = k_max;
  spec.parity = KSearchSpec::Parity::even;  // odd k would put -1 on the boundary pair
  const KSearchResult r = find_k(spec, cache);
  if (!r.found) {
    out.diagnostic = "no admissible even pulse index up to k_max=" + std::to_string(k_max) +
                     " for core " + std::to_string(core) + " at epsilon " + std::to_string(eps) +
                     " (best k=" + std::to_string(r.k) +
                     ", violation=" + std::to_string(r.worst_constraint) + ")";
    return out;
  }
  TruncatedSpace space;
  space.m_max = m;
  SynthesisMacro& mac = out.macro;
  mac.name = "group_rotation(core=" + std::to_string(core) + ")";
  mac.generator = group_generator(m, core);
  mac.alpha = alpha;
  mac.pulses = {restricted_red_pulse(space, r.k, phi_r)};
  mac.kinfo = r;
  double bound = bound_slack;
  for (long long p = 1; p <= m; ++p) {
    long long c = 0, q = 0;
    core_mult(p, &c, &q);
    const double intended = (c == core) ? alpha * static_cast<double>(q) : 0.0;
    const double dev = wrap_angle(static_cast<long double>(r.achieved_angles.at(p)) -
                                  static_cast<long double>(intended));
    bound += sine_defect(dev);
  }
  mac.error_bound = bound;
  mac.construction = pulse_node(
      "restricted red pulse, k=" + std::to_string(r.k) + ", even parity", mac.pulses[0]);
  out.ok = true;
  return out;
}

namespace {

// Repetitions for the symmetric split exp(tau A/2) exp(tau B) exp(tau A/2),
// bound per step tau^3 (||[B,[B,A]]||/12 + ||[A,[A,B]]||/24).
long long strang_repetitions(const Mat& a, const Mat& b, double alpha, double budget,
                             double* bound_out) {
  const double c1 = commutator(b, commutator(b, a)).norm();
  const double c2 = commutator(a, commutator(a, b)).norm();
  const double coeff = c1 / 12.0 + c2 / 24.0;
  const double aa = std::fabs(alpha);
  long long r = 1;
  if (coeff > 0 && aa > 0) {
    r = static_cast<long long>(std::ceil(std::sqrt(coeff * aa * aa * aa / budget)));
    r = std::max<long long>(r, 1);
  }
  while (coeff * aa * aa * aa / (static_cast<double>(r) * static_cast<double>(r)) > budget)
    ++r;
  if (bound_out)
    *bound_out = coeff * aa * aa * aa / (static_cast<double>(r) * static_cast<double>(r));
  return r;
}

}  // namespace

MacroOutcome chain_macro(int m, double alpha, double eps, long long k_max, KScanCache* cache) {
  MacroOutcome out;
  if (!(eps > 0)) {
    out.diagnostic = "chain_macro needs eps > 0";
    return out;
  }
  const int n = 2 * (m + 1);
  const GroupPartition part = partition_groups(m);
  const Mat full = chain_generator(m);
  Mat carrier_part = Mat::Zero(n, n);
  for (int j = 1; j < n; j += 2) carrier_part += pattern_r(n, j - 1, j);
  const Mat red_part = full - carrier_part;

  double strang_bound = 0.0;
  const long long reps = strang_repetitions(carrier_part, red_part, alpha, eps / 2, &strang_bound);
  const double tau = alpha / static_cast<double>(reps);

  // one scan per squarefree group, reused in every step
  const double per_macro_budget = (eps / 2) / (static_cast<double>(reps) *
                                               static_cast<double>(part.groups.size()));
  std::vector<SynthesisMacro> group_macros;
  std::vector<ConstructionNode> children;
  for (const auto& [core, members] : part.groups) {
    // a group macro deviates by at most (m+1) bond defects of ~eps_scan each
    const double eps_scan = std::max(per_macro_budget / (2.0 * (m + 1)), 1e-9);
    MacroOutcome g = group_generator_macro(
        m, core, tau * std::sqrt(static_cast<double>(core)), eps_scan, k_max, cache);
    if (!g.ok) {
      out.diagnostic = "chain splitting into " + std::to_string(reps) +
                       " steps is infeasible: " + g.diagnostic;
      return out;
    }
    group_macros.push_back(g.macro);
    children.push_back(g.macro.construction);
  }

  SynthesisMacro& mac = out.macro;
  mac.name = "weighted_chain";
  mac.generator = full;
  mac.alpha = alpha;
  double bound = strang_bound + bound_slack;
  for (long long step = 0; step < reps; ++step) {
    append_merged(mac.pulses, carrier_signed(tau / 2, phi_r));
    for (const SynthesisMacro& g : group_macros) {
      append_all(mac.pulses, g.pulses);
      bound += g.error_bound;
    }
    append_merged(mac.pulses, carrier_signed(tau / 2, phi_r));
  }
  mac.error_bound = bound;
  children.insert(children.begin(),
                  ref_node("carrier half-steps exp(tau/2 * sum of odd bonds), exact"));
  mac.construction = combine_node(
      "strang", "symmetric split, " + std::to_string(reps) + " repetitions", children);
  out.ok = true;
  return out;
}

namespace {

struct InjectorInfo {
  long long k = 0;
  double bound = 0.0;  // sum of interior-bond defects of the single pulse
  KSearchResult scan;
};

// Odd-k restricted pulse approximating diag(1,...,1,-1) on the controlled
// block: all ladder levels are pushed to angle ~0 while the boundary pair
// flips sign exactly.
std::optional<InjectorInfo> find_injector(int m, double eps, long long k_max, KScanCache* cache,
                                          std::string* diag) {
  KSearchSpec spec;
  spec.m = m;
  spec.target_core = 1;
  spec.target_angle = 0.0;
  spec.epsilon = eps;
  spec.k_max = k_max;
  spec.parity = KSearchSpec::Parity::odd;
  const KSearchResult r = find_k(spec, cache);
  if (!r.found) {
    if (diag)
      *diag = "no odd-k sign injector up to k_max=" + std::to_string(k_max) + " at epsilon " +
              std::to_string(eps) + " (best violation " + std::to_string(r.worst_constraint) + ")";
    return std::nullopt;
  }
  InjectorInfo info;
  info.k = r.k;
  info.scan = r;
  info.bound = bound_slack;
  TruncatedSpace space;
  space.m_max = m;
  for (long long p = 1; p <= m; ++p)
    info.bound += sine_defect(restricted_bond_angle(space, r.k, static_cast<int>(p)));
  return info;
}

// [injector, carrier(-t/2), inverse injector, carrier(t/2)]: conjugation by
// diag(1,..,1,-1) flips the sign of the top bond inside the carrier sum, so
// the two half-pulses cancel everywhere except the top pair.
std::vector<ControlPulse> sandwich_pulses(const TruncatedSpace& space, long long k_inj,
                                          long long k_inv, double t, double phi) {
  std::vector<ControlPulse> seq;
  seq.push_back(restricted_red_pulse(space, k_inj, phi_r));
  append_merged(seq, carrier_signed(-t / 2, phi));
  seq.push_back(restricted_red_pulse(space, k_inv, phi_r));
  append_merged(seq, carrier_signed(t / 2, phi));
  return seq;
}

}  // namespace

std::optional<BoundaryTrio> su4_boundary_generators(double alpha, double eps, long long k_max,
                                                    KScanCache* cache, std::string* diagnostic) {
  const int m = 1, n = 4;
  TruncatedSpace space;
  space.m_max = m;

  const auto inj = find_injector(m, eps / 4, k_max, cache, diagnostic);
  if (!inj) return std::nullopt;

  // realize the injector inverse as a single restricted pulse with index p*k:
  // p from the approximate-inverse power of the injector's controlled block
  const Mat u1c =
      pulse_unitary(space, restricted_red_pulse(space, inj->k, phi_r)).topLeftCorner(n, n);
  const InversePowerResult ipr = approx_inverse_power(u1c, eps / 4, 2'000'000);
  if (!ipr.found) {
    if (diagnostic)
      *diagnostic = "no approximate inverse power of the sign injector within budget";
    return std::nullopt;
  }
  const long long k_inv = ipr.p * inj->k;
  const double dev_inv = restricted_bond_angle(space, k_inv, 1);
  const double sandwich_bound =
      sine_defect(restricted_bond_angle(space, inj->k, 1)) + sine_defect(dev_inv) + bound_slack;

  BoundaryTrio trio;
  trio.injector_k = inj->k;
  trio.inverse_power = ipr.p;

  const auto make_top = [&](char flavor) {
    SynthesisMacro mac;
    const double phi = flavor == 'R' ? phi_r : phi_x;
    mac.name = flavor == 'R' ? "top_bond_r" : "top_bond_x";
    mac.generator = flavor == 'R' ? pattern_r(n, 2, 3) : pattern_x(n, 2, 3);
    mac.alpha = alpha;
    mac.pulses = sandwich_pulses(space, inj->k, k_inv, alpha, phi);
    mac.error_bound = sandwich_bound;
    mac.construction = combine_node(
        "conjugate", "carrier half-pulse conjugated by sign injector",
        {pulse_node("sign injector, k=" + std::to_string(inj->k), mac.pulses[0]),
         ref_node("carrier half-pulses at phase " + std::to_string(phi)),
         pulse_node("injector inverse as single pulse, k=" + std::to_string(k_inv) +
                        " (power " + std::to_string(ipr.p) + ")",
                    restricted_red_pulse(space, k_inv, phi_r))});
    return mac;
  };
  trio.h7 = make_top('R');
  trio.h6 = make_top('X');

  // chain minus top bond: R1 + R2; symmetric split between the red bond
  // (single even-k pulse) and the carrier-minus-top combination
  const Mat r1 = pattern_r(n, 0, 1);
  const Mat r2 = pattern_r(n, 1, 2);
  double strang_bound = 0.0;
  const long long reps = strang_repetitions(r2, r1, alpha, eps / 4, &strang_bound);
  const double tau = alpha / static_cast<double>(reps);

  const double eps_scan = std::max((eps / 4) / (2.0 * static_cast<double>(reps)), 1e-9);
  MacroOutcome red_half = group_generator_macro(m, 1, tau / 2, eps_scan, k_max, cache);
  if (!red_half.ok) {
    if (diagnostic) *diagnostic = "chain-minus-top split infeasible: " + red_half.diagnostic;
    return std::nullopt;
  }

  SynthesisMacro& h8 = trio.h8;
  h8.name = "chain_minus_top";
  h8.generator = r1 + r2;
  h8.alpha = alpha;
  double bound = strang_bound + bound_slack;
  for (long long step = 0; step < reps; ++step) {
    append_all(h8.pulses, red_half.macro.pulses);
    bound += red_half.macro.error_bound;
    // exp(tau R1) = carrier(tau) followed by top bond undone
    append_all(h8.pulses, sandwich_pulses(space, inj->k, k_inv, -tau, phi_r));
    append_merged(h8.pulses, carrier_signed(tau, phi_r));
    bound += sandwich_bound;
    append_all(h8.pulses, red_half.macro.pulses);
    bound += red_half.macro.error_bound;
  }
  h8.error_bound = bound;
  h8.construction = combine_node(
      "strang", "symmetric split of R1 + R2, " + std::to_string(reps) + " repetitions",
      {red_half.macro.construction,
       combine_node("product", "exp(t R1) = carrier * inverted top bond",
                    {ref_node("carrier pulse, exact"), ref_node("top_bond_r at -t")})});
  return trio;
}

namespace {

std::vector<double> weights_from(const Mat& h8) {
  const int n = static_cast<int>(h8.rows());
  std::vector<double> w(n, 0.0);
  for (int j = 1; j + 1 < n; ++j) w[j] = h8(j - 1, j).real();
  return w;
}

std::vector<Mat> weighted_chain(const Mat& h8, const Mat& seed, int n) {
  std::vector<double> w = weights_from(h8);
  std::vector<Mat> out(n + 1, Mat::Zero(n, n));  // out[1..n-1] used
  out[n - 1] = seed;
  for (int j = n - 2; j >= 1; --j)
    out[j] = (commutator(h8, out[j + 1]) + w[j + 1] * out[j + 2]) / w[j];
  out.resize(n);
  return out;
}

}  // namespace

std::vector<Mat> m_chain(const Mat& h8, const Mat& h7, int n) {
  return weighted_chain(h8, h7, n);
}

std::vector<Mat> j_chain(const Mat& h8, const Mat& h6, int n) {
  return weighted_chain(h8, h6, n);
}

ChainWalk s_chain(int m) {
  const SubspaceSelection sel = select_subspace(m);
  if (!sel.valid()) throw std::invalid_argument("s_chain: no witness level for this m");
  const int n = 2 * (m + 1);
  const long long j0 = sel.witness;

  const GroupPartition part = partition_groups(m);
  std::map<long long, Mat> ghat;
  for (const auto& [core, members] : part.groups) ghat[core] = group_generator(m, core);

  Mat h2 = Mat::Zero(n, n);
  Mat h1 = Mat::Zero(n, n);
  for (int j = 1; j < n; j += 2) {
    h2 += pattern_r(n, j - 1, j);
    h1 += pattern_x(n, j - 1, j);
  }

  ChainWalk walk;
  walk.n = n;
  walk.witness = j0;
  walk.s.resize(7);
  walk.t.resize(7);

  // start at the witness bond: its group is a singleton with multiplier 1,
  // so the group generator is the bare bond pattern
  walk.s[0] = ghat.at(squarefree_part(j0));
  walk.t[0] = walk.s[0];
  walk.s[1] = commutator(h2, walk.s[0]);
  walk.t[1] = commutator(h1, walk.s[0]);
  walk.s[2] = commutator(walk.s[0], walk.s[1]);
  walk.t[2] = commutator(walk.s[0], walk.t[1]);

  // kill the left neighbour bond with a double commutator against the group
  // of level j0-1; the group multiplier enters squared
  long long c_left = 0, q_left = 0;
  core_mult(j0 - 1, &c_left, &q_left);
  const Mat& g_left = ghat.at(c_left);
  const double q2 = static_cast<double>(q_left * q_left);
  walk.s[3] = walk.s[2] + commutator(g_left, commutator(g_left, walk.s[2])) / q2;
  walk.t[3] = walk.t[2] + commutator(g_left, commutator(g_left, walk.t[2])) / q2;

  // climb one level at a time up to the top bond
  Mat s4 = walk.s[3];
  Mat t4 = walk.t[3];
  Mat s5, s6, t5, t6;
  for (long long j = j0; j < m; ++j) {
    long long c1 = 0, q1 = 0;
    core_mult(j + 1, &c1, &q1);
    const Mat& gj = ghat.at(c1);
    s5 = commutator(s4, gj);
    s6 = commutator(s5, s4) / static_cast<double>(q1);
    const Mat s4n = commutator(s6, commutator(h2, s6)) - s4;
    t5 = commutator(t4, gj);
    t6 = commutator(t5, s4) / static_cast<double>(q1);
    const Mat t4n = commutator(s6, commutator(h2, t6)) - t4;
    s4 = s4n;
    t4 = t4n;
  }
  walk.s[4] = s5.size() ? s5 : Mat::Zero(n, n);
  walk.s[5] = s6.size() ? s6 : Mat::Zero(n, n);
  walk.t[4] = t5.size() ? t5 : Mat::Zero(n, n);
  walk.t[5] = t6.size() ? t6 : Mat::Zero(n, n);
  walk.s[6] = s4;
  walk.t[6] = t4;

  walk.provenance = combine_node(
      "commutator",
      "walk from witness bond " + std::to_string(2 * j0) + " to the top bond",
      {ref_node("group_rotation(core=" + std::to_string(squarefree_part(j0)) + ")"),
       ref_node("carrier pulses at both phases"),
       ref_node("neighbour-group double commutators with squared multipliers")});
  return walk;
}

std::vector<BasisElement> full_basis(int m) {
  const int n = 2 * (m + 1);
  Mat top_r, top_x, h8;
  ConstructionNode top_src;
  if (m == 1) {
    top_r = pattern_r(n, 2, 3);
    top_x = pattern_x(n, 2, 3);
    h8 = chain_generator(m) - top_r;
    top_src = ref_node("boundary sandwich macros (top_bond_r / top_bond_x)");
  } else {
    const ChainWalk walk = s_chain(m);
    top_r = walk.s[6];
    top_x = walk.t[6];
    h8 = chain_generator(m) - top_r;
    top_src = walk.provenance;
  }

  const std::vector<Mat> ms = m_chain(h8, top_r, n);
  const std::vector<Mat> js = j_chain(h8, top_x, n);

  std::vector<BasisElement> out;
  const auto label_rx = [](const char* kind, int p, int q) {
    return std::string(kind) + "(" + std::to_string(p) + "," + std::to_string(q) + ")";
  };
  for (int p = 1; p < n; ++p) {
    for (int q = p + 1; q <= n; ++q) {
      BasisElement r, x;
      r.label = label_rx("R", p, q);
      x.label = label_rx("X", p, q);
      if (q == n) {
        r.matrix = ms[p];
        x.matrix = js[p];
        r.construction = combine_node("commutator", "weighted transport of the top bond",
                                      {top_src, ref_node("chain_minus_top recursion")});
        x.construction = r.construction;
      } else {
        r.matrix = commutator(ms[q], ms[p]);
        x.matrix = commutator(ms[q], js[p]);
        r.construction = combine_node(
            "commutator", "[" + label_rx("R", q, n) + ", " + label_rx("R", p, n) + "]",
            {ref_node(label_rx("R", q, n)), ref_node(label_rx("R", p, n))});
        x.construction = combine_node(
            "commutator", "[" + label_rx("R", q, n) + ", " + label_rx("X", p, n) + "]",
            {ref_node(label_rx("R", q, n)), ref_node(label_rx("X", p, n))});
      }
      out.push_back(std::move(r));
      out.push_back(std::move(x));
    }
  }
  for (int p = 1; p < n; ++p) {
    BasisElement z;
    z.label = "Z(" + std::to_string(p) + ")";
    const Mat rp = (p + 1 == n) ? ms[p] : commutator(ms[p + 1], ms[p]);
    const Mat xp = (p + 1 == n) ? js[p] : commutator(ms[p + 1], js[p]);
    z.matrix = 0.5 * commutator(xp, -rp);
    z.construction = combine_node("commutator", "0.5 [X(p,p+1), -R(p,p+1)]",
                                  {ref_node("X(" + std::to_string(p) + "," +
                                            std::to_string(p + 1) + ")"),
                                   ref_node("R(" + std::to_string(p) + "," +
                                            std::to_string(p + 1) + ")")});
    out.push_back(std::move(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// pair-rotation kit for the compiler

bool pair_supported(int m, int pair, std::string* why) {
  const int n = 2 * (m + 1);
  if (pair < 0 || pair + 1 >= n) {
    if (why) *why = "pair index out of range";
    return false;
  }
  if (m == 1) return true;
  const int bond = pair + 1;  // 1-based bond
  if (bond % 2 == 1) {
    if (bond == n - 1) return true;  // top bond via injector sandwich
    if (why)
      *why = "carrier bond " + std::to_string(bond) +
             ": interior carrier bonds cannot be isolated, sign injectors flip "
             "them only in pairs";
    return false;
  }
  const long long level = bond / 2;
  long long core = 0, q = 0;
  core_mult(level, &core, &q);
  const GroupPartition part = partition_groups(m);
  if (part.groups.at(core).size() > 1) {
    if (why)
      *why = "red bond at level " + std::to_string(level) + ": locked to squarefree group " +
             std::to_string(core) + ", whose members rotate with fixed integer angle ratios";
    return false;
  }
  return true;
}

std::optional<PairKit> make_pair_kit(int m, double scan_eps, long long k_max, KScanCache* cache,
                                     std::string* diag) {
  (void)cache;
  if (!(scan_eps > 0) || scan_eps > pi) {
    if (diag) *diag = "pair kit needs 0 < scan_eps <= pi";
    return std::nullopt;
  }
  PairKit kit;
  kit.m = m;
  kit.scan_eps = scan_eps;
  kit.k_max = k_max;
  return kit;
}

namespace {

bool ensure_injector(PairKit& kit, KScanCache* cache, std::string* diag) {
  if (kit.injector_k >= 0) return true;
  const auto inj = find_injector(kit.m, kit.scan_eps, kit.k_max, cache, diag);
  if (!inj) return false;
  kit.injector_k = inj->k;
  kit.injector_bound = inj->bound;
  return true;
}

// single even-k pulse rotating an isolated (singleton-core) red bond
MacroOutcome red_bond_macro(const PairKit& kit, int pair, char flavor, double t,
                            KScanCache* cache) {
  const long long level = (pair + 1) / 2;
  MacroOutcome g = group_generator_macro(kit.m, squarefree_part(level), t, kit.scan_eps,
                                         kit.k_max, cache);
  if (!g.ok) return g;
  if (flavor == 'X') {
    g.macro.pulses[0].phi = phi_x;
    const int n = 2 * (kit.m + 1);
    g.macro.generator = pattern_x(n, pair, pair + 1);
    g.macro.name = "bond_rotation_x(pair=" + std::to_string(pair) + ")";
  } else {
    g.macro.name = "bond_rotation_r(pair=" + std::to_string(pair) + ")";
  }
  g.macro.construction.label += flavor == 'X' ? ", X flavour" : ", R flavour";
  return g;
}

}  // namespace

MacroOutcome pair_rotation_macro(PairKit& kit, int pair, char flavor, double t,
                                 KScanCache* cache) {
  MacroOutcome out;
  std::string why;
  if (!pair_supported(kit.m, pair, &why)) {
    out.diagnostic = why;
    return out;
  }
  const int m = kit.m;
  const int n = 2 * (m + 1);
  const int bond = pair + 1;
  TruncatedSpace space;
  space.m_max = m;

  if (flavor == 'Z') {
    // Z(t) = W^-1 exp(-t R_pair) W with W = exp(pi/4 X_pair)
    MacroOutcome w = pair_rotation_macro(kit, pair, 'X', pi / 4, cache);
    if (!w.ok) return w;
    MacroOutcome core = pair_rotation_macro(kit, pair, 'R', -t, cache);
    if (!core.ok) return core;
    SynthesisMacro& mac = out.macro;
    mac.name = "bond_rotation_z(pair=" + std::to_string(pair) + ")";
    mac.generator = pattern_z(n, pair, pair + 1);
    mac.alpha = t;
    append_all(mac.pulses, inverted(w.macro.pulses));
    append_all(mac.pulses, core.macro.pulses);
    append_all(mac.pulses, w.macro.pulses);
    mac.error_bound = core.macro.error_bound + 2 * w.macro.error_bound + bound_slack;
    mac.construction =
        combine_node("conjugate", "conjugate exp(-t R) by exp(pi/4 X) on the pair",
                     {w.macro.construction, core.macro.construction});
    out.ok = true;
    return out;
  }

  const double phi = flavor == 'R' ? phi_r : phi_x;
  SynthesisMacro& mac = out.macro;
  mac.generator = flavor == 'R' ? pattern_r(n, pair, pair + 1) : pattern_x(n, pair, pair + 1);
  mac.alpha = t;

  if (bond % 2 == 0) {
    return red_bond_macro(kit, pair, flavor, t, cache);
  }

  // carrier bonds: top bond via the injector sandwich (exact inverse by
  // phase flip); bond 1 additionally needs the full carrier pulse on top
  if (!ensure_injector(kit, cache, &out.diagnostic)) return out;
  const double tt = (bond == 1) ? -t : t;
  std::vector<ControlPulse> seq;
  seq.push_back(restricted_red_pulse(space, kit.injector_k, phi_r));
  append_merged(seq, carrier_signed(-tt / 2, phi));
  seq.push_back(restricted_red_pulse(space, kit.injector_k, flip(phi_r)));
  append_merged(seq, carrier_signed(tt / 2, phi));
  const std::string fl = flavor == 'R' ? "r" : "x";
  double bound = 2 * kit.injector_bound + bound_slack;
  if (bond == 1) {
    append_merged(seq, carrier_signed(t, phi));
    mac.name = "bond_rotation_" + fl + "(pair=0)";
    mac.construction = combine_node(
        "product", "carrier pulse times inverted top bond",
        {ref_node("carrier pulse, exact"),
         combine_node("conjugate", "top bond at -t via sign injector",
                      {pulse_node("sign injector, k=" + std::to_string(kit.injector_k),
                                  seq[0])})});
  } else {
    mac.name = "bond_rotation_" + fl + "(pair=" + std::to_string(pair) + ")";
    mac.construction = combine_node(
        "conjugate", "carrier half-pulse conjugated by sign injector",
        {pulse_node("sign injector, k=" + std::to_string(kit.injector_k), seq[0]),
         ref_node("carrier half-pulses")});
  }
  mac.pulses = std::move(seq);
  mac.error_bound = bound;
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------

jrep construction_to_json(const ConstructionNode& node) {
  jrep j = jrep::object();
  j["op"] = node.op;
  j["label"] = node.label;
  if (node.scalar != 1.0) j["scalar"] = node.scalar;
  if (node.pulse) j["pulse"] = pulse_to_json(*node.pulse);
  if (!node.children.empty()) {
    jrep kids = jrep::array();
    for (const ConstructionNode& c : node.children) kids.push_back(construction_to_json(c));
    j["children"] = kids;
  }
  return j;
}

jrep macro_to_json(const SynthesisMacro& macro) {
  jrep j = jrep::object();
  j["name"] = macro.name;
  j["alpha"] = macro.alpha;
  j["ideal_generator"] = mat_to_json(macro.generator);
  j["pulse_count"] = macro.pulses.size();
  j["pulses"] = pulses_to_json(macro.pulses);
  j["error_bound"] = macro.error_bound;
  j["construction"] = construction_to_json(macro.construction);
  if (macro.kinfo) {
    nlohmann::ordered_json k;
    to_json(k, *macro.kinfo);
    j["k_search"] = k;
  }
  return j;
}

}  // namespace jcpulse
