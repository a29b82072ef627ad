#include "jcpulse/kscan.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

#include "jcpulse/arith.hpp"
#include "jcpulse/model.hpp"

namespace jcpulse {

namespace {

struct ScanPlan {
  std::vector<long long> levels;             // 1..m
  std::vector<long double> coeff;            // pi*sqrt(p/(m+1)) per level
  std::vector<int> suppressed;               // indices into levels
  int target_index = -1;                     // index of the constrained level
  double target_angle = 0.0;                 // wrapped
  long long k_start = 1;
  long long k_step = 1;
};

ScanPlan make_plan(const KSearchSpec& spec) {
  if (spec.m < 1) throw std::invalid_argument("find_k needs m >= 1");
  if (!(spec.epsilon > 0.0) || spec.epsilon > pi)
    throw std::invalid_argument("find_k needs 0 < epsilon <= pi");
  if (spec.k_max < 1) throw std::invalid_argument("find_k needs k_max >= 1");
  ScanPlan plan;
  const long double m1 = static_cast<long double>(spec.m + 1);
  for (long long p = 1; p <= spec.m; ++p) {
    plan.levels.push_back(p);
    plan.coeff.push_back(static_cast<long double>(pi) *
                         std::sqrt(static_cast<long double>(p) / m1));
    const int idx = static_cast<int>(plan.levels.size()) - 1;
    if (squarefree_part(p) == spec.target_core) {
      if (plan.target_index < 0) plan.target_index = idx;
    } else {
      plan.suppressed.push_back(idx);
    }
  }
  if (plan.target_index < 0)
    throw std::invalid_argument("target core has no level in 1..m");
  plan.target_angle = wrap_angle(static_cast<long double>(spec.target_angle));
  switch (spec.parity) {
    case KSearchSpec::Parity::any:
      plan.k_start = 1;
      plan.k_step = 1;
      break;
    case KSearchSpec::Parity::even:
      plan.k_start = 2;
      plan.k_step = 2;
      break;
    case KSearchSpec::Parity::odd:
      plan.k_start = 1;
      plan.k_step = 2;
      break;
  }
  return plan;
}

// Worst constraint excess at k: off-target levels against |angle| <= eps,
// target level against |angle - target| <= eps (both mod 2pi).
double constraint_at(const ScanPlan& plan, long long k, double* off_dev, double* tgt_dev) {
  double off = 0.0;
  for (int idx : plan.suppressed) {
    const double a = std::fabs(wrap_angle(static_cast<long double>(k) * plan.coeff[idx]));
    off = std::max(off, a);
  }
  const double at = wrap_angle(static_cast<long double>(k) * plan.coeff[plan.target_index]);
  const double tdev = std::fabs(wrap_angle(static_cast<long double>(at) -
                                           static_cast<long double>(plan.target_angle)));
  if (off_dev) *off_dev = off;
  if (tgt_dev) *tgt_dev = tdev;
  return std::max(off, tdev);
}

KSearchResult result_at(const KSearchSpec& spec, const ScanPlan& plan, long long k, bool found) {
  KSearchResult r;
  r.found = found;
  r.k = k;
  for (size_t i = 0; i < plan.levels.size(); ++i)
    r.achieved_angles[plan.levels[i]] =
        wrap_angle(static_cast<long double>(k) * plan.coeff[i]);
  r.worst_constraint = constraint_at(plan, k, &r.max_offtarget_deviation, &r.target_deviation);
  (void)spec;
  return r;
}

struct ChunkOutcome {
  long long hit = -1;         // first admissible k in chunk, -1 if none
  long long best_k = -1;      // least-violating k in chunk
  double best_violation = 0.0;
};

ChunkOutcome scan_range(const ScanPlan& plan, double eps, long long first, long long last) {
  ChunkOutcome out;
  out.best_violation = std::numeric_limits<double>::infinity();
  for (long long k = first; k <= last; k += plan.k_step) {
    double off = 0.0, tdev = 0.0;
    const double worst = constraint_at(plan, k, &off, &tdev);
    if (worst < out.best_violation) {
      out.best_violation = worst;
      out.best_k = k;
    }
    if (off <= eps && tdev <= eps) {
      out.hit = k;
      return out;
    }
  }
  return out;
}

}  // namespace

KSearchResult find_k_serial(const KSearchSpec& spec) {
  const ScanPlan plan = make_plan(spec);
  const ChunkOutcome out = scan_range(plan, spec.epsilon, plan.k_start, spec.k_max);
  if (out.hit >= 0) return result_at(spec, plan, out.hit, true);
  return result_at(spec, plan, out.best_k, false);
}

KSearchResult find_k_parallel(const KSearchSpec& spec) {
  const ScanPlan plan = make_plan(spec);
  const long long chunk = 1 << 16;
  const int lanes = std::max(1, omp_get_max_threads()) * 4;

  long long best_k = -1;
  double best_violation = std::numeric_limits<double>::infinity();
  for (long long round_start = plan.k_start; round_start <= spec.k_max;
       round_start += chunk * static_cast<long long>(lanes)) {
    std::vector<ChunkOutcome> outcomes(lanes);
#pragma omp parallel for schedule(dynamic, 1)
    for (int lane = 0; lane < lanes; ++lane) {
      const long long first = round_start + chunk * static_cast<long long>(lane);
      if (first > spec.k_max) continue;
      const long long last = std::min(spec.k_max, first + chunk - 1);
      // keep the parity lattice aligned with the serial scan
      long long aligned = first;
      if ((aligned - plan.k_start) % plan.k_step != 0) ++aligned;
      if (aligned <= last) outcomes[lane] = scan_range(plan, spec.epsilon, aligned, last);
    }
    for (const ChunkOutcome& out : outcomes) {
      if (out.best_k >= 0 && out.best_violation < best_violation) {
        best_violation = out.best_violation;
        best_k = out.best_k;
      }
      if (out.hit >= 0) return result_at(spec, plan, out.hit, true);
    }
  }
  return result_at(spec, plan, best_k, false);
}

KSearchResult find_k(const KSearchSpec& spec, KScanCache* cache, bool parallel) {
  if (cache && cache->enabled()) {
    if (auto hit = cache->lookup(spec); hit && hit->found) return *hit;
  }
  KSearchResult r = parallel ? find_k_parallel(spec) : find_k_serial(spec);
  if (cache && cache->enabled() && r.found) cache->store(spec, r);
  return r;
}

// ---------------------------------------------------------------------------

KScanCache::KScanCache(std::string path)
    : path_(std::move(path)), data_(std::make_shared<nlohmann::ordered_json>()) {
  if (path_.empty()) return;
  std::ifstream in(path_);
  if (!in.good()) return;  // fresh cache
  try {
    in >> *data_;
    if (!data_->is_object()) throw std::runtime_error("cache root is not an object");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: ignoring unreadable k-scan cache %s (%s)\n", path_.c_str(),
                 e.what());
    *data_ = nlohmann::ordered_json::object();
  }
}

std::string KScanCache::key(const KSearchSpec& spec) {
  const char* par = spec.parity == KSearchSpec::Parity::any
                        ? "any"
                        : (spec.parity == KSearchSpec::Parity::even ? "even" : "odd");
  char buf[160];
  std::snprintf(buf, sizeof buf, "m=%d core=%lld target=%.9f eps=%.9g parity=%s", spec.m,
                spec.target_core, wrap_angle(static_cast<long double>(spec.target_angle)),
                spec.epsilon, par);
  return buf;
}

std::optional<KSearchResult> KScanCache::lookup(const KSearchSpec& spec) const {
  if (!enabled() || !data_) return std::nullopt;
  const auto it = data_->find(key(spec));
  if (it == data_->end()) return std::nullopt;
  try {
    KSearchResult r;
    from_json(*it, r);
    // the key does not carry k_max: an index found under a larger scan bound
    // must not be served to a caller with a smaller one
    if (r.k > spec.k_max) return std::nullopt;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void KScanCache::store(const KSearchSpec& spec, const KSearchResult& result) {
  if (!enabled() || !data_) return;
  nlohmann::ordered_json j;
  to_json(j, result);
  (*data_)[key(spec)] = j;
  const std::string tmp = path_ + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out.good()) {
      std::fprintf(stderr, "warning: cannot write k-scan cache %s\n", tmp.c_str());
      return;
    }
    out << data_->dump(1) << '\n';
  }
  if (std::rename(tmp.c_str(), path_.c_str()) != 0)
    std::fprintf(stderr, "warning: cannot move k-scan cache into place at %s\n", path_.c_str());
}

void to_json(nlohmann::ordered_json& j, const KSearchResult& r) {
  j = nlohmann::ordered_json::object();
  j["found"] = r.found;
  j["k"] = r.k;
  nlohmann::ordered_json angles = nlohmann::ordered_json::object();
  for (const auto& [level, angle] : r.achieved_angles) angles[std::to_string(level)] = angle;
  j["achieved_angles"] = angles;
  j["max_offtarget_deviation"] = r.max_offtarget_deviation;
  j["target_deviation"] = r.target_deviation;
  j["worst_constraint"] = r.worst_constraint;
}

void from_json(const nlohmann::ordered_json& j, KSearchResult& r) {
  r.found = j.at("found").get<bool>();
  r.k = j.at("k").get<long long>();
  r.achieved_angles.clear();
  for (const auto& [key, val] : j.at("achieved_angles").items())
    r.achieved_angles[std::stoll(key)] = val.get<double>();
  r.max_offtarget_deviation = j.at("max_offtarget_deviation").get<double>();
  r.target_deviation = j.at("target_deviation").get<double>();
  r.worst_constraint = j.at("worst_constraint").get<double>();
}

// ---------------------------------------------------------------------------

Mat matrix_power(const Mat& u, long long p) {
  Mat acc = Mat::Identity(u.rows(), u.cols());
  Mat base = u;
  long long e = p;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return acc;
}

InversePowerResult approx_inverse_power(const Mat& u, double eps, long long p_max) {
  if (!(eps > 0)) throw std::invalid_argument("approx_inverse_power needs eps > 0");
  const Eigen::Index n = u.rows();
  Eigen::ComplexEigenSolver<Mat> es(u, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  std::vector<double> phase(n);
  for (Eigen::Index j = 0; j < n; ++j) phase[j] = std::arg(es.eigenvalues()(j));

  InversePowerResult out;
  for (long long p = 1; p <= p_max; ++p) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double half = 0.5 * wrap_angle(static_cast<long double>(p + 1) *
                                           static_cast<long double>(phase[j]));
      s += 4.0 * std::sin(half) * std::sin(half);
    }
    if (std::sqrt(s) > eps * (1.0 + 1e-9)) continue;
    // certify against the actual matrix power
    const Mat up = matrix_power(u, p);
    const double direct = (up * u - Mat::Identity(n, n)).norm();
    if (direct > eps) continue;
    const double via_inverse = (up - u.adjoint()).norm();
    if (std::fabs(direct - via_inverse) > 1e-9)
      throw std::runtime_error("inverse-power identity violated beyond tolerance");
    out.found = true;
    out.p = p;
    out.residual = direct;
    return out;
  }
  return out;
}

}  // namespace jcpulse
