#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "jcpulse/types.hpp"

namespace jcpulse {

// Search for a restricted-pulse index k such that every ladder level whose
// squarefree core differs from target_core picks up a bond angle within
// epsilon of zero (mod 2pi), while the target level (smallest member of the
// target core's group) lands within epsilon of target_angle. Levels sharing
// the target core are reported but not constrained: their angles are integer
// multiples of the target level's angle by construction.
struct KSearchSpec {
  int m = 1;
  long long target_core = 1;
  double target_angle = 0.0;  // interpreted mod 2pi
  double epsilon = 0.1;       // 0 < epsilon <= pi
  long long k_max = 10'000'000;
  enum class Parity { any, even, odd };
  Parity parity = Parity::any;
};

struct KSearchResult {
  bool found = false;
  long long k = 0;  // smallest admissible k, or the least-violating candidate
  std::map<long long, double> achieved_angles;  // level -> wrapped angle at k
  double max_offtarget_deviation = 0.0;
  double target_deviation = 0.0;
  double worst_constraint = 0.0;  // max over all constraints, selection metric
};

KSearchResult find_k_serial(const KSearchSpec& spec);
KSearchResult find_k_parallel(const KSearchSpec& spec);  // bit-identical to serial

// Advisory JSON cache for k searches. A missing or unreadable file is
// ignored with a warning; writes go through a temp file plus rename.
class KScanCache {
 public:
  KScanCache() = default;
  explicit KScanCache(std::string path);
  bool enabled() const { return !path_.empty(); }
  const std::string& path() const { return path_; }
  static std::string key(const KSearchSpec& spec);
  std::optional<KSearchResult> lookup(const KSearchSpec& spec) const;
  void store(const KSearchSpec& spec, const KSearchResult& result);

 private:
  std::string path_;
  std::shared_ptr<nlohmann::ordered_json> data_;
};

KSearchResult find_k(const KSearchSpec& spec, KScanCache* cache = nullptr,
                     bool parallel = true);

// Smallest p <= p_max with ||U^{p+1} - I||_HS <= eps, so that U^p approximates
// U^{-1}. The scan runs over the eigenphases of U; a hit is certified against
// the directly computed matrix power before it is returned. The identity
// ||U^p - U^{-1}||_HS = ||U^{p+1} - I||_HS is asserted on every return.
struct InversePowerResult {
  bool found = false;
  long long p = 0;
  double residual = 0.0;  // certified ||U^{p+1} - I||_HS
};
InversePowerResult approx_inverse_power(const Mat& u, double eps, long long p_max);

Mat matrix_power(const Mat& u, long long p);

void to_json(nlohmann::ordered_json& j, const KSearchResult& r);
void from_json(const nlohmann::ordered_json& j, KSearchResult& r);

}  // namespace jcpulse
