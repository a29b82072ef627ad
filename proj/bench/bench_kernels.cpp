// Timing comparison between the OpenMP kernels and their serial references.
// Every parallel result is checked against the serial one before a time is
// reported; a disagreement makes the run exit nonzero, so this doubles as a
// stress test for the bit-identical contract.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "jcpulse/kscan.hpp"
#include "jcpulse/model.hpp"
#include "jcpulse/simulator.hpp"

using namespace jcpulse;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename F>
double best_of(int reps, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = clock_type::now();
    fn();
    const double secs = std::chrono::duration<double>(clock_type::now() - t0).count();
    if (secs < best) best = secs;
  }
  return best;
}

bool same_result(const KSearchResult& a, const KSearchResult& b) {
  return a.found == b.found && a.k == b.k && a.worst_constraint == b.worst_constraint &&
         a.achieved_angles == b.achieved_angles;
}

int failures = 0;

void bench_scan(const char* label, const KSearchSpec& spec) {
  KSearchResult rs, rp;
  const double ts = best_of(3, [&] { rs = find_k_serial(spec); });
  const double tp = best_of(3, [&] { rp = find_k_parallel(spec); });
  const bool ok = same_result(rs, rp);
  if (!ok) ++failures;
  std::printf("%-34s k=%-8lld serial %8.3f ms  parallel %8.3f ms  x%.2f  %s\n", label,
              rs.found ? rs.k : -1, ts * 1e3, tp * 1e3, ts / tp,
              ok ? "identical" : "MISMATCH");
}

void bench_batch(int m, int count, int length) {
  const TruncatedSpace space{m, 1};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  std::uniform_int_distribution<long long> kdist(1, 400);
  std::vector<std::vector<ControlPulse>> items(count);
  for (auto& seq : items) {
    seq.reserve(length);
    for (int i = 0; i < length; ++i) {
      if (i % 2 == 0)
        seq.push_back(carrier_pulse(angle(rng), angle(rng)));
      else
        seq.push_back(restricted_red_pulse(space, kdist(rng), angle(rng)));
    }
  }
  std::vector<EvaluationReport> rs, rp;
  const double ts = best_of(3, [&] { rs = batch_evaluate(space, items, std::nullopt, false); });
  const double tp = best_of(3, [&] { rp = batch_evaluate(space, items, std::nullopt, true); });
  bool ok = rs.size() == rp.size();
  for (size_t i = 0; ok && i < rs.size(); ++i)
    ok = (rs[i].achieved - rp[i].achieved).cwiseAbs().maxCoeff() == 0.0 &&
         rs[i].leakage == rp[i].leakage;
  if (!ok) ++failures;
  std::printf("batch m=%d %dx%d pulses              serial %8.3f ms  parallel %8.3f ms  x%.2f  %s\n",
              m, count, length, ts * 1e3, tp * 1e3, ts / tp, ok ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  KSearchSpec deep;
  deep.m = 4;
  deep.target_core = 3;
  deep.target_angle = pi / 2;
  deep.epsilon = 0.05;
  deep.parity = KSearchSpec::Parity::even;

  KSearchSpec mid = deep;
  mid.target_core = 2;
  mid.target_angle = 0.7;
  mid.epsilon = 0.1;

  KSearchSpec shallow;
  shallow.m = 1;
  shallow.target_core = 1;
  shallow.target_angle = 0.0;
  shallow.epsilon = 0.003;

  bench_scan("k-scan m=4 core=3 eps=0.05 even", deep);
  bench_scan("k-scan m=4 core=2 eps=0.10 even", mid);
  bench_scan("k-scan m=1 core=1 eps=0.003", shallow);
  bench_batch(4, 256, 96);
  bench_batch(1, 512, 64);

  if (failures) std::printf("%d kernel(s) disagree with the serial reference\n", failures);
  return failures ? 1 : 0;
}
