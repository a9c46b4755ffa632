#include "bpr/parallel.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "bpr/network.hpp"
#include "bpr/rng.hpp"
#include "bpr/sampling.hpp"
#include "bpr/simulate.hpp"

namespace bpr {

std::vector<MultiCoilKSpace> run_patches(const std::vector<std::function<MultiCoilKSpace()>>& jobs,
                                         int workers) {
  if (workers < 1) throw InvalidInput("run_patches: workers must be >= 1");
  std::vector<MultiCoilKSpace> results(jobs.size());
  if (jobs.empty()) return results;

  if (workers == 1) {
    for (size_t i = 0; i < jobs.size(); ++i) results[i] = jobs[i]();
    return results;
  }

  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  size_t failed_index = jobs.size();
  std::string failed_message;
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        results[i] = jobs[i]();
      } catch (const std::exception& e) {
        std::scoped_lock lock(err_mutex);
        if (i < failed_index) {
          failed_index = i;
          failed_message = e.what();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(workers, static_cast<int>(jobs.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed_index < jobs.size())
    throw Error("run_patches: job " + std::to_string(failed_index) +
                " failed: " + failed_message);
  return results;
}

std::vector<BenchRecord> bench_patch_time(const std::vector<int>& patch_dims, int n_iter,
                                          int feature_width, int nc, int runs, uint64_t seed) {
  if (runs < 1) throw InvalidInput("bench_patch_time: runs must be >= 1");
  using clock = std::chrono::steady_clock;
  std::vector<BenchRecord> records;
  for (int dim : patch_dims) {
    const UnrolledNetParams params = UnrolledNetParams::initial(n_iter, 1, feature_width, seed);
    const SensitivityMaps maps = make_coils({nc, 0.7, 1, seed}, dim, dim);
    const RealGrid window = make_window({dim, dim, std::min(10, (dim - 1) / 2)});
    // timing only cares about dimensions; a seeded random ~R=3 mask suffices
    Rng rng(seed ^ 0x5eedULL);
    RealGrid mask(dim, dim, 0.0);
    for (auto& v : mask.data) v = rng.next_double() < (1.0 / 3.0) ? 1.0 : 0.0;
    MultiCoilKSpace u(nc, dim, dim);
    for (auto& coil : u.coils)
      for (auto& v : coil.data) v = cdouble(rng.next_normal(), rng.next_normal());
    for (int c = 0; c < nc; ++c) mul_inplace(mask, u.coils[c]);

    // Warm-up run excluded from the statistics (plan creation, caches).
    (void)reconstruct_patch(u, maps, mask, window, {0, 0}, params);

    std::vector<double> ms(runs);
    for (int r = 0; r < runs; ++r) {
      const auto t0 = clock::now();
      (void)reconstruct_patch(u, maps, mask, window, {0, 0}, params);
      const auto t1 = clock::now();
      ms[r] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    double mean = 0.0;
    for (double v : ms) mean += v;
    mean /= runs;
    double var = 0.0;
    for (double v : ms) var += (v - mean) * (v - mean);
    var = (runs > 1) ? var / (runs - 1) : 0.0;
    records.push_back({dim, mean, std::sqrt(var), runs});
  }
  return records;
}

} // namespace bpr
