#ifndef BPR_PARALLEL_HPP
#define BPR_PARALLEL_HPP

#include <functional>
#include <vector>

#include "bpr/grid.hpp"

namespace bpr {

/// Execute independent patch jobs over a fixed worker pool. Each job writes a
/// preallocated slot indexed by job id, so outputs are bit-identical to serial
/// execution in job order regardless of scheduling. A failing job aborts the
/// run; its index is reported in the rethrown error.
std::vector<MultiCoilKSpace> run_patches(const std::vector<std::function<MultiCoilKSpace()>>& jobs,
                                         int workers);

struct BenchRecord {
  int patch_dim = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  int runs = 0;
};

/// Reconstruct a single synthetic patch of each dimension `runs` times
/// (monotonic clock, one warm-up run excluded) and report mean/std wall time.
std::vector<BenchRecord> bench_patch_time(const std::vector<int>& patch_dims, int n_iter,
                                          int feature_width, int nc, int runs, uint64_t seed);

} // namespace bpr

#endif
