#ifndef BPR_SAMPLING_HPP
#define BPR_SAMPLING_HPP

#include <cstdint>

#include "bpr/grid.hpp"

namespace bpr {

enum class MaskDensity { Uniform, Variable };

/// Pseudo-random Poisson-disc subsampling pattern. The central calib x calib
/// block is always fully sampled; outside it, samples keep a minimum distance
/// r(k) from each other (constant for Uniform; growing with |k| for Variable,
/// r(k) = r0 * (1 + vd_power * |k| / k_max)). The base radius is calibrated by
/// bisection so the achieved reduction factor lands within +-10% of target_R.
struct MaskSpec {
  int ny = 0;
  int nz = 0;
  double target_R = 4.0;
  MaskDensity density = MaskDensity::Variable;
  double vd_power = 2.0;
  int calib = 20;
  uint64_t seed = 0;
};

/// Deterministic under (seed, spec). Throws InvalidInput when the target
/// reduction factor is infeasible for the grid/calibration size. When
/// calibrated_r0 is non-null it receives the base radius the bisection
/// settled on (so the disc property can be checked externally).
RealGrid generate_mask(const MaskSpec& spec, double* calibrated_r0 = nullptr);

/// Total bins divided by sampled bins; mask must be binary with at least one
/// sampled bin.
double achieved_R(const RealGrid& mask);

} // namespace bpr

#endif
