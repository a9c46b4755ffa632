#include "bpr/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "bpr/rng.hpp"

namespace bpr {
namespace {

constexpr int kFailureBudget = 4000; // consecutive rejected darts before giving up

struct CalibBlock {
  int y0, y1, z0, z1; // half-open
  bool contains(int y, int z) const { return y >= y0 && y < y1 && z >= z0 && z < z1; }
};

CalibBlock calib_block(const MaskSpec& spec) {
  const int cy = spec.ny / 2 - spec.calib / 2;
  const int cz = spec.nz / 2 - spec.calib / 2;
  return {cy, cy + spec.calib, cz, cz + spec.calib};
}

double local_radius(const MaskSpec& spec, double r0, int y, int z) {
  if (spec.density == MaskDensity::Uniform) return r0;
  const double dy = y - spec.ny / 2;
  const double dz = z - spec.nz / 2;
  const double k_max = std::sqrt(double(spec.ny / 2) * (spec.ny / 2) +
                                 double(spec.nz / 2) * (spec.nz / 2));
  return r0 * (1.0 + spec.vd_power * std::sqrt(dy * dy + dz * dz) / k_max);
}

// Dart throwing on integer bins, the mask doubling as the neighbor index. A
// candidate is rejected when a sampled non-calibration bin lies strictly
// within its local radius. Accepting stops at n_target samples, so the
// achieved count is exact whenever the radius leaves enough room.
RealGrid throw_darts(const MaskSpec& spec, double r0, long n_target, long* n_accepted) {
  RealGrid mask(spec.ny, spec.nz, 0.0);
  const CalibBlock cal = calib_block(spec);
  for (int y = cal.y0; y < cal.y1; ++y)
    for (int z = cal.z0; z < cal.z1; ++z) mask.at(y, z) = 1.0;

  Rng rng(spec.seed);
  long accepted = 0;
  int consecutive_failures = 0;
  while (accepted < n_target && consecutive_failures < kFailureBudget) {
    const int y = static_cast<int>(rng.next_below(spec.ny));
    const int z = static_cast<int>(rng.next_below(spec.nz));
    if (mask.at(y, z) == 1.0 || cal.contains(y, z)) {
      ++consecutive_failures;
      continue;
    }
    const double r = local_radius(spec, r0, y, z);
    const int reach = static_cast<int>(std::ceil(r)) - 1;
    bool blocked = false;
    for (int dy = -reach; dy <= reach && !blocked; ++dy) {
      const int yy = y + dy;
      if (yy < 0 || yy >= spec.ny) continue;
      for (int dz = -reach; dz <= reach; ++dz) {
        const int zz = z + dz;
        if (zz < 0 || zz >= spec.nz || (dy == 0 && dz == 0)) continue;
        if (mask.at(yy, zz) != 1.0 || cal.contains(yy, zz)) continue;
        if (double(dy) * dy + double(dz) * dz < r * r) {
          blocked = true;
          break;
        }
      }
    }
    if (blocked) {
      ++consecutive_failures;
    } else {
      mask.at(y, z) = 1.0;
      ++accepted;
      consecutive_failures = 0;
    }
  }
  *n_accepted = accepted;
  return mask;
}

} // namespace

double achieved_R(const RealGrid& mask) {
  long sampled = 0;
  for (double v : mask.data) {
    if (v != 0.0 && v != 1.0) throw InvalidInput("achieved_R: mask is not binary");
    if (v == 1.0) ++sampled;
  }
  if (sampled == 0) throw InvalidInput("achieved_R: mask has no sampled bins");
  return static_cast<double>(mask.size()) / static_cast<double>(sampled);
}

RealGrid generate_mask(const MaskSpec& spec, double* calibrated_r0) {
  if (spec.ny < 1 || spec.nz < 1) throw InvalidInput("generate_mask: bad dimensions");
  if (spec.calib < 0 || spec.calib > std::min(spec.ny, spec.nz))
    throw InvalidInput("generate_mask: calibration region exceeds grid");
  if (spec.vd_power < 0.0) throw InvalidInput("generate_mask: density power must be >= 0");
  if (spec.target_R < 1.0) throw InvalidInput("generate_mask: target_R must be >= 1");
  if (spec.target_R == 1.0) {
    if (calibrated_r0) *calibrated_r0 = 0.0;
    return RealGrid(spec.ny, spec.nz, 1.0);
  }

  const long total = static_cast<long>(spec.ny) * spec.nz;
  const long calib_bins = static_cast<long>(spec.calib) * spec.calib;
  const long want = std::lround(static_cast<double>(total) / spec.target_R);
  const long n_target = want - calib_bins;
  if (n_target <= 0)
    throw InvalidInput("generate_mask: target_R " + std::to_string(spec.target_R) +
                       " infeasible, calibration region alone caps R at " +
                       std::to_string(static_cast<double>(total) / calib_bins));

  // The largest base radius whose saturation still admits n_target samples
  // gives the target count with the best spread; bisect on feasibility. A
  // base radius keeping every local radius <= 1 never blocks distinct bins,
  // so the lower bracket always works.
  const double vd_gain = spec.density == MaskDensity::Variable ? 1.0 + spec.vd_power : 1.0;
  double lo = 1.0 / vd_gain, hi = std::max(2.0, 4.0 * std::sqrt(spec.target_R) + 2.0);
  long accepted = 0;
  RealGrid best = throw_darts(spec, lo, n_target, &accepted);
  if (accepted < n_target)
    throw InvalidInput("generate_mask: target_R " + std::to_string(spec.target_R) +
                       " infeasible for this grid");
  double best_r0 = lo;
  for (int iter = 0; iter < 24 && hi - lo > 1e-3 * lo; ++iter) {
    const double mid = 0.5 * (lo + hi);
    RealGrid mask = throw_darts(spec, mid, n_target, &accepted);
    if (accepted >= n_target) {
      best = std::move(mask);
      best_r0 = mid;
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r = achieved_R(best);
  if (std::abs(r / spec.target_R - 1.0) > 0.10)
    throw InvalidInput("generate_mask: could not reach target_R " +
                       std::to_string(spec.target_R) + " (achieved " + std::to_string(r) + ")");
  if (calibrated_r0) *calibrated_r0 = best_r0;
  return best;
}

} // namespace bpr
