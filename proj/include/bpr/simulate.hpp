#ifndef BPR_SIMULATE_HPP
#define BPR_SIMULATE_HPP

#include <cstdint>

#include "bpr/grid.hpp"
#include "bpr/operators.hpp"

namespace bpr {

/// Randomized ellipse phantom: superposed ellipses with a smooth low-order
/// polynomial phase. Deterministic per seed.
struct PhantomSpec {
  int ny = 96;
  int nz = 96;
  int n_ellipses = 8;
  double intensity_min = 0.2;
  double intensity_max = 1.0;
  double phase_scale = 2.0; // radians across the field of view
  uint64_t seed = 0;
};

/// Synthetic coil profiles: Gaussian lobes at distinct border locations with
/// smooth per-coil phase, jointly normalized so sum_c |S_c|^2 = 1 wherever the
/// lobes provide coverage (and <= 1 everywhere).
struct CoilSpec {
  int nc = 4;
  double width_scale = 0.7; // lobe sigma as a fraction of the grid extent
  int nsets = 1;
  uint64_t seed = 0;
};

ComplexGrid make_phantom(const PhantomSpec& spec);

SensitivityMaps make_coils(const CoilSpec& spec, int ny, int nz);

/// Fully sampled multi-coil k-space of a phantom: the forward model at full
/// grid size. Ground truth for training and evaluation.
MultiCoilKSpace synthesize_kspace(const ComplexGrid& phantom, const SensitivityMaps& maps);

} // namespace bpr

#endif
