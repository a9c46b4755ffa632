#ifndef BPR_BANDPASS_HPP
#define BPR_BANDPASS_HPP

#include <vector>

#include "bpr/grid.hpp"
#include "bpr/operators.hpp"

namespace bpr {

/// Window geometry: a flat passband of patch_dim - 2*stopband bins per axis,
/// tapered over `stopband` bins on each side.
struct WindowSpec {
  int patch_ny = 64;
  int patch_nz = 64;
  int stopband = 10;
};

/// Separable 2-D window: per axis, the passband indicator circularly convolved
/// with a Gaussian truncated at +-stopband (sigma = stopband/3), normalized so
/// the window equals 1 exactly on the passband interior. Values in [0, 1],
/// symmetric under i -> dim-1-i.
RealGrid make_window(const WindowSpec& spec);

/// Patch tiling of a (padded) full grid. Centers are bin offsets from the
/// full-grid DC; starts are the corresponding top-left corners.
struct PatchGeometry {
  int full_ny = 0, full_nz = 0;
  int patch_ny = 0, patch_nz = 0;
  int stopband = 0;
  double overlap_y = 0.0, overlap_z = 0.0;
  std::vector<int> starts_y, starts_z;
  std::vector<PatchCenter> centers; // row-major over (starts_y, starts_z)
};

/// Lay patch centers on a regular stride grid (stride = floor(patch*(1-overlap)),
/// last row/column shifted inward so all patches stay in bounds) and verify
/// coverage: every bin farther than `stopband` from the grid border must lie
/// within ceil(stopband/2) of some patch passband. That threshold makes the
/// minimum covering overlap fraction exactly stopband/patch_dim. Throws
/// CoverageError listing the uncovered bins otherwise.
PatchGeometry plan_patches(int full_ny, int full_nz, int patch_ny, int patch_nz,
                           double overlap_y, double overlap_z, int stopband);

/// Zero border of `pad` bins on all four k-space edges; the DC bin moves with
/// the centered convention. crop_kspace is the exact inverse.
MultiCoilKSpace pad_kspace(const MultiCoilKSpace& ksp, int pad);
MultiCoilKSpace crop_kspace(const MultiCoilKSpace& ksp, int pad);
RealGrid pad_mask(const RealGrid& mask, int pad);

/// Contiguous sub-block copy centered at `center`; no windowing applied.
MultiCoilKSpace extract_patch(const MultiCoilKSpace& ksp_full, PatchCenter center,
                              int patch_ny, int patch_nz);
RealGrid extract_patch(const RealGrid& grid_full, PatchCenter center, int patch_ny, int patch_nz);

/// Write a patch block back at its location (overwrites; test/debug helper).
void insert_patch(MultiCoilKSpace& ksp_full, const MultiCoilKSpace& patch, PatchCenter center);

/// Overlap-average recombination: each full-grid bin is the sum of the
/// contributing (already windowed) patch values divided by the sum of the
/// contributing window weights. Patches are accumulated in the given order so
/// results are bit-reproducible. A bin with zero total weight raises
/// CoverageError.
MultiCoilKSpace recombine(const std::vector<std::pair<PatchCenter, MultiCoilKSpace>>& patches,
                          const PatchGeometry& geometry, const RealGrid& window);

/// Replace reconstructed bins with measured values wherever mask == 1.
/// Measured bins are copied bit-exact; mask must be strictly binary.
MultiCoilKSpace hard_data_projection(const MultiCoilKSpace& recon_ksp,
                                     const MultiCoilKSpace& measured, const RealGrid& mask);

} // namespace bpr

#endif
