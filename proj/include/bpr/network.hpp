#ifndef BPR_NETWORK_HPP
#define BPR_NETWORK_HPP

#include <functional>
#include <string>

#include "bpr/bandpass.hpp"
#include "bpr/denoiser.hpp"
#include "bpr/grid.hpp"
#include "bpr/operators.hpp"

namespace bpr {

/// One unrolled iteration: a gradient (update) step with its own learned step
/// size, followed by its own denoising block.
struct IterationParams {
  double step_size = -2.0;
  DenoiserParams denoiser;
};

struct UnrolledNetParams {
  int nsets = 1;
  int feature_width = 16;
  std::vector<IterationParams> iterations;

  int n_iter() const { return static_cast<int>(iterations.size()); }
  void validate() const;

  /// Step sizes 0 and identity denoisers: the network passes data through.
  static UnrolledNetParams identity(int n_iter, int nsets, int feature_width);
  /// Training start: step sizes -2, He-initialized denoisers, near-identity
  /// contracting layers.
  static UnrolledNetParams initial(int n_iter, int nsets, int feature_width, uint64_t seed);
};

/// Gradient step on the windowed least-squares objective: y + t * grad.
ImageSet update_block(const ImageSet& y, const MultiCoilKSpace& u, const SensitivityMaps& maps,
                      const RealGrid& mask, const RealGrid& window, PatchCenter center,
                      double t);

/// Single-example denoising block. Train mode normalizes with the example's
/// own statistics (running statistics are not touched); Frozen mode uses the
/// stored running statistics.
ImageSet denoise_block(const ImageSet& y, const DenoiserParams& params, NormMode mode);

/// RMS magnitude of the windowed measured patch, used to run the unrolled
/// iterations at unit scale (1.0 for an all-zero patch). Undone at the output.
double patch_problem_scale(const MultiCoilKSpace& windowed_u);

/// Full patch inference: y0 = B'(W u), n_iter alternating update/denoise
/// blocks, output W * A(phase(y)) over the whole patch, and a per-patch hard
/// projection of the windowed measured bins.
MultiCoilKSpace reconstruct_patch(const MultiCoilKSpace& u, const SensitivityMaps& maps,
                                  const RealGrid& mask, const RealGrid& window,
                                  PatchCenter center, const UnrolledNetParams& params);

/// Supplies sensitivity maps at requested dimensions (patch and full size).
using MapsProvider = std::function<SensitivityMaps(int ny, int nz)>;

struct ReconOptions {
  int patch_ny = 64, patch_nz = 64;
  double overlap_y = 0.5, overlap_z = 0.5;
  int stopband = 10;
  int pad = 10;
  int workers = 1;
};

struct ReconResult {
  MultiCoilKSpace kspace; // original (unpadded) dims, measured bins bit-exact
  ImageSet image_sets;    // adjoint-model image channels at full size
  ComplexGrid image;      // first image channel (the reported reconstruction)
};

/// Whole-grid reconstruction: pad, tile into patches, reconstruct each patch
/// (in parallel when workers > 1), recombine with window-weight averaging,
/// project the measured bins, crop, and form the final image with the model
/// adjoint at full size.
ReconResult reconstruct_full(const MultiCoilKSpace& ksp, const MapsProvider& maps_for,
                             const RealGrid& mask, const ReconOptions& opt,
                             const UnrolledNetParams& params);

/// Versioned binary checkpoint (see docs/formats.md): fixed header followed by
/// little-endian 32-bit IEEE weight arrays in declared order.
void save_checkpoint(const std::string& path, const UnrolledNetParams& params);
UnrolledNetParams load_checkpoint(const std::string& path);

} // namespace bpr

#endif
