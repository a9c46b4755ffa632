#include "bpr/network.hpp"

#include "bpr/parallel.hpp"

namespace bpr {

void UnrolledNetParams::validate() const {
  if (iterations.empty()) throw InvalidInput("UnrolledNetParams: need at least one iteration");
  for (const auto& it : iterations) {
    if (it.denoiser.nsets != nsets || it.denoiser.feature_width != feature_width)
      throw InvalidInput("UnrolledNetParams: denoiser shape differs from network shape");
    it.denoiser.validate();
  }
}

UnrolledNetParams UnrolledNetParams::identity(int n_iter, int nsets, int feature_width) {
  UnrolledNetParams p;
  p.nsets = nsets;
  p.feature_width = feature_width;
  for (int i = 0; i < n_iter; ++i)
    p.iterations.push_back({0.0, DenoiserParams::identity(nsets, feature_width)});
  return p;
}

UnrolledNetParams UnrolledNetParams::initial(int n_iter, int nsets, int feature_width,
                                             uint64_t seed) {
  UnrolledNetParams p;
  p.nsets = nsets;
  p.feature_width = feature_width;
  Rng rng(seed);
  for (int i = 0; i < n_iter; ++i)
    p.iterations.push_back({-2.0, DenoiserParams::random_init(nsets, feature_width, rng)});
  return p;
}

ImageSet update_block(const ImageSet& y, const MultiCoilKSpace& u, const SensitivityMaps& maps,
                      const RealGrid& mask, const RealGrid& window, PatchCenter center,
                      double t) {
  ImageSet grad = ls_gradient(y, u, maps, mask, window, center);
  ImageSet out = y;
  for (size_t s = 0; s < out.size(); ++s)
    for (size_t i = 0; i < out[s].size(); ++i) out[s].data[i] += t * grad[s].data[i];
  return out;
}

ImageSet denoise_block(const ImageSet& y, const DenoiserParams& params, NormMode mode) {
  Tensor x = pack_images({y});
  // Parameters stay const for the public op; Train mode uses the example's
  // own statistics without touching running averages.
  DenoiserParams local = params;
  Tensor out = denoise_forward(x, local, mode, /*update_running=*/false, nullptr);
  return unpack_images(out)[0];
}

namespace {

MultiCoilKSpace windowed_model_output(const ImageSet& y, const SensitivityMaps& maps,
                                      const RealGrid& window, PatchCenter center) {
  ImageSet modulated(y.size());
  for (size_t s = 0; s < y.size(); ++s)
    modulated[s] = phase_modulate(y[s], center, PhaseDir::Forward);
  MultiCoilKSpace out = apply_model(modulated, maps);
  for (auto& coil : out.coils) mul_inplace(window, coil);
  return out;
}

} // namespace

double patch_problem_scale(const MultiCoilKSpace& windowed_u) {
  // Patch magnitudes span orders of magnitude across frequency bands; running
  // the unrolled iterations at unit scale keeps the normalization layers'
  // statistics comparable between training batches and frozen inference. The
  // scale is undone at the output, so the reconstruction itself is unchanged.
  const double n = norm2(windowed_u) /
                   std::sqrt(static_cast<double>(windowed_u.nc()) * windowed_u.ny() *
                             windowed_u.nz());
  return n > 0.0 ? n : 1.0;
}

MultiCoilKSpace reconstruct_patch(const MultiCoilKSpace& u, const SensitivityMaps& maps,
                                  const RealGrid& mask, const RealGrid& window,
                                  PatchCenter center, const UnrolledNetParams& params) {
  MultiCoilKSpace wu = u;
  for (auto& coil : wu.coils) mul_inplace(window, coil);
  const double scale = patch_problem_scale(wu);
  MultiCoilKSpace u_unit = u;
  for (auto& coil : u_unit.coils)
    for (auto& v : coil.data) v /= scale;
  MultiCoilKSpace wu_unit = wu;
  for (auto& coil : wu_unit.coils)
    for (auto& v : coil.data) v /= scale;

  // y0 = B'(W u), iterated at unit scale
  ImageSet y = apply_B_adjoint(wu_unit, maps, mask, window, center);
  for (const auto& iter : params.iterations) {
    y = update_block(y, u_unit, maps, mask, window, center, iter.step_size);
    y = denoise_block(y, iter.denoiser, NormMode::Frozen);
  }
  MultiCoilKSpace out = windowed_model_output(y, maps, window, center);
  for (auto& coil : out.coils)
    for (auto& v : coil.data) v *= scale;
  // measured bins come from the raw windowed data, bit-exact
  return hard_data_projection(out, wu, mask);
}

ReconResult reconstruct_full(const MultiCoilKSpace& ksp, const MapsProvider& maps_for,
                             const RealGrid& mask, const ReconOptions& opt,
                             const UnrolledNetParams& params) {
  if (mask.ny != ksp.ny() || mask.nz != ksp.nz())
    throw DimensionMismatch("reconstruct_full: mask dimensions differ from k-space");
  params.validate();

  const MultiCoilKSpace padded = pad_kspace(ksp, opt.pad);
  const RealGrid padded_mask = pad_mask(mask, opt.pad);
  const PatchGeometry geo = plan_patches(padded.ny(), padded.nz(), opt.patch_ny, opt.patch_nz,
                                         opt.overlap_y, opt.overlap_z, opt.stopband);
  const RealGrid window = make_window({opt.patch_ny, opt.patch_nz, opt.stopband});
  const SensitivityMaps patch_maps = maps_for(opt.patch_ny, opt.patch_nz);
  if (patch_maps.nc() != ksp.nc())
    throw DimensionMismatch("reconstruct_full: map coil count differs from data");

  std::vector<std::function<MultiCoilKSpace()>> jobs;
  jobs.reserve(geo.centers.size());
  for (const PatchCenter center : geo.centers) {
    jobs.push_back([&, center]() {
      const MultiCoilKSpace u = extract_patch(padded, center, opt.patch_ny, opt.patch_nz);
      const RealGrid m = extract_patch(padded_mask, center, opt.patch_ny, opt.patch_nz);
      return reconstruct_patch(u, patch_maps, m, window, center, params);
    });
  }
  const std::vector<MultiCoilKSpace> outputs = run_patches(jobs, opt.workers);

  std::vector<std::pair<PatchCenter, MultiCoilKSpace>> tiles;
  tiles.reserve(outputs.size());
  for (size_t i = 0; i < outputs.size(); ++i) tiles.emplace_back(geo.centers[i], outputs[i]);
  MultiCoilKSpace combined = recombine(tiles, geo, window);
  combined = hard_data_projection(combined, padded, padded_mask);

  ReconResult result;
  result.kspace = crop_kspace(combined, opt.pad);
  const SensitivityMaps full_maps = maps_for(ksp.ny(), ksp.nz());
  result.image_sets = apply_model_adjoint(result.kspace, full_maps);
  result.image = result.image_sets[0];
  return result;
}

} // namespace bpr
