#include "bpr/bandpass.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bpr {
namespace {

// Per-axis window profile. Raw value at i is the sum of Gaussian taps whose
// offset lands inside the passband; interior bins accumulate every tap in the
// same order, so after dividing by the maximum they equal 1 exactly.
std::vector<double> axis_window(int dim, int stopband) {
  const int passband = dim - 2 * stopband;
  if (passband < 1)
    throw InvalidInput("make_window: passband " + std::to_string(passband) +
                       " < 1 (patch dim " + std::to_string(dim) + ", stopband " +
                       std::to_string(stopband) + ")");
  const int lo = stopband;            // passband = [lo, lo + passband)
  const int hi = lo + passband;
  std::vector<double> taps(2 * stopband + 1, 1.0);
  if (stopband > 0) {
    const double sigma = stopband / 3.0;
    for (int t = -stopband; t <= stopband; ++t)
      taps[t + stopband] = std::exp(-0.5 * (t / sigma) * (t / sigma));
  }
  std::vector<double> w(dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    double s = 0.0;
    for (int t = -stopband; t <= stopband; ++t) {
      const int j = ((i - t) % dim + dim) % dim;
      if (j >= lo && j < hi) s += taps[t + stopband];
    }
    w[i] = s;
  }
  const double peak = *std::max_element(w.begin(), w.end());
  for (auto& v : w) v /= peak;
  return w;
}

// Trusted 1-D coverage: bins within ceil(stopband/2) of a passband. Bins
// within `stopband` of the axis border are exempt (they hold pad zeros).
std::vector<int> uncovered_axis_bins(int full, int patch, int stopband,
                                     const std::vector<int>& starts) {
  std::vector<char> covered(full, 0);
  const int dilate = (stopband + 1) / 2;
  for (int s : starts) {
    const int lo = std::max(0, s + stopband - dilate);
    const int hi = std::min(full, s + patch - stopband + dilate);
    for (int i = lo; i < hi; ++i) covered[i] = 1;
  }
  std::vector<int> uncovered;
  for (int i = stopband; i < full - stopband; ++i)
    if (!covered[i]) uncovered.push_back(i);
  return uncovered;
}

std::vector<int> axis_starts(int full, int patch, double overlap) {
  if (patch > full)
    throw InvalidInput("plan_patches: patch dimension exceeds full dimension");
  if (overlap < 0.0 || overlap >= 1.0)
    throw InvalidInput("plan_patches: overlap fraction must be in [0, 1)");
  const int stride = std::max(1, static_cast<int>(std::floor(patch * (1.0 - overlap))));
  std::vector<int> starts;
  for (int s = 0; s + patch <= full; s += stride) starts.push_back(s);
  if (starts.empty() || starts.back() != full - patch) starts.push_back(full - patch);
  return starts;
}

void check_patch_bounds(int full_ny, int full_nz, PatchCenter center, int patch_ny,
                        int patch_nz, const char* where) {
  const int sy = full_ny / 2 + center.ky - patch_ny / 2;
  const int sz = full_nz / 2 + center.kz - patch_nz / 2;
  if (sy < 0 || sz < 0 || sy + patch_ny > full_ny || sz + patch_nz > full_nz)
    throw InvalidInput(std::string(where) + ": patch at center (" + std::to_string(center.ky) +
                       "," + std::to_string(center.kz) + ") out of bounds");
}

} // namespace

RealGrid make_window(const WindowSpec& spec) {
  if (spec.stopband < 0) throw InvalidInput("make_window: stopband must be >= 0");
  const auto wy = axis_window(spec.patch_ny, spec.stopband);
  const auto wz = axis_window(spec.patch_nz, spec.stopband);
  RealGrid w(spec.patch_ny, spec.patch_nz);
  for (int y = 0; y < spec.patch_ny; ++y)
    for (int z = 0; z < spec.patch_nz; ++z) w.at(y, z) = wy[y] * wz[z];
  return w;
}

PatchGeometry plan_patches(int full_ny, int full_nz, int patch_ny, int patch_nz,
                           double overlap_y, double overlap_z, int stopband) {
  if (patch_ny - 2 * stopband < 1 || patch_nz - 2 * stopband < 1)
    throw InvalidInput("plan_patches: stopband leaves no passband");
  PatchGeometry geo;
  geo.full_ny = full_ny;
  geo.full_nz = full_nz;
  geo.patch_ny = patch_ny;
  geo.patch_nz = patch_nz;
  geo.stopband = stopband;
  geo.overlap_y = overlap_y;
  geo.overlap_z = overlap_z;
  geo.starts_y = axis_starts(full_ny, patch_ny, overlap_y);
  geo.starts_z = axis_starts(full_nz, patch_nz, overlap_z);

  const auto bad_y = uncovered_axis_bins(full_ny, patch_ny, stopband, geo.starts_y);
  const auto bad_z = uncovered_axis_bins(full_nz, patch_nz, stopband, geo.starts_z);
  if (!bad_y.empty() || !bad_z.empty()) {
    std::vector<long> bins;
    for (int y : bad_y)
      for (int z = 0; z < full_nz; ++z) bins.push_back(static_cast<long>(y) * full_nz + z);
    for (int z : bad_z)
      for (int y = 0; y < full_ny; ++y) bins.push_back(static_cast<long>(y) * full_nz + z);
    std::sort(bins.begin(), bins.end());
    bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
    std::ostringstream msg;
    msg << "plan_patches: overlap (" << overlap_y << ", " << overlap_z
        << ") too small to cover the grid; " << bins.size() << " uncovered bins (first ky bins:";
    for (size_t i = 0; i < bad_y.size() && i < 8; ++i) msg << ' ' << bad_y[i];
    msg << "; first kz bins:";
    for (size_t i = 0; i < bad_z.size() && i < 8; ++i) msg << ' ' << bad_z[i];
    msg << ")";
    throw CoverageError(msg.str(), std::move(bins));
  }

  for (int sy : geo.starts_y)
    for (int sz : geo.starts_z)
      geo.centers.push_back(PatchCenter{sy + patch_ny / 2 - full_ny / 2,
                                        sz + patch_nz / 2 - full_nz / 2});
  return geo;
}

MultiCoilKSpace pad_kspace(const MultiCoilKSpace& ksp, int pad) {
  if (pad < 0) throw InvalidInput("pad_kspace: pad must be >= 0");
  if (pad == 0) return ksp;
  MultiCoilKSpace out(ksp.nc(), ksp.ny() + 2 * pad, ksp.nz() + 2 * pad);
  for (int c = 0; c < ksp.nc(); ++c)
    for (int y = 0; y < ksp.ny(); ++y)
      for (int z = 0; z < ksp.nz(); ++z) out.coils[c].at(y + pad, z + pad) = ksp.coils[c].at(y, z);
  return out;
}

MultiCoilKSpace crop_kspace(const MultiCoilKSpace& ksp, int pad) {
  if (pad < 0) throw InvalidInput("crop_kspace: pad must be >= 0");
  if (pad == 0) return ksp;
  if (ksp.ny() <= 2 * pad || ksp.nz() <= 2 * pad)
    throw InvalidInput("crop_kspace: pad larger than grid");
  MultiCoilKSpace out(ksp.nc(), ksp.ny() - 2 * pad, ksp.nz() - 2 * pad);
  for (int c = 0; c < ksp.nc(); ++c)
    for (int y = 0; y < out.ny(); ++y)
      for (int z = 0; z < out.nz(); ++z) out.coils[c].at(y, z) = ksp.coils[c].at(y + pad, z + pad);
  return out;
}

RealGrid pad_mask(const RealGrid& mask, int pad) {
  if (pad < 0) throw InvalidInput("pad_mask: pad must be >= 0");
  if (pad == 0) return mask;
  RealGrid out(mask.ny + 2 * pad, mask.nz + 2 * pad, 0.0);
  for (int y = 0; y < mask.ny; ++y)
    for (int z = 0; z < mask.nz; ++z) out.at(y + pad, z + pad) = mask.at(y, z);
  return out;
}

MultiCoilKSpace extract_patch(const MultiCoilKSpace& ksp_full, PatchCenter center, int patch_ny,
                              int patch_nz) {
  check_patch_bounds(ksp_full.ny(), ksp_full.nz(), center, patch_ny, patch_nz, "extract_patch");
  const int sy = ksp_full.ny() / 2 + center.ky - patch_ny / 2;
  const int sz = ksp_full.nz() / 2 + center.kz - patch_nz / 2;
  MultiCoilKSpace out(ksp_full.nc(), patch_ny, patch_nz);
  for (int c = 0; c < ksp_full.nc(); ++c)
    for (int y = 0; y < patch_ny; ++y)
      for (int z = 0; z < patch_nz; ++z)
        out.coils[c].at(y, z) = ksp_full.coils[c].at(sy + y, sz + z);
  return out;
}

RealGrid extract_patch(const RealGrid& grid_full, PatchCenter center, int patch_ny, int patch_nz) {
  const int sy = grid_full.ny / 2 + center.ky - patch_ny / 2;
  const int sz = grid_full.nz / 2 + center.kz - patch_nz / 2;
  if (sy < 0 || sz < 0 || sy + patch_ny > grid_full.ny || sz + patch_nz > grid_full.nz)
    throw InvalidInput("extract_patch: out of bounds");
  RealGrid out(patch_ny, patch_nz);
  for (int y = 0; y < patch_ny; ++y)
    for (int z = 0; z < patch_nz; ++z) out.at(y, z) = grid_full.at(sy + y, sz + z);
  return out;
}

void insert_patch(MultiCoilKSpace& ksp_full, const MultiCoilKSpace& patch, PatchCenter center) {
  if (ksp_full.nc() != patch.nc())
    throw DimensionMismatch("insert_patch: coil counts differ");
  check_patch_bounds(ksp_full.ny(), ksp_full.nz(), center, patch.ny(), patch.nz(), "insert_patch");
  const int sy = ksp_full.ny() / 2 + center.ky - patch.ny() / 2;
  const int sz = ksp_full.nz() / 2 + center.kz - patch.nz() / 2;
  for (int c = 0; c < patch.nc(); ++c)
    for (int y = 0; y < patch.ny(); ++y)
      for (int z = 0; z < patch.nz(); ++z)
        ksp_full.coils[c].at(sy + y, sz + z) = patch.coils[c].at(y, z);
}

MultiCoilKSpace recombine(const std::vector<std::pair<PatchCenter, MultiCoilKSpace>>& patches,
                          const PatchGeometry& geometry, const RealGrid& window) {
  if (patches.empty()) throw InvalidInput("recombine: no patches");
  if (window.ny != geometry.patch_ny || window.nz != geometry.patch_nz)
    throw DimensionMismatch("recombine: window dimensions differ from patch dimensions");
  const int nc = patches[0].second.nc();
  MultiCoilKSpace acc(nc, geometry.full_ny, geometry.full_nz);
  RealGrid weight(geometry.full_ny, geometry.full_nz, 0.0);
  for (const auto& [center, patch] : patches) {
    if (patch.nc() != nc || patch.ny() != geometry.patch_ny || patch.nz() != geometry.patch_nz)
      throw DimensionMismatch("recombine: patch dimensions differ from geometry");
    check_patch_bounds(geometry.full_ny, geometry.full_nz, center, geometry.patch_ny,
                       geometry.patch_nz, "recombine");
    const int sy = geometry.full_ny / 2 + center.ky - geometry.patch_ny / 2;
    const int sz = geometry.full_nz / 2 + center.kz - geometry.patch_nz / 2;
    for (int y = 0; y < geometry.patch_ny; ++y)
      for (int z = 0; z < geometry.patch_nz; ++z) weight.at(sy + y, sz + z) += window.at(y, z);
    for (int c = 0; c < nc; ++c)
      for (int y = 0; y < geometry.patch_ny; ++y)
        for (int z = 0; z < geometry.patch_nz; ++z)
          acc.coils[c].at(sy + y, sz + z) += patch.coils[c].at(y, z);
  }
  std::vector<long> bad;
  for (size_t i = 0; i < weight.size(); ++i)
    if (weight.data[i] == 0.0) bad.push_back(static_cast<long>(i));
  if (!bad.empty())
    throw CoverageError("recombine: " + std::to_string(bad.size()) +
                            " bins received zero window weight",
                        std::move(bad));
  for (int c = 0; c < nc; ++c)
    for (size_t i = 0; i < weight.size(); ++i) acc.coils[c].data[i] /= weight.data[i];
  return acc;
}

MultiCoilKSpace hard_data_projection(const MultiCoilKSpace& recon_ksp,
                                     const MultiCoilKSpace& measured, const RealGrid& mask) {
  if (recon_ksp.nc() != measured.nc() || recon_ksp.ny() != measured.ny() ||
      recon_ksp.nz() != measured.nz())
    throw DimensionMismatch("hard_data_projection: recon/measured dimensions differ");
  if (mask.ny != recon_ksp.ny() || mask.nz != recon_ksp.nz())
    throw DimensionMismatch("hard_data_projection: mask dimensions differ");
  for (double v : mask.data)
    if (v != 0.0 && v != 1.0)
      throw InvalidInput("hard_data_projection: mask is not binary");
  MultiCoilKSpace out = recon_ksp;
  for (int c = 0; c < out.nc(); ++c)
    for (size_t i = 0; i < mask.size(); ++i)
      if (mask.data[i] == 1.0) out.coils[c].data[i] = measured.coils[c].data[i];
  return out;
}

} // namespace bpr
