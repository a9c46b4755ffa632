#include "bpr/operators.hpp"

#include <cmath>

namespace bpr {

void SensitivityMaps::validate() const {
  if (sets.empty() || sets[0].empty())
    throw InvalidInput("SensitivityMaps: need at least one set with one coil");
  const int n_y = ny(), n_z = nz();
  double worst = 0.0;
  for (int y = 0; y < n_y; ++y) {
    for (int z = 0; z < n_z; ++z) {
      double s = 0.0;
      for (const auto& set : sets) {
        if (static_cast<int>(set.size()) != nc())
          throw DimensionMismatch("SensitivityMaps: coil counts differ between sets");
        for (const auto& coil : set) {
          if (coil.ny != n_y || coil.nz != n_z)
            throw DimensionMismatch("SensitivityMaps: coil grid dimensions differ");
          s += std::norm(coil.at(y, z));
        }
      }
      worst = std::max(worst, s);
    }
  }
  if (worst > 1.0 + 1e-6)
    throw InvalidInput("SensitivityMaps: sum |S|^2 exceeds 1 (max " + std::to_string(worst) + ")");
}

ComplexGrid phase_modulate(const ComplexGrid& img, PatchCenter center, PhaseDir dir) {
  const int ny = img.ny, nz = img.nz;
  const double sign = (dir == PhaseDir::Forward) ? 1.0 : -1.0;
  const double two_pi = 6.283185307179586476925286766559;
  std::vector<cdouble> fy(ny), fz(nz);
  for (int y = 0; y < ny; ++y)
    fy[y] = std::polar(1.0, sign * two_pi * center.ky * (y - ny / 2) / static_cast<double>(ny));
  for (int z = 0; z < nz; ++z)
    fz[z] = std::polar(1.0, sign * two_pi * center.kz * (z - nz / 2) / static_cast<double>(nz));
  ComplexGrid out(ny, nz);
  for (int y = 0; y < ny; ++y)
    for (int z = 0; z < nz; ++z) out.at(y, z) = img.at(y, z) * fy[y] * fz[z];
  return out;
}

namespace {

void check_maps_vs_image(const SensitivityMaps& maps, const ImageSet& img, const char* where) {
  if (static_cast<int>(img.size()) != maps.nsets())
    throw DimensionMismatch(std::string(where) + ": image channel count " +
                            std::to_string(img.size()) + " != map set count " +
                            std::to_string(maps.nsets()));
  for (const auto& ch : img)
    if (ch.ny != maps.ny() || ch.nz != maps.nz())
      throw DimensionMismatch(std::string(where) + ": image/map dimensions differ");
}

} // namespace

MultiCoilKSpace apply_model(const ImageSet& img, const SensitivityMaps& maps) {
  check_maps_vs_image(maps, img, "apply_model");
  MultiCoilKSpace out(maps.nc(), maps.ny(), maps.nz());
  for (int c = 0; c < maps.nc(); ++c) {
    ComplexGrid acc(maps.ny(), maps.nz());
    for (int s = 0; s < maps.nsets(); ++s) {
      const ComplexGrid& S = maps.sets[s][c];
      ComplexGrid weighted(maps.ny(), maps.nz());
      for (size_t i = 0; i < weighted.size(); ++i)
        weighted.data[i] = S.data[i] * img[s].data[i];
      const ComplexGrid k = fft2(weighted);
      for (size_t i = 0; i < acc.size(); ++i) acc.data[i] += k.data[i];
    }
    out.coils[c] = std::move(acc);
  }
  return out;
}

MultiCoilKSpace apply_model(const ComplexGrid& img, const SensitivityMaps& maps) {
  return apply_model(ImageSet{img}, maps);
}

ImageSet apply_model_adjoint(const MultiCoilKSpace& ksp, const SensitivityMaps& maps) {
  if (ksp.nc() != maps.nc() || ksp.ny() != maps.ny() || ksp.nz() != maps.nz())
    throw DimensionMismatch("apply_model_adjoint: k-space/map dimensions differ");
  ImageSet out(maps.nsets(), ComplexGrid(maps.ny(), maps.nz()));
  for (int c = 0; c < maps.nc(); ++c) {
    const ComplexGrid img_c = ifft2(ksp.coils[c]);
    for (int s = 0; s < maps.nsets(); ++s) {
      const ComplexGrid& S = maps.sets[s][c];
      for (size_t i = 0; i < img_c.size(); ++i)
        out[s].data[i] += std::conj(S.data[i]) * img_c.data[i];
    }
  }
  return out;
}

MultiCoilKSpace apply_B(const ImageSet& img, const SensitivityMaps& maps, const RealGrid& mask,
                        const RealGrid& window, PatchCenter center) {
  if (mask.ny != maps.ny() || mask.nz != maps.nz() || window.ny != maps.ny() ||
      window.nz != maps.nz())
    throw DimensionMismatch("apply_B: mask/window dimensions differ from maps");
  ImageSet modulated(img.size());
  for (size_t s = 0; s < img.size(); ++s)
    modulated[s] = phase_modulate(img[s], center, PhaseDir::Forward);
  MultiCoilKSpace out = apply_model(modulated, maps);
  for (auto& coil : out.coils)
    for (size_t i = 0; i < coil.size(); ++i)
      coil.data[i] *= window.data[i] * mask.data[i];
  return out;
}

ImageSet apply_B_adjoint(const MultiCoilKSpace& ksp, const SensitivityMaps& maps,
                         const RealGrid& mask, const RealGrid& window, PatchCenter center) {
  if (mask.ny != maps.ny() || mask.nz != maps.nz() || window.ny != maps.ny() ||
      window.nz != maps.nz())
    throw DimensionMismatch("apply_B_adjoint: mask/window dimensions differ from maps");
  MultiCoilKSpace weighted = ksp;
  for (auto& coil : weighted.coils) {
    require_same_dims(mask, coil, "apply_B_adjoint");
    for (size_t i = 0; i < coil.size(); ++i)
      coil.data[i] *= window.data[i] * mask.data[i];
  }
  ImageSet img = apply_model_adjoint(weighted, maps);
  for (auto& ch : img) ch = phase_modulate(ch, center, PhaseDir::Inverse);
  return img;
}

ImageSet ls_gradient(const ImageSet& y, const MultiCoilKSpace& u, const SensitivityMaps& maps,
                     const RealGrid& mask, const RealGrid& window, PatchCenter center) {
  // B'B y - B'(W u) folded into a single adjoint application: B'(B y - W u).
  MultiCoilKSpace residual = apply_B(y, maps, mask, window, center);
  if (residual.nc() != u.nc() || residual.ny() != u.ny() || residual.nz() != u.nz())
    throw DimensionMismatch("ls_gradient: measured data dimensions differ");
  for (int c = 0; c < residual.nc(); ++c)
    for (size_t i = 0; i < residual.coils[c].size(); ++i)
      residual.coils[c].data[i] -= window.data[i] * u.coils[c].data[i];
  return apply_B_adjoint(residual, maps, mask, window, center);
}

} // namespace bpr
