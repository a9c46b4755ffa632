#ifndef BPR_OPERATORS_HPP
#define BPR_OPERATORS_HPP

#include "bpr/fft.hpp"
#include "bpr/grid.hpp"

namespace bpr {

/// Complex receiver sensitivity profiles, indexed [set][coil]. One or two map
/// sets; all grids share the dimensions of the data they will be applied to.
/// Profiles are normalized: per pixel, sum over sets and coils of |S|^2 <= 1.
struct SensitivityMaps {
  std::vector<std::vector<ComplexGrid>> sets;

  int nsets() const { return static_cast<int>(sets.size()); }
  int nc() const { return sets.empty() ? 0 : static_cast<int>(sets[0].size()); }
  int ny() const { return nc() == 0 ? 0 : sets[0][0].ny; }
  int nz() const { return nc() == 0 ? 0 : sets[0][0].nz; }

  void validate() const;
};

/// Integer bin offset of a patch center from the full-grid DC bin.
struct PatchCenter {
  int ky = 0;
  int kz = 0;
};

enum class PhaseDir { Forward, Inverse };

/// Pointwise multiply by exp(+-j*2*pi*(ky*y + kz*z)) where (y, z) are pixel
/// fractions measured from the centered spatial origin (ny/2, nz/2). With the
/// centered FFT this makes the modulation an exact circular shift of the
/// spectrum by (ky, kz) bins. Forward then Inverse is the identity.
ComplexGrid phase_modulate(const ComplexGrid& img, PatchCenter center, PhaseDir dir);

/// Imaging model A: per coil, fft2(S * img), summed over map sets when the
/// latent image has one channel per set.
MultiCoilKSpace apply_model(const ImageSet& img, const SensitivityMaps& maps);
MultiCoilKSpace apply_model(const ComplexGrid& img, const SensitivityMaps& maps);

/// Exact adjoint of apply_model: per set, sum over coils of conj(S) * ifft2.
ImageSet apply_model_adjoint(const MultiCoilKSpace& ksp, const SensitivityMaps& maps);

/// Per-patch forward operator B = W * M * A * phase. Mask and window are real
/// and applied pointwise per coil.
MultiCoilKSpace apply_B(const ImageSet& img, const SensitivityMaps& maps,
                        const RealGrid& mask, const RealGrid& window, PatchCenter center);

/// Exact adjoint of apply_B.
ImageSet apply_B_adjoint(const MultiCoilKSpace& ksp, const SensitivityMaps& maps,
                         const RealGrid& mask, const RealGrid& window, PatchCenter center);

/// Gradient of the windowed least-squares data term at estimate y:
/// B'B y - B'(W * u), with u the raw measured patch (window applied here).
ImageSet ls_gradient(const ImageSet& y, const MultiCoilKSpace& u, const SensitivityMaps& maps,
                     const RealGrid& mask, const RealGrid& window, PatchCenter center);

} // namespace bpr

#endif
