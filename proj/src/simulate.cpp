#include "bpr/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "bpr/rng.hpp"

namespace bpr {

ComplexGrid make_phantom(const PhantomSpec& spec) {
  if (spec.n_ellipses < 1) throw InvalidInput("make_phantom: need at least one ellipse");
  Rng rng(spec.seed);
  ComplexGrid img(spec.ny, spec.nz);
  RealGrid mag(spec.ny, spec.nz, 0.0);
  for (int e = 0; e < spec.n_ellipses; ++e) {
    const double cy = rng.uniform(0.2, 0.8);
    const double cz = rng.uniform(0.2, 0.8);
    const double ay = rng.uniform(0.05, 0.3);
    const double az = rng.uniform(0.05, 0.3);
    const double theta = rng.uniform(0.0, 3.141592653589793);
    const double intensity = rng.uniform(spec.intensity_min, spec.intensity_max);
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int y = 0; y < spec.ny; ++y) {
      for (int z = 0; z < spec.nz; ++z) {
        const double fy = (y + 0.5) / spec.ny - cy;
        const double fz = (z + 0.5) / spec.nz - cz;
        const double u = ct * fy + st * fz;
        const double v = -st * fy + ct * fz;
        if ((u / ay) * (u / ay) + (v / az) * (v / az) <= 1.0) mag.at(y, z) += intensity;
      }
    }
  }
  // Magnitude stays within [0, intensity_max]; overlaps are clamped.
  for (auto& v : mag.data) v = std::clamp(v, 0.0, spec.intensity_max);

  // Smooth quadratic phase with random coefficients.
  const double c1 = rng.uniform(-1.0, 1.0), c2 = rng.uniform(-1.0, 1.0);
  const double c3 = rng.uniform(-1.0, 1.0), c4 = rng.uniform(-1.0, 1.0);
  const double c5 = rng.uniform(-1.0, 1.0);
  for (int y = 0; y < spec.ny; ++y) {
    for (int z = 0; z < spec.nz; ++z) {
      const double fy = static_cast<double>(y) / spec.ny - 0.5;
      const double fz = static_cast<double>(z) / spec.nz - 0.5;
      const double phase =
          spec.phase_scale * (c1 * fy + c2 * fz + c3 * fy * fz + c4 * fy * fy + c5 * fz * fz);
      img.at(y, z) = std::polar(mag.at(y, z), phase);
    }
  }
  return img;
}

SensitivityMaps make_coils(const CoilSpec& spec, int ny, int nz) {
  if (spec.nc < 1) throw InvalidInput("make_coils: need at least one coil");
  if (spec.nsets < 1 || spec.nsets > 2) throw InvalidInput("make_coils: nsets must be 1 or 2");
  Rng rng(spec.seed);
  SensitivityMaps maps;
  maps.sets.assign(spec.nsets, std::vector<ComplexGrid>());
  for (int s = 0; s < spec.nsets; ++s) {
    for (int c = 0; c < spec.nc; ++c) {
      // Lobe centers sit on a circle just outside the field of view, evenly
      // spaced with a small seeded jitter; a second set gets rotated lobes.
      const double angle = 2.0 * 3.141592653589793 *
                               (c + 0.5 * s + 0.15 * (rng.next_double() - 0.5)) / spec.nc;
      const double cy = 0.5 + 0.65 * std::cos(angle);
      const double cz = 0.5 + 0.65 * std::sin(angle);
      const double sigma = spec.width_scale * (s == 0 ? 1.0 : 0.8);
      const double phase_slope_y = rng.uniform(-1.5, 1.5);
      const double phase_slope_z = rng.uniform(-1.5, 1.5);
      ComplexGrid S(ny, nz);
      for (int y = 0; y < ny; ++y) {
        for (int z = 0; z < nz; ++z) {
          const double fy = (y + 0.5) / ny - cy;
          const double fz = (z + 0.5) / nz - cz;
          const double r2 = (fy * fy + fz * fz) / (sigma * sigma);
          const double amp = std::exp(-0.5 * r2);
          const double ph = phase_slope_y * fy + phase_slope_z * fz;
          S.at(y, z) = std::polar(amp, ph);
        }
      }
      maps.sets[s].push_back(std::move(S));
    }
  }
  // Joint normalization across sets and coils: sum |S|^2 = 1 per pixel where
  // the lobes reach, untouched (tiny) elsewhere.
  for (int y = 0; y < ny; ++y) {
    for (int z = 0; z < nz; ++z) {
      double s2 = 0.0;
      for (auto& set : maps.sets)
        for (auto& coil : set) s2 += std::norm(coil.at(y, z));
      if (s2 > 1e-12) {
        const double inv = 1.0 / std::sqrt(s2);
        for (auto& set : maps.sets)
          for (auto& coil : set) coil.at(y, z) *= inv;
      }
    }
  }
  return maps;
}

MultiCoilKSpace synthesize_kspace(const ComplexGrid& phantom, const SensitivityMaps& maps) {
  if (phantom.ny != maps.ny() || phantom.nz != maps.nz())
    throw DimensionMismatch("synthesize_kspace: phantom/map dimensions differ");
  // With two map sets the phantom occupies the first channel; the second set
  // exists to absorb model mismatch and starts empty.
  ImageSet img(maps.nsets(), ComplexGrid(phantom.ny, phantom.nz));
  img[0] = phantom;
  return apply_model(img, maps);
}

} // namespace bpr
