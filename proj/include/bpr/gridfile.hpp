#ifndef BPR_GRIDFILE_HPP
#define BPR_GRIDFILE_HPP

#include <map>
#include <string>
#include <vector>

#include "bpr/grid.hpp"
#include "bpr/operators.hpp"

namespace bpr {

/// Self-describing binary array container (see docs/formats.md): a textual
/// header (magic line, dtype tag, dims, axis labels, free-form metadata such
/// as seed provenance) terminated by "end", followed by a little-endian IEEE
/// payload — interleaved (re, im) for complex dtypes. 64-bit payloads round
/// trip bit-exact.
struct GridData {
  std::string dtype; // c64 | c128 | f32 | f64
  std::vector<int> dims;
  std::vector<std::string> axes;
  std::map<std::string, std::string> meta;
  std::vector<cdouble> cdata; // complex dtypes
  std::vector<double> rdata;  // real dtypes

  long element_count() const;
  bool is_complex() const { return dtype == "c64" || dtype == "c128"; }
};

void write_grid(const std::string& path, const GridData& grid);
GridData read_grid(const std::string& path);

// Typed wrappers. Writers record the axis labels the readers validate.
void write_image(const std::string& path, const ComplexGrid& img,
                 const std::map<std::string, std::string>& meta = {});
ComplexGrid read_image(const std::string& path);

void write_kspace(const std::string& path, const MultiCoilKSpace& ksp,
                  const std::map<std::string, std::string>& meta = {});
MultiCoilKSpace read_kspace(const std::string& path);
std::map<std::string, std::string> read_meta(const std::string& path);

void write_mask(const std::string& path, const RealGrid& mask,
                const std::map<std::string, std::string>& meta = {});
RealGrid read_mask(const std::string& path);

void write_maps(const std::string& path, const SensitivityMaps& maps,
                const std::map<std::string, std::string>& meta = {});
SensitivityMaps read_maps(const std::string& path);

/// Volumetric k-space, axes (coil, x, ky, kz), fully sampled along x.
struct VolumeKSpace {
  int nc = 0, nx = 0, ny = 0, nz = 0;
  std::vector<cdouble> data; // row-major (coil, x, ky, kz)

  cdouble& at(int c, int x, int y, int z) {
    return data[((static_cast<size_t>(c) * nx + x) * ny + y) * nz + z];
  }
  const cdouble& at(int c, int x, int y, int z) const {
    return data[((static_cast<size_t>(c) * nx + x) * ny + y) * nz + z];
  }
};

/// Transform the readout axis to the hybrid domain (centered unitary 1-D
/// inverse FFT along x) and emit one 2-D multi-coil example per x position.
std::vector<MultiCoilKSpace> slice_volume(const VolumeKSpace& volume);

/// Minimal CSV writer for metric/benchmark/loss tables.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

} // namespace bpr

#endif
