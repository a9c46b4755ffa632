#ifndef BPR_GRID_HPP
#define BPR_GRID_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "bpr/errors.hpp"

namespace bpr {

using cdouble = std::complex<double>;

/// 2-D complex array in row-major order. Axis 0 (ny) is the k_y / y axis,
/// axis 1 (nz) is the k_z / z axis. The centered convention used throughout
/// places DC at bin (ny/2, nz/2).
struct ComplexGrid {
  int ny = 0;
  int nz = 0;
  std::vector<cdouble> data;

  ComplexGrid() = default;
  ComplexGrid(int ny_, int nz_) : ny(ny_), nz(nz_) {
    if (ny_ <= 0 || nz_ <= 0)
      throw InvalidInput("ComplexGrid: dimensions must be positive, got " +
                         std::to_string(ny_) + "x" + std::to_string(nz_));
    data.assign(static_cast<size_t>(ny_) * nz_, cdouble(0.0, 0.0));
  }

  size_t size() const { return data.size(); }
  cdouble& at(int y, int z) { return data[static_cast<size_t>(y) * nz + z]; }
  const cdouble& at(int y, int z) const { return data[static_cast<size_t>(y) * nz + z]; }

  bool same_dims(const ComplexGrid& o) const { return ny == o.ny && nz == o.nz; }
};

/// 2-D real array, same layout as ComplexGrid. Used for masks and windows;
/// values live in [0, 1].
struct RealGrid {
  int ny = 0;
  int nz = 0;
  std::vector<double> data;

  RealGrid() = default;
  RealGrid(int ny_, int nz_, double fill = 0.0) : ny(ny_), nz(nz_) {
    if (ny_ <= 0 || nz_ <= 0)
      throw InvalidInput("RealGrid: dimensions must be positive, got " +
                         std::to_string(ny_) + "x" + std::to_string(nz_));
    data.assign(static_cast<size_t>(ny_) * nz_, fill);
  }

  size_t size() const { return data.size(); }
  double& at(int y, int z) { return data[static_cast<size_t>(y) * nz + z]; }
  const double& at(int y, int z) const { return data[static_cast<size_t>(y) * nz + z]; }

  bool same_dims(const RealGrid& o) const { return ny == o.ny && nz == o.nz; }
};

/// Coil-indexed stack of dimension-identical complex grids: the measurement
/// domain object. Coil count >= 1.
struct MultiCoilKSpace {
  std::vector<ComplexGrid> coils;

  MultiCoilKSpace() = default;
  MultiCoilKSpace(int nc, int ny, int nz) {
    if (nc < 1) throw InvalidInput("MultiCoilKSpace: need at least one coil");
    coils.assign(static_cast<size_t>(nc), ComplexGrid(ny, nz));
  }

  int nc() const { return static_cast<int>(coils.size()); }
  int ny() const { return coils.empty() ? 0 : coils[0].ny; }
  int nz() const { return coils.empty() ? 0 : coils[0].nz; }
};

/// One image channel per sensitivity-map set. Most paths use a single set.
using ImageSet = std::vector<ComplexGrid>;

inline void require_same_dims(const ComplexGrid& a, const ComplexGrid& b, const char* where) {
  if (!a.same_dims(b))
    throw DimensionMismatch(std::string(where) + ": grid dimensions differ (" +
                            std::to_string(a.ny) + "x" + std::to_string(a.nz) + " vs " +
                            std::to_string(b.ny) + "x" + std::to_string(b.nz) + ")");
}

inline void require_same_dims(const RealGrid& a, const ComplexGrid& b, const char* where) {
  if (a.ny != b.ny || a.nz != b.nz)
    throw DimensionMismatch(std::string(where) + ": grid dimensions differ (" +
                            std::to_string(a.ny) + "x" + std::to_string(a.nz) + " vs " +
                            std::to_string(b.ny) + "x" + std::to_string(b.nz) + ")");
}

// Pointwise helpers shared by the operator chain.

inline ComplexGrid operator+(const ComplexGrid& a, const ComplexGrid& b) {
  require_same_dims(a, b, "operator+");
  ComplexGrid out(a.ny, a.nz);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] + b.data[i];
  return out;
}

inline ComplexGrid operator-(const ComplexGrid& a, const ComplexGrid& b) {
  require_same_dims(a, b, "operator-");
  ComplexGrid out(a.ny, a.nz);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] - b.data[i];
  return out;
}

inline ComplexGrid operator*(cdouble s, const ComplexGrid& a) {
  ComplexGrid out(a.ny, a.nz);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = s * a.data[i];
  return out;
}

inline ComplexGrid mul(const RealGrid& w, const ComplexGrid& a) {
  require_same_dims(w, a, "mul(real, complex)");
  ComplexGrid out(a.ny, a.nz);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = w.data[i] * a.data[i];
  return out;
}

inline void mul_inplace(const RealGrid& w, ComplexGrid& a) {
  require_same_dims(w, a, "mul_inplace");
  for (size_t i = 0; i < a.size(); ++i) a.data[i] *= w.data[i];
}

inline double norm2(const ComplexGrid& a) {
  double s = 0.0;
  for (const auto& v : a.data) s += std::norm(v);
  return std::sqrt(s);
}

inline double norm2(const MultiCoilKSpace& k) {
  double s = 0.0;
  for (const auto& c : k.coils)
    for (const auto& v : c.data) s += std::norm(v);
  return std::sqrt(s);
}

inline double norm2(const ImageSet& y) {
  double s = 0.0;
  for (const auto& g : y)
    for (const auto& v : g.data) s += std::norm(v);
  return std::sqrt(s);
}

inline bool all_finite(const ComplexGrid& a) {
  for (const auto& v : a.data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

inline bool all_finite(const MultiCoilKSpace& k) {
  for (const auto& c : k.coils)
    if (!all_finite(c)) return false;
  return true;
}

} // namespace bpr

#endif
