#include "bpr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace bpr {
namespace {

// FFTW plan creation is not thread safe; execution through the new-array
// interface is. Plans are created once per (ny, nz, sign) under a mutex with
// FFTW_UNALIGNED so they may execute on any caller-provided buffers, and kept
// for the process lifetime.
std::mutex g_plan_mutex;

fftw_plan plan_2d(int ny, int nz, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::scoped_lock lock(g_plan_mutex);
  const auto key = std::make_tuple(ny, nz, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cdouble> in(static_cast<size_t>(ny) * nz), out(in.size());
  fftw_plan p = fftw_plan_dft_2d(ny, nz, reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

fftw_plan plan_1d(int n, int sign) {
  static std::map<std::tuple<int, int>, fftw_plan> cache;
  std::scoped_lock lock(g_plan_mutex);
  const auto key = std::make_tuple(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<cdouble> in(static_cast<size_t>(n)), out(in.size());
  fftw_plan p = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                 reinterpret_cast<fftw_complex*>(out.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

// Centered transform = fftshift o DFT o ifftshift, folded into the copy
// loops. Input copy applies ifftshift (centered -> standard order), output
// copy applies fftshift (standard -> centered) plus the unitary scale.
ComplexGrid transform_2d(const ComplexGrid& g, int sign) {
  if (g.ny <= 0 || g.nz <= 0 || g.data.size() != static_cast<size_t>(g.ny) * g.nz)
    throw InvalidInput("fft2/ifft2: invalid grid");
  const int ny = g.ny, nz = g.nz;
  const int hy = ny / 2, hz = nz / 2;
  std::vector<cdouble> in(g.size()), out(g.size());
  for (int y = 0; y < ny; ++y) {
    const int sy = (y + hy) % ny;
    const cdouble* src = &g.data[static_cast<size_t>(sy) * nz];
    cdouble* dst = &in[static_cast<size_t>(y) * nz];
    for (int z = 0; z < nz; ++z) dst[z] = src[(z + hz) % nz];
  }
  fftw_execute_dft(plan_2d(ny, nz, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  ComplexGrid result(ny, nz);
  const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
  for (int y = 0; y < ny; ++y) {
    const int sy = (y + ny - hy) % ny;
    const cdouble* src = &out[static_cast<size_t>(sy) * nz];
    cdouble* dst = &result.data[static_cast<size_t>(y) * nz];
    for (int z = 0; z < nz; ++z) dst[z] = scale * src[(z + nz - hz) % nz];
  }
  return result;
}

} // namespace

ComplexGrid fft2(const ComplexGrid& img) { return transform_2d(img, FFTW_FORWARD); }

ComplexGrid ifft2(const ComplexGrid& ksp) { return transform_2d(ksp, FFTW_BACKWARD); }

void fft1d(std::vector<cdouble>& line, int sign) {
  const int n = static_cast<int>(line.size());
  if (n <= 0) throw InvalidInput("fft1d: empty line");
  const int h = n / 2;
  std::vector<cdouble> in(line.size()), out(line.size());
  for (int i = 0; i < n; ++i) in[i] = line[(i + h) % n];
  fftw_execute_dft(plan_1d(n, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) line[i] = scale * out[(i + n - h) % n];
}

cdouble inner_product(const ComplexGrid& a, const ComplexGrid& b) {
  require_same_dims(a, b, "inner_product");
  cdouble s(0.0, 0.0);
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
  return s;
}

cdouble inner_product(const MultiCoilKSpace& a, const MultiCoilKSpace& b) {
  if (a.nc() != b.nc())
    throw DimensionMismatch("inner_product: coil counts differ");
  cdouble s(0.0, 0.0);
  for (int c = 0; c < a.nc(); ++c) s += inner_product(a.coils[c], b.coils[c]);
  return s;
}

cdouble inner_product(const ImageSet& a, const ImageSet& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("inner_product: set counts differ");
  cdouble s(0.0, 0.0);
  for (size_t i = 0; i < a.size(); ++i) s += inner_product(a[i], b[i]);
  return s;
}

} // namespace bpr
