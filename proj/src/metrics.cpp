#include "bpr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace bpr {
namespace {

constexpr int kWin = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> gaussian_taps() {
  std::vector<double> g(kWin);
  double sum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - (kWin - 1) / 2.0;
    g[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Separable valid-mode Gaussian filter: output dims shrink by kWin-1.
RealGrid gauss_filter_valid(const RealGrid& x) {
  const auto g = gaussian_taps();
  const int oy = x.ny - kWin + 1, oz = x.nz - kWin + 1;
  RealGrid rows(x.ny, oz);
  for (int y = 0; y < x.ny; ++y)
    for (int z = 0; z < oz; ++z) {
      double s = 0.0;
      for (int t = 0; t < kWin; ++t) s += g[t] * x.at(y, z + t);
      rows.at(y, z) = s;
    }
  RealGrid out(oy, oz);
  for (int y = 0; y < oy; ++y)
    for (int z = 0; z < oz; ++z) {
      double s = 0.0;
      for (int t = 0; t < kWin; ++t) s += g[t] * rows.at(y + t, z);
      out.at(y, z) = s;
    }
  return out;
}

RealGrid pointwise_mul(const RealGrid& a, const RealGrid& b) {
  RealGrid out(a.ny, a.nz);
  for (size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

} // namespace

RealGrid magnitude(const ComplexGrid& img) {
  RealGrid out(img.ny, img.nz);
  for (size_t i = 0; i < img.size(); ++i) out.data[i] = std::abs(img.data[i]);
  return out;
}

double nrmse(const RealGrid& test, const RealGrid& ref) {
  if (!test.same_dims(ref)) throw DimensionMismatch("nrmse: dimensions differ");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double d = test.data[i] - ref.data[i];
    num += d * d;
    den += ref.data[i] * ref.data[i];
  }
  if (den == 0.0) throw InvalidInput("nrmse: reference has zero norm");
  return std::sqrt(num / den);
}

double psnr(const RealGrid& test, const RealGrid& ref) {
  if (!test.same_dims(ref)) throw DimensionMismatch("psnr: dimensions differ");
  double mse = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double d = test.data[i] - ref.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(ref.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(ref.data.begin(), ref.data.end());
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

double ssim(const RealGrid& test, const RealGrid& ref) {
  if (!test.same_dims(ref)) throw DimensionMismatch("ssim: dimensions differ");
  if (test.ny < kWin || test.nz < kWin)
    throw InvalidInput("ssim: image smaller than the 11x11 window");
  const double range = *std::max_element(ref.data.begin(), ref.data.end());
  const double c1 = (kK1 * range) * (kK1 * range);
  const double c2 = (kK2 * range) * (kK2 * range);

  const RealGrid mu_t = gauss_filter_valid(test);
  const RealGrid mu_r = gauss_filter_valid(ref);
  const RealGrid tt = gauss_filter_valid(pointwise_mul(test, test));
  const RealGrid rr = gauss_filter_valid(pointwise_mul(ref, ref));
  const RealGrid tr = gauss_filter_valid(pointwise_mul(test, ref));

  double acc = 0.0;
  for (size_t i = 0; i < mu_t.size(); ++i) {
    const double mt = mu_t.data[i], mr = mu_r.data[i];
    const double var_t = tt.data[i] - mt * mt;
    const double var_r = rr.data[i] - mr * mr;
    const double cov = tr.data[i] - mt * mr;
    acc += ((2.0 * mt * mr + c1) * (2.0 * cov + c2)) /
           ((mt * mt + mr * mr + c1) * (var_t + var_r + c2));
  }
  return acc / static_cast<double>(mu_t.size());
}

MetricReport compute_metrics(const RealGrid& test, const RealGrid& ref) {
  return MetricReport{psnr(test, ref), nrmse(test, ref), ssim(test, ref)};
}

} // namespace bpr
