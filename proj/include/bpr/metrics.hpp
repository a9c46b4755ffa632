#ifndef BPR_METRICS_HPP
#define BPR_METRICS_HPP

#include "bpr/grid.hpp"

namespace bpr {

struct MetricReport {
  double psnr = 0.0;  // dB; +inf when images are identical
  double nrmse = 0.0;
  double ssim = 0.0;  // in [-1, 1]
};

/// ||test - ref||_2 / ||ref||_2. Reference must have nonzero norm.
double nrmse(const RealGrid& test, const RealGrid& ref);

/// 20 * log10(max(ref) / rms(test - ref)); +inf for identical images.
double psnr(const RealGrid& test, const RealGrid& ref);

/// Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range = max(ref). The map is evaluated where the window
/// fits entirely inside the image.
double ssim(const RealGrid& test, const RealGrid& ref);

MetricReport compute_metrics(const RealGrid& test, const RealGrid& ref);

/// Magnitude image of a complex grid, for metric evaluation.
RealGrid magnitude(const ComplexGrid& img);

} // namespace bpr

#endif
