#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bpr/metrics.hpp"
#include "bpr/rng.hpp"
#include "test_util.hpp"

using namespace bpr;
using namespace bpr::test;

namespace {

RealGrid random_image(int ny, int nz, Rng& rng, double lo = 0.0, double hi = 1.0) {
  RealGrid g(ny, nz);
  for (auto& v : g.data) v = rng.uniform(lo, hi);
  return g;
}

// Direct-formula SSIM oracle: per-pixel 11x11 Gaussian-weighted local stats
// with explicit nested loops, valid region only.
double ssim_direct(const RealGrid& test, const RealGrid& ref) {
  const int win = 11, half = 5;
  const double sigma = 1.5;
  double taps[11][11];
  double tsum = 0.0;
  for (int a = 0; a < win; ++a)
    for (int b = 0; b < win; ++b) {
      const double dy = a - half, dz = b - half;
      taps[a][b] = std::exp(-0.5 * (dy * dy + dz * dz) / (sigma * sigma));
      tsum += taps[a][b];
    }
  for (int a = 0; a < win; ++a)
    for (int b = 0; b < win; ++b) taps[a][b] /= tsum;

  double range = 0.0;
  for (double v : ref.data) range = std::max(range, v);
  const double c1 = (0.01 * range) * (0.01 * range);
  const double c2 = (0.03 * range) * (0.03 * range);

  double acc = 0.0;
  int count = 0;
  for (int y = half; y < test.ny - half; ++y) {
    for (int z = half; z < test.nz - half; ++z) {
      double mt = 0, mr = 0, tt = 0, rr = 0, tr = 0;
      for (int a = -half; a <= half; ++a)
        for (int b = -half; b <= half; ++b) {
          const double wv = taps[a + half][b + half];
          const double t = test.at(y + a, z + b);
          const double r = ref.at(y + a, z + b);
          mt += wv * t;
          mr += wv * r;
          tt += wv * t * t;
          rr += wv * r * r;
          tr += wv * t * r;
        }
      const double vt = tt - mt * mt, vr = rr - mr * mr, cov = tr - mt * mr;
      acc += ((2 * mt * mr + c1) * (2 * cov + c2)) / ((mt * mt + mr * mr + c1) * (vt + vr + c2));
      ++count;
    }
  }
  return acc / count;
}

} // namespace

TEST_CASE("nrmse: trivial values and scale law") {
  Rng rng(0);
  const RealGrid ref = random_image(16, 16, rng, 0.1, 1.0);
  CHECK(nrmse(ref, ref) == 0.0);
  RealGrid zero(16, 16, 0.0);
  CHECK(nrmse(zero, ref) == doctest::Approx(1.0).epsilon(1e-12));
  RealGrid twice = ref;
  for (auto& v : twice.data) v *= 2.0;
  CHECK(nrmse(twice, ref) == doctest::Approx(1.0).epsilon(1e-12));
  for (const double alpha : {0.3, 1.7, 2.5}) {
    RealGrid scaled = ref;
    for (auto& v : scaled.data) v *= alpha;
    CHECK(std::abs(nrmse(scaled, ref) - std::abs(alpha - 1.0)) < 1e-9);
  }
}

TEST_CASE("psnr: sentinel, 3.01 dB halving law, brute force match") {
  Rng rng(1);
  const RealGrid ref = random_image(8, 8, rng, 0.0, 2.0);
  CHECK(std::isinf(psnr(ref, ref)));

  RealGrid noise(8, 8);
  for (auto& v : noise.data) v = rng.next_normal();
  RealGrid t1(8, 8), t2(8, 8);
  for (size_t i = 0; i < ref.size(); ++i) {
    t1.data[i] = ref.data[i] + noise.data[i];
    t2.data[i] = ref.data[i] + noise.data[i] / std::sqrt(2.0);
  }
  // halving the MSE raises PSNR by 10*log10(2) dB
  CHECK(std::abs((psnr(t2, ref) - psnr(t1, ref)) - 10.0 * std::log10(2.0)) < 1e-9);

  // brute-force direct formula
  double mse = 0.0, peak = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    mse += (t1.data[i] - ref.data[i]) * (t1.data[i] - ref.data[i]);
    peak = std::max(peak, ref.data[i]);
  }
  mse /= ref.size();
  CHECK(psnr(t1, ref) == doctest::Approx(20.0 * std::log10(peak / std::sqrt(mse))).epsilon(1e-12));

  // strictly decreasing in MSE
  CHECK(psnr(t2, ref) > psnr(t1, ref));
}

TEST_CASE("ssim: identity, anticorrelation, independent implementation") {
  Rng rng(2);
  const RealGrid ref = random_image(32, 32, rng, 0.0, 1.0);
  CHECK(ssim(ref, ref) == 1.0);

  // locally zero-mean anticorrelated structure drives ssim negative: the
  // luminance term stays near 1 while the structure term flips sign
  RealGrid zm(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int z = 0; z < 32; ++z)
      zm.at(y, z) = ((y + z) % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * rng.next_double());
  RealGrid neg = zm;
  for (auto& v : neg.data) v = -v;
  CHECK(ssim(neg, zm) < 0.0);

  const RealGrid test = random_image(32, 32, rng, 0.0, 1.0);
  CHECK(std::abs(ssim(test, ref) - ssim_direct(test, ref)) < 1e-10);

  // symmetric when the dynamic ranges agree
  RealGrid a = random_image(32, 32, rng, 0.0, 1.0);
  RealGrid b = random_image(32, 32, rng, 0.0, 1.0);
  a.data[5] = 1.0;
  b.data[9] = 1.0; // pin both maxima to 1
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
}

TEST_CASE("metric report bundles all three") {
  Rng rng(3);
  const RealGrid ref = random_image(16, 16, rng, 0.2, 1.0);
  RealGrid test = ref;
  test.at(3, 3) += 0.25;
  const MetricReport r = compute_metrics(test, ref);
  CHECK(r.nrmse > 0.0);
  CHECK(std::isfinite(r.psnr));
  CHECK(r.ssim < 1.0);
  CHECK(r.ssim >= -1.0);
}

TEST_CASE("metrics reject mismatched dimensions") {
  RealGrid a(8, 8, 0.5), b(8, 9, 0.5);
  CHECK_THROWS_AS(nrmse(a, b), DimensionMismatch);
  CHECK_THROWS_AS(psnr(a, b), DimensionMismatch);
  CHECK_THROWS_AS(ssim(a, b), DimensionMismatch);
}
