#ifndef BPR_DENOISER_HPP
#define BPR_DENOISER_HPP

#include <cstdint>
#include <vector>

#include "bpr/grid.hpp"
#include "bpr/rng.hpp"

namespace bpr {

/// Batch of planar channel images, layout [batch][channel][y][z].
struct Tensor {
  int nb = 0, nc = 0, ny = 0, nz = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int nb_, int nc_, int ny_, int nz_)
      : nb(nb_), nc(nc_), ny(ny_), nz(nz_),
        v(static_cast<size_t>(nb_) * nc_ * ny_ * nz_, 0.0) {}

  size_t plane_size() const { return static_cast<size_t>(ny) * nz; }
  double* plane(int b, int c) {
    return v.data() + (static_cast<size_t>(b) * nc + c) * plane_size();
  }
  const double* plane(int b, int c) const {
    return v.data() + (static_cast<size_t>(b) * nc + c) * plane_size();
  }
};

/// 3x3 circular convolution layer; weights laid out [out][in][ky][kz].
struct ConvLayer {
  int in_ch = 0, out_ch = 0;
  std::vector<double> w;
  std::vector<double> b;
};

/// Per-channel normalization parameters and running statistics.
struct NormLayer {
  std::vector<double> gamma, beta, running_mean, running_var;
};

enum class NormMode { Train, Frozen };

/// Residual convolutional denoiser acting on the real/imaginary channels of
/// the image estimate: an expanding 3x3 conv to feature_width maps, five
/// hidden 3x3 convs, and a contracting linear conv back to 2*nsets channels,
/// with normalization + ReLU after every conv except the last, all circular,
/// and the block input added to the output.
struct DenoiserParams {
  int nsets = 1;
  int feature_width = 16;
  std::vector<ConvLayer> convs; // 7: expand, 5 hidden, contract
  std::vector<NormLayer> norms; // 6: after convs 0..5

  static DenoiserParams identity(int nsets, int feature_width);
  static DenoiserParams random_init(int nsets, int feature_width, Rng& rng);
  void validate() const;
};

/// Intermediates captured by the training forward pass.
struct DenoiseCache {
  std::vector<Tensor> conv_in;             // input of each conv (7)
  std::vector<Tensor> bn_xhat;             // normalized activation per norm layer
  std::vector<std::vector<double>> bn_invstd; // per norm layer, per channel
};

struct DenoiserGrads {
  std::vector<std::vector<double>> conv_w, conv_b, gamma, beta;

  static DenoiserGrads zeros_like(const DenoiserParams& p);
};

/// Forward pass over a batch. Train mode normalizes with batch statistics
/// (per channel over batch and space) and, when update_running is set, folds
/// them into the running statistics with momentum 0.1; Frozen mode uses the
/// stored running statistics. `cache` may be null for inference.
Tensor denoise_forward(const Tensor& x, DenoiserParams& params, NormMode mode,
                       bool update_running, DenoiseCache* cache);

/// Reverse-mode pass matching a Train-mode forward; accumulates parameter
/// gradients into `grads` and returns the gradient w.r.t. the block input.
Tensor denoise_backward(const Tensor& d_out, const DenoiserParams& params,
                        const DenoiseCache& cache, DenoiserGrads& grads);

/// Complex image channels <-> real channel pairs (re, im per set).
Tensor pack_images(const std::vector<ImageSet>& batch);
std::vector<ImageSet> unpack_images(const Tensor& t);

} // namespace bpr

#endif
