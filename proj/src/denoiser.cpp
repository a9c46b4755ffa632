#include "bpr/denoiser.hpp"

#include <cmath>
#include <cstring>

namespace bpr {
namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr int kHiddenConvs = 5;

// acc[z] += s * src[(z + dz) mod nz], dz in {-1, 0, 1}
void axpy_shift(double* acc, const double* src, int nz, int dz, double s) {
  if (dz == 0) {
    for (int z = 0; z < nz; ++z) acc[z] += s * src[z];
  } else if (dz == 1) {
    for (int z = 0; z + 1 < nz; ++z) acc[z] += s * src[z + 1];
    acc[nz - 1] += s * src[0];
  } else {
    acc[0] += s * src[nz - 1];
    for (int z = 1; z < nz; ++z) acc[z] += s * src[z - 1];
  }
}

// sum_z a[z] * b[(z + dz) mod nz]
double dot_shift(const double* a, const double* b, int nz, int dz) {
  double s = 0.0;
  if (dz == 0) {
    for (int z = 0; z < nz; ++z) s += a[z] * b[z];
  } else if (dz == 1) {
    for (int z = 0; z + 1 < nz; ++z) s += a[z] * b[z + 1];
    s += a[nz - 1] * b[0];
  } else {
    s += a[0] * b[nz - 1];
    for (int z = 1; z < nz; ++z) s += a[z] * b[z - 1];
  }
  return s;
}

Tensor conv3x3_forward(const Tensor& in, const ConvLayer& L) {
  Tensor out(in.nb, L.out_ch, in.ny, in.nz);
  const int ny = in.ny, nz = in.nz;
  for (int b = 0; b < in.nb; ++b) {
    for (int oc = 0; oc < L.out_ch; ++oc) {
      double* op = out.plane(b, oc);
      const double bias = L.b[oc];
      for (size_t i = 0; i < out.plane_size(); ++i) op[i] = bias;
      for (int ic = 0; ic < L.in_ch; ++ic) {
        const double* ip = in.plane(b, ic);
        const double* wk = &L.w[(static_cast<size_t>(oc) * L.in_ch + ic) * 9];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const double wv = wk[(dy + 1) * 3 + (dz + 1)];
            if (wv == 0.0) continue;
            for (int y = 0; y < ny; ++y) {
              const int sy = (y + dy + ny) % ny;
              axpy_shift(op + static_cast<size_t>(y) * nz, ip + static_cast<size_t>(sy) * nz,
                         nz, dz, wv);
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor conv3x3_backward_input(const Tensor& d_out, const ConvLayer& L, int ny, int nz) {
  Tensor d_in(d_out.nb, L.in_ch, ny, nz);
  for (int b = 0; b < d_out.nb; ++b) {
    for (int ic = 0; ic < L.in_ch; ++ic) {
      double* dip = d_in.plane(b, ic);
      for (int oc = 0; oc < L.out_ch; ++oc) {
        const double* dop = d_out.plane(b, oc);
        const double* wk = &L.w[(static_cast<size_t>(oc) * L.in_ch + ic) * 9];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            const double wv = wk[(dy + 1) * 3 + (dz + 1)];
            if (wv == 0.0) continue;
            // d_in[y][z] += w * d_out[(y - dy) mod][(z - dz) mod]
            for (int y = 0; y < ny; ++y) {
              const int sy = (y - dy + ny) % ny;
              axpy_shift(dip + static_cast<size_t>(y) * nz, dop + static_cast<size_t>(sy) * nz,
                         nz, -dz, wv);
            }
          }
        }
      }
    }
  }
  return d_in;
}

void conv3x3_backward_params(const Tensor& d_out, const Tensor& in, const ConvLayer& L,
                             std::vector<double>& d_w, std::vector<double>& d_b) {
  const int ny = in.ny, nz = in.nz;
  for (int b = 0; b < in.nb; ++b) {
    for (int oc = 0; oc < L.out_ch; ++oc) {
      const double* dop = d_out.plane(b, oc);
      double bsum = 0.0;
      for (size_t i = 0; i < d_out.plane_size(); ++i) bsum += dop[i];
      d_b[oc] += bsum;
      for (int ic = 0; ic < L.in_ch; ++ic) {
        const double* ip = in.plane(b, ic);
        double* dwk = &d_w[(static_cast<size_t>(oc) * L.in_ch + ic) * 9];
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            double s = 0.0;
            for (int y = 0; y < ny; ++y) {
              const int sy = (y + dy + ny) % ny;
              s += dot_shift(dop + static_cast<size_t>(y) * nz,
                             ip + static_cast<size_t>(sy) * nz, nz, dz);
            }
            dwk[(dy + 1) * 3 + (dz + 1)] += s;
          }
        }
      }
    }
  }
}

// Normalization over (batch, y, z) per channel.
void bn_forward(Tensor& x, NormLayer& n, NormMode mode, bool update_running,
                std::vector<double>* invstd_out, Tensor* xhat_out) {
  const int nc = x.nc;
  const size_t per_plane = x.plane_size();
  const double count = static_cast<double>(x.nb) * per_plane;
  if (xhat_out) *xhat_out = Tensor(x.nb, nc, x.ny, x.nz);
  if (invstd_out) invstd_out->assign(nc, 0.0);
  for (int c = 0; c < nc; ++c) {
    double mean, var;
    if (mode == NormMode::Train) {
      double s = 0.0, s2 = 0.0;
      for (int b = 0; b < x.nb; ++b) {
        const double* p = x.plane(b, c);
        for (size_t i = 0; i < per_plane; ++i) {
          s += p[i];
          s2 += p[i] * p[i];
        }
      }
      mean = s / count;
      var = std::max(0.0, s2 / count - mean * mean);
      if (update_running) {
        n.running_mean[c] = (1.0 - kBnMomentum) * n.running_mean[c] + kBnMomentum * mean;
        n.running_var[c] = (1.0 - kBnMomentum) * n.running_var[c] + kBnMomentum * var;
      }
    } else {
      mean = n.running_mean[c];
      var = n.running_var[c];
    }
    const double invstd = 1.0 / std::sqrt(var + kBnEps);
    if (invstd_out) (*invstd_out)[c] = invstd;
    const double g = n.gamma[c], bta = n.beta[c];
    for (int b = 0; b < x.nb; ++b) {
      double* p = x.plane(b, c);
      double* xh = xhat_out ? xhat_out->plane(b, c) : nullptr;
      for (size_t i = 0; i < per_plane; ++i) {
        const double xhat = (p[i] - mean) * invstd;
        if (xh) xh[i] = xhat;
        p[i] = g * xhat + bta;
      }
    }
  }
}

// Standard batch-norm backward for Train-mode statistics.
Tensor bn_backward(const Tensor& d_out, const NormLayer& n, const Tensor& xhat,
                   const std::vector<double>& invstd, std::vector<double>& d_gamma,
                   std::vector<double>& d_beta) {
  Tensor d_in(d_out.nb, d_out.nc, d_out.ny, d_out.nz);
  const size_t per_plane = d_out.plane_size();
  const double count = static_cast<double>(d_out.nb) * per_plane;
  for (int c = 0; c < d_out.nc; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (int b = 0; b < d_out.nb; ++b) {
      const double* dy = d_out.plane(b, c);
      const double* xh = xhat.plane(b, c);
      for (size_t i = 0; i < per_plane; ++i) {
        sum_dy += dy[i];
        sum_dy_xhat += dy[i] * xh[i];
      }
    }
    d_beta[c] += sum_dy;
    d_gamma[c] += sum_dy_xhat;
    const double g = n.gamma[c];
    const double mean_dy = sum_dy / count;
    const double mean_dy_xhat = sum_dy_xhat / count;
    for (int b = 0; b < d_out.nb; ++b) {
      const double* dy = d_out.plane(b, c);
      const double* xh = xhat.plane(b, c);
      double* dx = d_in.plane(b, c);
      for (size_t i = 0; i < per_plane; ++i)
        dx[i] = g * invstd[c] * (dy[i] - mean_dy - xh[i] * mean_dy_xhat);
    }
  }
  return d_in;
}

void relu_inplace(Tensor& x) {
  for (auto& v : x.v)
    if (v < 0.0) v = 0.0;
}

} // namespace

DenoiserParams DenoiserParams::identity(int nsets, int feature_width) {
  DenoiserParams p;
  p.nsets = nsets;
  p.feature_width = feature_width;
  const int io = 2 * nsets;
  auto make_conv = [](int in_ch, int out_ch) {
    ConvLayer c;
    c.in_ch = in_ch;
    c.out_ch = out_ch;
    c.w.assign(static_cast<size_t>(in_ch) * out_ch * 9, 0.0);
    c.b.assign(out_ch, 0.0);
    return c;
  };
  p.convs.push_back(make_conv(io, feature_width));
  for (int i = 0; i < kHiddenConvs; ++i) p.convs.push_back(make_conv(feature_width, feature_width));
  p.convs.push_back(make_conv(feature_width, io));
  for (int i = 0; i < kHiddenConvs + 1; ++i) {
    NormLayer n;
    n.gamma.assign(feature_width, 1.0);
    n.beta.assign(feature_width, 0.0);
    n.running_mean.assign(feature_width, 0.0);
    n.running_var.assign(feature_width, 1.0);
    p.norms.push_back(std::move(n));
  }
  return p;
}

DenoiserParams DenoiserParams::random_init(int nsets, int feature_width, Rng& rng) {
  DenoiserParams p = identity(nsets, feature_width);
  for (size_t l = 0; l < p.convs.size(); ++l) {
    auto& c = p.convs[l];
    // He initialization; the contracting layer starts small so the residual
    // block opens near the identity.
    const double scale = (l + 1 == p.convs.size()) ? 0.01 : 1.0;
    const double stddev = scale * std::sqrt(2.0 / (9.0 * c.in_ch));
    for (auto& w : c.w) w = stddev * rng.next_normal();
  }
  return p;
}

void DenoiserParams::validate() const {
  const int io = 2 * nsets;
  if (convs.size() != static_cast<size_t>(kHiddenConvs + 2))
    throw InvalidInput("DenoiserParams: expected 7 conv layers");
  if (norms.size() != static_cast<size_t>(kHiddenConvs + 1))
    throw InvalidInput("DenoiserParams: expected 6 norm layers");
  if (convs.front().in_ch != io || convs.back().out_ch != io)
    throw InvalidInput("DenoiserParams: boundary channel counts must equal 2*nsets");
  for (size_t l = 0; l < convs.size(); ++l) {
    const auto& c = convs[l];
    if (l > 0 && c.in_ch != convs[l - 1].out_ch)
      throw InvalidInput("DenoiserParams: channel chain mismatch at layer " + std::to_string(l));
    if (l + 1 < convs.size() && c.out_ch != feature_width)
      throw InvalidInput("DenoiserParams: interior channels must equal feature_width");
    if (c.w.size() != static_cast<size_t>(c.in_ch) * c.out_ch * 9 ||
        c.b.size() != static_cast<size_t>(c.out_ch))
      throw InvalidInput("DenoiserParams: weight array sizes inconsistent");
  }
  for (const auto& n : norms)
    if (n.gamma.size() != static_cast<size_t>(feature_width) ||
        n.beta.size() != n.gamma.size() || n.running_mean.size() != n.gamma.size() ||
        n.running_var.size() != n.gamma.size())
      throw InvalidInput("DenoiserParams: norm array sizes inconsistent");
}

DenoiserGrads DenoiserGrads::zeros_like(const DenoiserParams& p) {
  DenoiserGrads g;
  for (const auto& c : p.convs) {
    g.conv_w.emplace_back(c.w.size(), 0.0);
    g.conv_b.emplace_back(c.b.size(), 0.0);
  }
  for (const auto& n : p.norms) {
    g.gamma.emplace_back(n.gamma.size(), 0.0);
    g.beta.emplace_back(n.beta.size(), 0.0);
  }
  return g;
}

Tensor denoise_forward(const Tensor& x, DenoiserParams& params, NormMode mode,
                       bool update_running, DenoiseCache* cache) {
  if (x.nc != 2 * params.nsets)
    throw DimensionMismatch("denoise_forward: input channels " + std::to_string(x.nc) +
                            " != 2*nsets = " + std::to_string(2 * params.nsets));
  const int n_layers = static_cast<int>(params.convs.size());
  if (cache) {
    cache->conv_in.clear();
    cache->bn_xhat.assign(params.norms.size(), Tensor());
    cache->bn_invstd.assign(params.norms.size(), {});
  }
  Tensor cur = x;
  for (int l = 0; l < n_layers; ++l) {
    if (cache) cache->conv_in.push_back(cur);
    Tensor next = conv3x3_forward(cur, params.convs[l]);
    if (l + 1 < n_layers) {
      bn_forward(next, params.norms[l], mode, update_running,
                 cache ? &cache->bn_invstd[l] : nullptr, cache ? &cache->bn_xhat[l] : nullptr);
      relu_inplace(next);
    }
    cur = std::move(next);
  }
  // Residual connection.
  for (size_t i = 0; i < cur.v.size(); ++i) cur.v[i] += x.v[i];
  return cur;
}

Tensor denoise_backward(const Tensor& d_out, const DenoiserParams& params,
                        const DenoiseCache& cache, DenoiserGrads& grads) {
  const int n_layers = static_cast<int>(params.convs.size());
  Tensor d_cur = d_out;
  for (int l = n_layers - 1; l >= 0; --l) {
    if (l + 1 < n_layers) {
      // ReLU: its output is the next conv's cached input, zero exactly where
      // the activation was clipped.
      const Tensor& relu_out = cache.conv_in[l + 1];
      for (size_t i = 0; i < d_cur.v.size(); ++i)
        if (relu_out.v[i] <= 0.0) d_cur.v[i] = 0.0;
      d_cur = bn_backward(d_cur, params.norms[l], cache.bn_xhat[l], cache.bn_invstd[l],
                          grads.gamma[l], grads.beta[l]);
    }
    conv3x3_backward_params(d_cur, cache.conv_in[l], params.convs[l], grads.conv_w[l],
                            grads.conv_b[l]);
    d_cur = conv3x3_backward_input(d_cur, params.convs[l], cache.conv_in[l].ny,
                                   cache.conv_in[l].nz);
  }
  // Residual path.
  for (size_t i = 0; i < d_cur.v.size(); ++i) d_cur.v[i] += d_out.v[i];
  return d_cur;
}

Tensor pack_images(const std::vector<ImageSet>& batch) {
  if (batch.empty() || batch[0].empty()) throw InvalidInput("pack_images: empty batch");
  const int nsets = static_cast<int>(batch[0].size());
  const int ny = batch[0][0].ny, nz = batch[0][0].nz;
  Tensor t(static_cast<int>(batch.size()), 2 * nsets, ny, nz);
  for (int b = 0; b < t.nb; ++b) {
    for (int s = 0; s < nsets; ++s) {
      const ComplexGrid& g = batch[b][s];
      if (g.ny != ny || g.nz != nz) throw DimensionMismatch("pack_images: ragged batch");
      double* re = t.plane(b, 2 * s);
      double* im = t.plane(b, 2 * s + 1);
      for (size_t i = 0; i < g.size(); ++i) {
        re[i] = g.data[i].real();
        im[i] = g.data[i].imag();
      }
    }
  }
  return t;
}

std::vector<ImageSet> unpack_images(const Tensor& t) {
  if (t.nc % 2 != 0) throw InvalidInput("unpack_images: odd channel count");
  const int nsets = t.nc / 2;
  std::vector<ImageSet> batch(t.nb, ImageSet(nsets, ComplexGrid(t.ny, t.nz)));
  for (int b = 0; b < t.nb; ++b) {
    for (int s = 0; s < nsets; ++s) {
      const double* re = t.plane(b, 2 * s);
      const double* im = t.plane(b, 2 * s + 1);
      ComplexGrid& g = batch[b][s];
      for (size_t i = 0; i < g.size(); ++i) g.data[i] = cdouble(re[i], im[i]);
    }
  }
  return batch;
}

} // namespace bpr
