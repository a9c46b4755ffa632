#include "bpr/training.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace bpr {
namespace {

constexpr double kTargetScale = 1e5;

double center_block_energy(const MultiCoilKSpace& ksp, int block) {
  const int y0 = ksp.ny() / 2 - block / 2;
  const int z0 = ksp.nz() / 2 - block / 2;
  if (y0 < 0 || z0 < 0 || y0 + block > ksp.ny() || z0 + block > ksp.nz())
    throw InvalidInput("normalize_example: grid smaller than the center block");
  double e = 0.0;
  for (const auto& coil : ksp.coils)
    for (int y = y0; y < y0 + block; ++y)
      for (int z = z0; z < z0 + block; ++z) e += std::norm(coil.at(y, z));
  return e;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

std::pair<MultiCoilKSpace, NormalizationRecord> normalize_example(const MultiCoilKSpace& ksp) {
  const double energy = center_block_energy(ksp, 5);
  if (!(energy > 0.0))
    throw InvalidInput("normalize_example: zero center 5x5 energy, example rejected");
  const double scale = kTargetScale / std::sqrt(energy);
  MultiCoilKSpace out = ksp;
  for (auto& coil : out.coils)
    for (auto& v : coil.data) v *= scale;
  return {std::move(out), NormalizationRecord{scale}};
}

double l1_loss(const ComplexGrid& pred, const ComplexGrid& truth) {
  require_same_dims(pred, truth, "l1_loss");
  double s = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const cdouble d = pred.data[i] - truth.data[i];
    s += std::abs(d.real()) + std::abs(d.imag());
  }
  return s / static_cast<double>(pred.size());
}

double l1_loss(const ImageSet& pred, const ImageSet& truth) {
  if (pred.size() != truth.size()) throw DimensionMismatch("l1_loss: set counts differ");
  double s = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < pred.size(); ++i) {
    require_same_dims(pred[i], truth[i], "l1_loss");
    for (size_t j = 0; j < pred[i].size(); ++j) {
      const cdouble d = pred[i].data[j] - truth[i].data[j];
      s += std::abs(d.real()) + std::abs(d.imag());
    }
    n += pred[i].size();
  }
  return s / static_cast<double>(n);
}

double l1_loss(const MultiCoilKSpace& pred, const MultiCoilKSpace& truth) {
  if (pred.nc() != truth.nc()) throw DimensionMismatch("l1_loss: coil counts differ");
  double s = 0.0;
  size_t n = 0;
  for (int c = 0; c < pred.nc(); ++c) {
    require_same_dims(pred.coils[c], truth.coils[c], "l1_loss");
    for (size_t j = 0; j < pred.coils[c].size(); ++j) {
      const cdouble d = pred.coils[c].data[j] - truth.coils[c].data[j];
      s += std::abs(d.real()) + std::abs(d.imag());
    }
    n += pred.coils[c].size();
  }
  return s / static_cast<double>(n);
}

NetGrads NetGrads::zeros_like(const UnrolledNetParams& p) {
  NetGrads g;
  g.step_size.assign(p.iterations.size(), 0.0);
  for (const auto& iter : p.iterations)
    g.denoisers.push_back(DenoiserGrads::zeros_like(iter.denoiser));
  return g;
}

void NetGrads::scale(double s) {
  for (auto& v : step_size) v *= s;
  for (auto& d : denoisers) {
    for (auto& a : d.conv_w)
      for (auto& v : a) v *= s;
    for (auto& a : d.conv_b)
      for (auto& v : a) v *= s;
    for (auto& a : d.gamma)
      for (auto& v : a) v *= s;
    for (auto& a : d.beta)
      for (auto& v : a) v *= s;
  }
}

bool NetGrads::finite() const {
  auto ok = [](const std::vector<double>& a) {
    for (double v : a)
      if (!std::isfinite(v)) return false;
    return true;
  };
  if (!ok(step_size)) return false;
  for (const auto& d : denoisers) {
    for (const auto& a : d.conv_w)
      if (!ok(a)) return false;
    for (const auto& a : d.conv_b)
      if (!ok(a)) return false;
    for (const auto& a : d.gamma)
      if (!ok(a)) return false;
    for (const auto& a : d.beta)
      if (!ok(a)) return false;
  }
  return true;
}

namespace {

// sum over sets of Re<a, b> in the real-pair sense.
double real_inner(const ImageSet& a, const ImageSet& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j)
      s += a[i].data[j].real() * b[i].data[j].real() +
           a[i].data[j].imag() * b[i].data[j].imag();
  return s;
}

struct IterTape {
  std::vector<ImageSet> y_in;   // per example
  std::vector<ImageSet> grad;   // ls_gradient at y_in
  DenoiseCache denoise;
};

struct BatchTape {
  std::vector<ImageSet> y_final;
  std::vector<MultiCoilKSpace> out_pre; // windowed model output before projection, rescaled
  std::vector<double> scale;            // per-example unit-scale factor
  std::vector<IterTape> iters;
};

MultiCoilKSpace windowed(const MultiCoilKSpace& u, const RealGrid& w) {
  MultiCoilKSpace out = u;
  for (auto& coil : out.coils) mul_inplace(w, coil);
  return out;
}

// Forward pass shared by training (tape != null, Train-mode statistics) and
// evaluation (tape == null, frozen statistics). Returns the batch-mean loss.
double run_forward(const std::vector<PatchExample>& batch, const RealGrid& window,
                   UnrolledNetParams& params, bool update_running, BatchTape* tape,
                   NormMode mode) {
  const int nb = static_cast<int>(batch.size());
  if (nb == 0) throw InvalidInput("forward: empty batch");
  params.validate();
  // The iterations run at unit scale per example (see patch_problem_scale);
  // the head rescales so losses and projections see the raw magnitudes.
  std::vector<double> scales(nb);
  std::vector<MultiCoilKSpace> u_unit(nb);
  std::vector<ImageSet> ys(nb);
  for (int e = 0; e < nb; ++e) {
    const auto& ex = batch[e];
    MultiCoilKSpace wu = windowed(ex.u, window);
    scales[e] = patch_problem_scale(wu);
    u_unit[e] = ex.u;
    for (auto& coil : u_unit[e].coils)
      for (auto& v : coil.data) v /= scales[e];
    for (auto& coil : wu.coils)
      for (auto& v : coil.data) v /= scales[e];
    ys[e] = apply_B_adjoint(wu, ex.maps, ex.mask, window, ex.center);
  }
  if (tape) {
    tape->iters.resize(params.n_iter());
    tape->scale = scales;
  }
  for (int m = 0; m < params.n_iter(); ++m) {
    auto& iter = params.iterations[m];
    if (tape) {
      tape->iters[m].y_in = ys;
      tape->iters[m].grad.resize(nb);
    }
    for (int e = 0; e < nb; ++e) {
      const auto& ex = batch[e];
      ImageSet g = ls_gradient(ys[e], u_unit[e], ex.maps, ex.mask, window, ex.center);
      for (size_t s = 0; s < ys[e].size(); ++s)
        for (size_t i = 0; i < ys[e][s].size(); ++i)
          ys[e][s].data[i] += iter.step_size * g[s].data[i];
      if (tape) tape->iters[m].grad[e] = std::move(g);
    }
    Tensor x = pack_images(ys);
    Tensor out = denoise_forward(x, iter.denoiser, mode, update_running,
                                 tape ? &tape->iters[m].denoise : nullptr);
    ys = unpack_images(out);
  }
  double loss = 0.0;
  if (tape) {
    tape->y_final = ys;
    tape->out_pre.resize(nb);
  }
  for (int e = 0; e < nb; ++e) {
    const auto& ex = batch[e];
    ImageSet modulated(ys[e].size());
    for (size_t s = 0; s < ys[e].size(); ++s)
      modulated[s] = phase_modulate(ys[e][s], ex.center, PhaseDir::Forward);
    MultiCoilKSpace out = apply_model(modulated, ex.maps);
    for (auto& coil : out.coils) {
      mul_inplace(window, coil);
      for (auto& v : coil.data) v *= scales[e];
    }
    if (tape) tape->out_pre[e] = out;
    const MultiCoilKSpace projected =
        hard_data_projection(out, windowed(ex.u, window), ex.mask);
    loss += l1_loss(projected, ex.truth_w);
  }
  return loss / nb;
}

} // namespace

double forward_backward_batch(const std::vector<PatchExample>& batch, const RealGrid& window,
                              UnrolledNetParams& params, NetGrads& grads, bool update_running) {
  BatchTape tape;
  const double loss = run_forward(batch, window, params, update_running, &tape, NormMode::Train);
  const int nb = static_cast<int>(batch.size());

  // d loss / d out, zeroed on projected (measured) bins.
  std::vector<ImageSet> dy(nb);
  for (int e = 0; e < nb; ++e) {
    const auto& ex = batch[e];
    const MultiCoilKSpace& out = tape.out_pre[e];
    const double inv = 1.0 / (static_cast<double>(nb) * out.nc() * out.ny() * out.nz());
    MultiCoilKSpace dout(out.nc(), out.ny(), out.nz());
    for (int c = 0; c < out.nc(); ++c) {
      for (size_t i = 0; i < out.coils[c].size(); ++i) {
        if (ex.mask.data[i] == 1.0) continue; // projection replaced this bin
        const cdouble d = out.coils[c].data[i] -
                          ex.truth_w.coils[c].data[i];
        dout.coils[c].data[i] = inv * cdouble(sign(d.real()), sign(d.imag()));
      }
    }
    // Adjoint of scale * W o A o phase.
    for (auto& coil : dout.coils) {
      mul_inplace(window, coil);
      for (auto& v : coil.data) v *= tape.scale[e];
    }
    ImageSet di = apply_model_adjoint(dout, batch[e].maps);
    for (auto& ch : di) ch = phase_modulate(ch, batch[e].center, PhaseDir::Inverse);
    dy[e] = std::move(di);
  }

  for (int m = params.n_iter() - 1; m >= 0; --m) {
    const auto& iter = params.iterations[m];
    Tensor d_out = pack_images(dy);
    Tensor d_half =
        denoise_backward(d_out, iter.denoiser, tape.iters[m].denoise, grads.denoisers[m]);
    dy = unpack_images(d_half);
    for (int e = 0; e < nb; ++e) {
      const auto& ex = batch[e];
      grads.step_size[m] += real_inner(tape.iters[m].grad[e], dy[e]);
      // d/dy of (y + t * (B'B y - c)) applied to the cotangent: (I + t B'B).
      ImageSet bb = apply_B_adjoint(apply_B(dy[e], ex.maps, ex.mask, window, ex.center),
                                    ex.maps, ex.mask, window, ex.center);
      for (size_t s = 0; s < dy[e].size(); ++s)
        for (size_t i = 0; i < dy[e][s].size(); ++i)
          dy[e][s].data[i] += iter.step_size * bb[s].data[i];
    }
  }
  if (!grads.finite())
    throw TrainingError("backward: non-finite gradients (loss " + std::to_string(loss) + ")");
  return loss;
}

double forward_loss_batch(const std::vector<PatchExample>& batch, const RealGrid& window,
                          const UnrolledNetParams& params, NormMode mode) {
  UnrolledNetParams local = params;
  return run_forward(batch, window, local, false, nullptr, mode);
}

AdamState AdamState::zeros_like(const UnrolledNetParams& p) {
  return AdamState{0, NetGrads::zeros_like(p), NetGrads::zeros_like(p)};
}

namespace {

void adam_update_array(double* p, const double* g, double* m, double* v, size_t n,
                       const TrainConfig& c, double bc1, double bc2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
  }
}

} // namespace

void adam_step(UnrolledNetParams& params, const NetGrads& grads, AdamState& state,
               const TrainConfig& config) {
  config.validate();
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (size_t it = 0; it < params.iterations.size(); ++it) {
    adam_update_array(&params.iterations[it].step_size, &grads.step_size[it],
                      &state.m.step_size[it], &state.v.step_size[it], 1, config, bc1, bc2);
    auto& den = params.iterations[it].denoiser;
    const auto& dg = grads.denoisers[it];
    auto& dm = state.m.denoisers[it];
    auto& dv = state.v.denoisers[it];
    for (size_t l = 0; l < den.convs.size(); ++l) {
      adam_update_array(den.convs[l].w.data(), dg.conv_w[l].data(), dm.conv_w[l].data(),
                        dv.conv_w[l].data(), den.convs[l].w.size(), config, bc1, bc2);
      adam_update_array(den.convs[l].b.data(), dg.conv_b[l].data(), dm.conv_b[l].data(),
                        dv.conv_b[l].data(), den.convs[l].b.size(), config, bc1, bc2);
    }
    for (size_t l = 0; l < den.norms.size(); ++l) {
      adam_update_array(den.norms[l].gamma.data(), dg.gamma[l].data(), dm.gamma[l].data(),
                        dv.gamma[l].data(), den.norms[l].gamma.size(), config, bc1, bc2);
      adam_update_array(den.norms[l].beta.data(), dg.beta[l].data(), dm.beta[l].data(),
                        dv.beta[l].data(), den.norms[l].beta.size(), config, bc1, bc2);
    }
  }
}

std::vector<PatchExample> prepare_batch(const std::vector<TrainExample>& dataset,
                                        const std::vector<RealGrid>& masks,
                                        const TrainConfig& config, Rng& rng) {
  if (dataset.empty()) throw InvalidInput("prepare_batch: empty dataset");
  if (masks.empty()) throw InvalidInput("prepare_batch: no masks");
  std::vector<PatchExample> batch;
  batch.reserve(config.batch);
  for (int b = 0; b < config.batch; ++b) {
    const auto& ex = dataset[rng.next_below(dataset.size())];
    const RealGrid& mask = masks[rng.next_below(masks.size())];
    if (mask.ny != ex.kspace.ny() || mask.nz != ex.kspace.nz())
      throw DimensionMismatch("prepare_batch: mask/example dimensions differ");
    MultiCoilKSpace masked = ex.kspace;
    for (auto& coil : masked.coils) mul_inplace(mask, coil);
    // Normalize on the masked example (its calibration center is sampled) and
    // carry the same scale onto the fully sampled target.
    auto [normalized, record] = normalize_example(masked);
    MultiCoilKSpace truth = ex.kspace;
    for (auto& coil : truth.coils)
      for (auto& v : coil.data) v *= record.scale;

    const int sy = static_cast<int>(rng.next_below(ex.kspace.ny() - config.patch_ny + 1));
    const int sz = static_cast<int>(rng.next_below(ex.kspace.nz() - config.patch_nz + 1));
    const PatchCenter center{sy + config.patch_ny / 2 - ex.kspace.ny() / 2,
                             sz + config.patch_nz / 2 - ex.kspace.nz() / 2};
    const RealGrid window = make_window({config.patch_ny, config.patch_nz, config.stopband});
    PatchExample item;
    item.u = extract_patch(normalized, center, config.patch_ny, config.patch_nz);
    item.truth_w = windowed(extract_patch(truth, center, config.patch_ny, config.patch_nz),
                            window);
    item.mask = extract_patch(mask, center, config.patch_ny, config.patch_nz);
    item.center = center;
    item.maps = make_coils(ex.coils, config.patch_ny, config.patch_nz);
    batch.push_back(std::move(item));
  }
  return batch;
}

double train_step(UnrolledNetParams& params, const std::vector<PatchExample>& batch,
                  const RealGrid& window, AdamState& state, const TrainConfig& config) {
  NetGrads grads = NetGrads::zeros_like(params);
  const double loss = forward_backward_batch(batch, window, params, grads, true);
  adam_step(params, grads, state, config);
  return loss;
}

TrainResult train_loop(const std::vector<TrainExample>& dataset,
                       const std::vector<RealGrid>& masks, const TrainConfig& config) {
  config.validate();
  TrainResult result;
  result.params = UnrolledNetParams::initial(config.n_iter, config.nsets, config.feature_width,
                                             config.seed);
  if (config.steps == 0) return result;
  AdamState state = AdamState::zeros_like(result.params);
  Rng rng(config.seed ^ 0x7261696eULL);
  const RealGrid window = make_window({config.patch_ny, config.patch_nz, config.stopband});
  const auto t0 = std::chrono::steady_clock::now();
  for (int step = 0; step < config.steps; ++step) {
    const auto batch = prepare_batch(dataset, masks, config, rng);
    const double loss = train_step(result.params, batch, window, state, config);
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    if (!std::isfinite(loss)) {
      std::ostringstream dump;
      dump << "train_loop: loss diverged at step " << step << " (loss " << loss
           << "); recent losses:";
      const size_t tail = result.curve.size() > 5 ? result.curve.size() - 5 : 0;
      for (size_t i = tail; i < result.curve.size(); ++i) dump << ' ' << result.curve[i].loss;
      throw TrainingError(dump.str());
    }
    result.curve.push_back({step, loss, wall_ms});
  }
  return result;
}

} // namespace bpr
