// Acceptance suite: every release criterion as one pass/fail line, exercising
// operator exactness, oracle equivalence, toy training efficacy, and the
// scaling/overlap/mask trend reproductions end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bpr/metrics.hpp"
#include "bpr/network.hpp"
#include "bpr/parallel.hpp"
#include "bpr/sampling.hpp"
#include "bpr/training.hpp"

using namespace bpr;

namespace {

struct CheckResult {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Rng g_rng(2024);

ComplexGrid random_grid(int ny, int nz, Rng& rng) {
  ComplexGrid g(ny, nz);
  for (auto& v : g.data) v = cdouble(rng.next_normal(), rng.next_normal());
  return g;
}

MultiCoilKSpace random_kspace(int nc, int ny, int nz, Rng& rng) {
  MultiCoilKSpace k(nc, ny, nz);
  for (auto& c : k.coils) c = random_grid(ny, nz, rng);
  return k;
}

SensitivityMaps random_maps(int nsets, int nc, int ny, int nz, Rng& rng) {
  SensitivityMaps maps;
  maps.sets.assign(nsets, {});
  for (int s = 0; s < nsets; ++s)
    for (int c = 0; c < nc; ++c) maps.sets[s].push_back(random_grid(ny, nz, rng));
  for (int y = 0; y < ny; ++y)
    for (int z = 0; z < nz; ++z) {
      double s2 = 0.0;
      for (auto& set : maps.sets)
        for (auto& coil : set) s2 += std::norm(coil.at(y, z));
      const double inv = s2 > 0.0 ? 1.0 / std::sqrt(s2) : 0.0;
      for (auto& set : maps.sets)
        for (auto& coil : set) coil.at(y, z) *= inv;
    }
  return maps;
}

// ---- shared synthetic evaluation cases -----------------------------------

struct EvalCase {
  MultiCoilKSpace measured;
  RealGrid mask;
  RealGrid truth_mag;
  RealGrid zf_mag;
  CoilSpec coils;
};

EvalCase make_eval_case(int ny, int nz, int nc, double R, uint64_t seed) {
  PhantomSpec ps;
  ps.ny = ny;
  ps.nz = nz;
  ps.seed = seed * 2654435761ULL + 17;
  CoilSpec cs{nc, 0.7, 1, seed * 40503ULL + 5};
  const SensitivityMaps maps = make_coils(cs, ny, nz);
  const MultiCoilKSpace full = synthesize_kspace(make_phantom(ps), maps);
  EvalCase c{full, generate_mask({ny, nz, R, MaskDensity::Variable, 2.0, 20, seed * 7919ULL + 1}),
             RealGrid(), RealGrid(), cs};
  for (auto& coil : c.measured.coils) mul_inplace(c.mask, coil);
  c.truth_mag = magnitude(apply_model_adjoint(full, maps)[0]);
  c.zf_mag = magnitude(apply_model_adjoint(c.measured, maps)[0]);
  return c;
}

struct TrainedModels {
  std::optional<UnrolledNetParams> four_iter;
  std::optional<UnrolledNetParams> two_iter;
  double four_iter_nrmse = 0.0;
  double two_iter_nrmse = 0.0;
  double zf_nrmse = 0.0;
} g_models;

std::string g_model_cache; // development shortcut: reuse trained checkpoints

UnrolledNetParams train_depth(int n_iter) {
  const std::string cached =
      g_model_cache.empty() ? "" : g_model_cache + "/depth" + std::to_string(n_iter) + ".ckpt";
  if (!cached.empty()) {
    try {
      return load_checkpoint(cached);
    } catch (const IoError&) {
      // fall through and train
    }
  }
  const int n = 96, nc = 4;
  std::vector<TrainExample> dataset;
  for (uint64_t s = 0; s < 512; ++s) {
    PhantomSpec ps;
    ps.ny = ps.nz = n;
    ps.seed = s;
    CoilSpec cs{nc, 0.7, 1, 1000 + s};
    dataset.push_back({synthesize_kspace(make_phantom(ps), make_coils(cs, n, n)), cs});
  }
  std::vector<RealGrid> masks;
  for (uint64_t s = 0; s < 16; ++s)
    masks.push_back(
        generate_mask({n, n, 3.6 + 0.05 * s, MaskDensity::Variable, 2.0, 20, 50 + s}));
  TrainConfig cfg;
  cfg.lr = 0.003;
  cfg.batch = 4;
  cfg.steps = 1400;
  cfg.patch_ny = cfg.patch_nz = 32;
  cfg.stopband = 10;
  cfg.n_iter = n_iter;
  cfg.feature_width = 16;
  cfg.seed = 0;
  UnrolledNetParams params = train_loop(dataset, masks, cfg).params;
  if (!cached.empty()) save_checkpoint(cached, params);
  return params;
}

// Mean metrics of a parameter set over the 50 held-out phantoms.
struct HeldOutScore {
  double net_nrmse = 0.0, zf_nrmse = 0.0, net_ssim = 0.0, zf_ssim = 0.0;
  bool bounded = true;
};

HeldOutScore eval_held_out(const UnrolledNetParams& params) {
  HeldOutScore s;
  ReconOptions opt;
  opt.patch_ny = opt.patch_nz = 32;
  opt.stopband = 10;
  opt.pad = 10;
  opt.workers = 4;
  const int count = 50;
  for (int i = 0; i < count; ++i) {
    const EvalCase c = make_eval_case(96, 96, 4, 4.0, 9000 + i);
    auto maps_for = [&](int ny, int nz) { return make_coils(c.coils, ny, nz); };
    const ReconResult res = reconstruct_full(c.measured, maps_for, c.mask, opt, params);
    if (norm2(res.kspace) > 10.0 * norm2(c.measured)) s.bounded = false;
    const RealGrid mag = magnitude(res.image);
    s.net_nrmse += nrmse(mag, c.truth_mag);
    s.zf_nrmse += nrmse(c.zf_mag, c.truth_mag);
    s.net_ssim += ssim(mag, c.truth_mag);
    s.zf_ssim += ssim(c.zf_mag, c.truth_mag);
  }
  s.net_nrmse /= count;
  s.zf_nrmse /= count;
  s.net_ssim /= count;
  s.zf_ssim /= count;
  return s;
}

// ---- criteria -------------------------------------------------------------

CheckResult criterion_adjointness() {
  const auto t0 = Clock::now();
  Rng rng(42);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 8 + static_cast<int>(rng.next_below(57));
    const int nc = 1 + static_cast<int>(rng.next_below(6));
    const int nsets = 1 + static_cast<int>(rng.next_below(2));
    const SensitivityMaps maps = random_maps(nsets, nc, n, n, rng);
    RealGrid mask(n, n), window(n, n);
    for (auto& v : mask.data) v = rng.next_double() < 0.4 ? 1.0 : 0.0;
    for (auto& v : window.data) v = rng.next_double();
    const PatchCenter center{static_cast<int>(rng.next_below(n)) - n / 2,
                             static_cast<int>(rng.next_below(n)) - n / 2};
    ImageSet x;
    for (int s = 0; s < nsets; ++s) x.push_back(random_grid(n, n, rng));
    const MultiCoilKSpace y = random_kspace(nc, n, n, rng);
    const cdouble lhs = inner_product(apply_B(x, maps, mask, window, center), y);
    const cdouble rhs = inner_product(x, apply_B_adjoint(y, maps, mask, window, center));
    worst = std::max(worst, std::abs(lhs - rhs) / (norm2(x) * norm2(y)));
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "worst pairing error " << worst << " over 100 instances, " << secs << " s";
  return {worst < 1e-10 && secs < 10.0, d.str()};
}

CheckResult criterion_bandpass_roundtrip() {
  const auto t0 = Clock::now();
  Rng rng(7);
  const int full = 128, patch = 64, stop = 10;
  const MultiCoilKSpace k = random_kspace(4, full, full, rng);
  const PatchGeometry geo = plan_patches(full, full, patch, patch, 0.5, 0.5, stop);
  const RealGrid window = make_window({patch, patch, stop});
  std::vector<std::pair<PatchCenter, MultiCoilKSpace>> tiles;
  for (const PatchCenter c : geo.centers) {
    MultiCoilKSpace t = extract_patch(k, c, patch, patch);
    for (auto& coil : t.coils) mul_inplace(window, coil);
    tiles.emplace_back(c, std::move(t));
  }
  const MultiCoilKSpace out = recombine(tiles, geo, window);
  double num = 0.0, den = 0.0;
  for (int c = 0; c < k.nc(); ++c)
    for (size_t i = 0; i < k.coils[c].size(); ++i) {
      num += std::norm(out.coils[c].data[i] - k.coils[c].data[i]);
      den += std::norm(k.coils[c].data[i]);
    }
  const double err = std::sqrt(num / den);
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "relative error " << err << ", " << secs << " s";
  return {err < 1e-12 && secs < 5.0, d.str()};
}

CheckResult criterion_data_consistency() {
  Rng rng(11);
  int violations = 0;
  int cases = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 40 + 8 * static_cast<int>(rng.next_below(3));
    const int nc = 1 + static_cast<int>(rng.next_below(4));
    const CoilSpec cs{nc, 0.7, 1, 400 + trial};
    PhantomSpec ps;
    ps.ny = ps.nz = n;
    ps.seed = 300 + trial;
    const SensitivityMaps maps = make_coils(cs, n, n);
    const MultiCoilKSpace full = synthesize_kspace(make_phantom(ps), maps);
    const RealGrid mask = generate_mask(
        {n, n, 2.5 + rng.next_double() * 2.5, MaskDensity::Variable, 2.0, 12, 500ULL + trial});
    MultiCoilKSpace measured = full;
    for (auto& coil : measured.coils) mul_inplace(mask, coil);
    const UnrolledNetParams params = UnrolledNetParams::initial(2, 1, 8, 600 + trial);
    ReconOptions opt;
    opt.patch_ny = opt.patch_nz = 24;
    opt.stopband = 6;
    opt.pad = 6;
    opt.workers = 2;
    const auto maps_for = [&](int ny, int nz) { return make_coils(cs, ny, nz); };
    const ReconResult res = reconstruct_full(measured, maps_for, mask, opt, params);
    ++cases;
    for (int c = 0; c < res.kspace.nc(); ++c)
      for (size_t i = 0; i < mask.size(); ++i)
        if (mask.data[i] == 1.0 &&
            std::memcmp(&res.kspace.coils[c].data[i], &measured.coils[c].data[i],
                        sizeof(cdouble)) != 0)
          ++violations;
  }
  std::ostringstream d;
  d << cases << " reconstructions, " << violations << " bit-level violations at sampled bins";
  return {violations == 0 && cases >= 20, d.str()};
}

CheckResult criterion_gradients() {
  const auto t0 = Clock::now();
  Rng rng(5);
  const int n = 16, nc = 2;
  std::vector<PatchExample> batch;
  for (int b = 0; b < 2; ++b) {
    PatchExample ex;
    ex.maps = random_maps(1, nc, n, n, rng);
    RealGrid mask(n, n);
    for (auto& v : mask.data) v = rng.next_double() < 0.45 ? 1.0 : 0.0;
    ex.mask = mask;
    ex.center = PatchCenter{static_cast<int>(rng.next_below(7)) - 3,
                            static_cast<int>(rng.next_below(7)) - 3};
    ex.u = random_kspace(nc, n, n, rng);
    for (auto& coil : ex.u.coils) mul_inplace(ex.mask, coil);
    ex.truth_w = random_kspace(nc, n, n, rng);
    batch.push_back(std::move(ex));
  }
  const RealGrid window = make_window({n, n, 4});
  UnrolledNetParams params = UnrolledNetParams::initial(2, 1, 8, 7);
  NetGrads grads = NetGrads::zeros_like(params);
  forward_backward_batch(batch, window, params, grads, false);

  const double h = 1e-5;
  auto probe = [&](double* value) {
    const double orig = *value;
    *value = orig + h;
    const double fp = forward_loss_batch(batch, window, params, NormMode::Train);
    *value = orig - h;
    const double fm = forward_loss_batch(batch, window, params, NormMode::Train);
    *value = orig;
    return (fp - fm) / (2.0 * h);
  };
  double worst = 0.0;
  std::string worst_name = "-";
  int groups = 0;
  auto check_group = [&](const std::string& name, double* values, const double* analytic,
                         size_t count) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < count; ++i) {
      const double fd = probe(values + i);
      num += (fd - analytic[i]) * (fd - analytic[i]);
      den += fd * fd;
    }
    // normalization-followed conv biases have structurally zero gradients;
    // the floor keeps noise/noise ratios out of the comparison
    const double rel = std::sqrt(num) / std::max(1e-5, std::sqrt(den));
    ++groups;
    if (rel > worst) {
      worst = rel;
      worst_name = name;
    }
  };
  for (size_t m = 0; m < params.iterations.size(); ++m) {
    const std::string tag = "iter" + std::to_string(m) + ".";
    check_group(tag + "t", &params.iterations[m].step_size, &grads.step_size[m], 1);
    auto& den = params.iterations[m].denoiser;
    for (size_t l = 0; l < den.convs.size(); ++l) {
      check_group(tag + "conv" + std::to_string(l) + ".w", den.convs[l].w.data(),
                  grads.denoisers[m].conv_w[l].data(), den.convs[l].w.size());
      check_group(tag + "conv" + std::to_string(l) + ".b", den.convs[l].b.data(),
                  grads.denoisers[m].conv_b[l].data(), den.convs[l].b.size());
    }
    for (size_t l = 0; l < den.norms.size(); ++l) {
      check_group(tag + "norm" + std::to_string(l) + ".gamma", den.norms[l].gamma.data(),
                  grads.denoisers[m].gamma[l].data(), den.norms[l].gamma.size());
      check_group(tag + "norm" + std::to_string(l) + ".beta", den.norms[l].beta.data(),
                  grads.denoisers[m].beta[l].data(), den.norms[l].beta.size());
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << groups << " parameter groups, worst relative error " << worst << " (" << worst_name
    << "), " << secs << " s";
  return {worst < 1e-3 && secs < 120.0, d.str()};
}

CheckResult criterion_training_efficacy() {
  const auto t0 = Clock::now();
  g_models.four_iter = train_depth(4);
  const HeldOutScore s = eval_held_out(*g_models.four_iter);
  g_models.four_iter_nrmse = s.net_nrmse;
  g_models.zf_nrmse = s.zf_nrmse;
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << "held-out NRMSE " << s.net_nrmse << " vs zero-filled " << s.zf_nrmse << " (ratio "
    << s.net_nrmse / s.zf_nrmse << ", need <= 0.7); SSIM " << s.net_ssim << " vs " << s.zf_ssim
    << "; outputs bounded: " << (s.bounded ? "yes" : "no") << "; " << secs << " s";
  return {s.net_nrmse <= 0.7 * s.zf_nrmse && s.net_ssim > s.zf_ssim && s.bounded &&
              secs <= 1800.0,
          d.str()};
}

CheckResult criterion_iteration_trend() {
  if (!g_models.four_iter) {
    g_models.four_iter = train_depth(4);
    g_models.four_iter_nrmse = eval_held_out(*g_models.four_iter).net_nrmse;
  }
  g_models.two_iter = train_depth(2);
  g_models.two_iter_nrmse = eval_held_out(*g_models.two_iter).net_nrmse;
  std::ostringstream d;
  d << "held-out NRMSE: 4-iteration " << g_models.four_iter_nrmse << " vs 2-iteration "
    << g_models.two_iter_nrmse;
  return {g_models.four_iter_nrmse <= g_models.two_iter_nrmse, d.str()};
}

CheckResult criterion_overlap_sweep() {
  // 64x64 patches with stopband 10 on 192^2 phantoms (212^2 padded): the
  // covering threshold sits at 10/64 = 15.625% overlap
  const UnrolledNetParams params =
      g_models.four_iter ? *g_models.four_iter : UnrolledNetParams::identity(4, 1, 16);
  const std::vector<double> below{0.08, 0.10, 0.125};
  const std::vector<double> plateau{0.20, 0.30, 0.40, 0.50, 0.60};
  int coverage_errors = 0;
  for (const double ov : below) {
    try {
      plan_patches(212, 212, 64, 64, ov, 0.5, 10);
    } catch (const CoverageError&) {
      ++coverage_errors;
    }
  }
  std::vector<double> plateau_nrmse;
  for (const double ov : plateau) {
    ReconOptions opt;
    opt.patch_ny = opt.patch_nz = 64;
    opt.overlap_y = ov;
    opt.overlap_z = 0.5;
    opt.stopband = 10;
    opt.pad = 10;
    opt.workers = 4;
    double acc = 0.0;
    const int count = 6;
    for (int i = 0; i < count; ++i) {
      const EvalCase c = make_eval_case(192, 192, 4, 4.0, 700 + i);
      auto maps_for = [&](int ny, int nz) { return make_coils(c.coils, ny, nz); };
      const ReconResult res = reconstruct_full(c.measured, maps_for, c.mask, opt, params);
      acc += nrmse(magnitude(res.image), c.truth_mag);
    }
    plateau_nrmse.push_back(acc / count);
  }
  double lo = plateau_nrmse[0], hi = plateau_nrmse[0], mean = 0.0;
  for (double v : plateau_nrmse) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= plateau_nrmse.size();
  const double variation = (hi - lo) / mean;
  std::ostringstream d;
  d << coverage_errors << "/3 sub-threshold overlaps raise coverage errors; plateau NRMSE ";
  for (double v : plateau_nrmse) d << v << ' ';
  d << "(variation " << variation * 100.0 << "%, need <= 2%)";
  return {coverage_errors == 3 && variation <= 0.02, d.str()};
}

CheckResult criterion_mask_generator() {
  // achieved R within +-10% across R = 2..9 for both densities at 256^2
  double worst_rel = 0.0;
  for (int R = 2; R <= 9; ++R) {
    for (const MaskDensity density : {MaskDensity::Uniform, MaskDensity::Variable}) {
      const RealGrid m = generate_mask(
          {256, 256, static_cast<double>(R), density, 2.0, 20, 9000ULL + R});
      worst_rel = std::max(worst_rel, std::abs(achieved_R(m) / R - 1.0));
      // 20x20 calibration fully sampled
      for (int y = 118; y < 138; ++y)
        for (int z = 118; z < 138; ++z)
          if (m.at(y, z) != 1.0) return {false, "calibration bin unsampled"};
    }
  }
  // exhaustive min-distance scan on 64^2 masks
  int pair_violations = 0;
  for (int R = 2; R <= 6; ++R) {
    MaskSpec spec{64, 64, static_cast<double>(R), MaskDensity::Variable, 2.0, 20, 400ULL + R};
    double r0 = 0.0;
    const RealGrid m = generate_mask(spec, &r0);
    std::vector<std::pair<int, int>> pts;
    for (int y = 0; y < 64; ++y)
      for (int z = 0; z < 64; ++z)
        if (m.at(y, z) == 1.0 && !(y >= 22 && y < 42 && z >= 22 && z < 42))
          pts.emplace_back(y, z);
    const double kmax = std::sqrt(2.0) * 32.0;
    auto radius = [&](int y, int z) {
      return r0 * (1.0 + 2.0 * std::hypot(y - 32.0, z - 32.0) / kmax);
    };
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        const double dist = std::hypot(double(pts[i].first - pts[j].first),
                                       double(pts[i].second - pts[j].second));
        const double rmin =
            std::min(radius(pts[i].first, pts[i].second), radius(pts[j].first, pts[j].second));
        if (dist < rmin - 0.5) ++pair_violations;
      }
  }
  std::ostringstream d;
  d << "worst |achieved/target - 1| = " << worst_rel << " over R in 2..9 x {uniform,variable}; "
    << pair_violations << " pairwise distance violations on 64^2 masks";
  return {worst_rel <= 0.10 && pair_violations == 0, d.str()};
}

CheckResult criterion_scaling_benchmark() {
  const std::vector<int> dims{32, 48, 64, 128, 256};
  const auto records = bench_patch_time(dims, 4, 8, 1, 50, 0);
  bool monotone = true;
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].mean_ms <= records[i - 1].mean_ms) monotone = false;
  const double ratio = records[4].mean_ms / records[2].mean_ms;

  // parallel (4 workers) bit-equals serial on a full reconstruction
  const EvalCase c = make_eval_case(96, 96, 3, 4.0, 31);
  auto maps_for = [&](int ny, int nz) { return make_coils(c.coils, ny, nz); };
  const UnrolledNetParams params = UnrolledNetParams::initial(4, 1, 8, 3);
  ReconOptions opt;
  opt.patch_ny = opt.patch_nz = 32;
  opt.stopband = 10;
  opt.pad = 10;
  opt.workers = 1;
  const ReconResult serial = reconstruct_full(c.measured, maps_for, c.mask, opt, params);
  opt.workers = 4;
  const ReconResult parallel = reconstruct_full(c.measured, maps_for, c.mask, opt, params);
  bool bit_equal = true;
  for (int ch = 0; ch < serial.kspace.nc(); ++ch)
    if (std::memcmp(serial.kspace.coils[ch].data.data(), parallel.kspace.coils[ch].data.data(),
                    serial.kspace.coils[ch].size() * sizeof(cdouble)) != 0)
      bit_equal = false;

  std::ostringstream d;
  d << "mean ms:";
  for (const auto& r : records) d << ' ' << r.patch_dim << "->" << r.mean_ms;
  d << "; 256^2 / 64^2 = " << ratio << " (need >= 5); parallel bit-equal: "
    << (bit_equal ? "yes" : "no");
  return {monotone && ratio >= 5.0 && bit_equal, d.str()};
}

CheckResult criterion_metrics() {
  Rng rng(13);
  RealGrid ref(32, 32);
  for (auto& v : ref.data) v = rng.uniform(0.1, 1.0);
  const double s_id = ssim(ref, ref);

  double worst = std::abs(s_id - 1.0);
  for (const double alpha : {0.25, 0.8, 1.9}) {
    RealGrid scaled = ref;
    for (auto& v : scaled.data) v *= alpha;
    worst = std::max(worst, std::abs(nrmse(scaled, ref) - std::abs(alpha - 1.0)));
  }
  RealGrid noise(32, 32);
  for (auto& v : noise.data) v = rng.next_normal();
  RealGrid t1 = ref, t2 = ref;
  for (size_t i = 0; i < ref.size(); ++i) {
    t1.data[i] += noise.data[i];
    t2.data[i] += noise.data[i] / std::sqrt(2.0);
  }
  worst = std::max(worst, std::abs((psnr(t2, ref) - psnr(t1, ref)) - 10.0 * std::log10(2.0)));
  std::ostringstream d;
  d << "worst metric identity error " << worst << " (need < 1e-9)";
  return {worst < 1e-9, d.str()};
}

struct Criterion {
  int id;
  const char* name;
  std::function<CheckResult()> run;
};

} // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
    if (std::strcmp(argv[i], "--model-cache") == 0 && i + 1 < argc) g_model_cache = argv[i + 1];
  }

  const std::vector<Criterion> criteria = {
      {1, "operator adjointness", criterion_adjointness},
      {2, "bandpass round trip", criterion_bandpass_roundtrip},
      {3, "data consistency", criterion_data_consistency},
      {4, "gradient correctness", criterion_gradients},
      {5, "toy training efficacy", criterion_training_efficacy},
      {6, "iteration-depth trend", criterion_iteration_trend},
      {7, "overlap sweep", criterion_overlap_sweep},
      {8, "mask generator", criterion_mask_generator},
      {9, "scaling benchmark", criterion_scaling_benchmark},
      {10, "metrics unit suite", criterion_metrics},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = seconds_since(t0);
    std::printf("%s  [%2d] %-24s (%.1f s) - %s\n", r.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failures;
  }
  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures;
}
