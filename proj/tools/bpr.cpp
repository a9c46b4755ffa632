// Command-line surface for the patch-parallel k-space reconstruction pipeline:
// synthetic data generation, mask generation, training, reconstruction,
// metrics, benchmarking, and the experiment sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bpr/gridfile.hpp"
#include "bpr/metrics.hpp"
#include "bpr/network.hpp"
#include "bpr/parallel.hpp"
#include "bpr/sampling.hpp"
#include "bpr/training.hpp"

using namespace bpr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInput = 2;
constexpr int kExitCoverage = 3;
constexpr int kExitDivergence = 4;
constexpr int kExitIo = 5;

using KV = std::vector<std::pair<std::string, std::string>>;

void echo_config(const std::string& out_stem, const std::string& command, const KV& entries) {
  std::ofstream f(out_stem + ".config");
  if (!f) throw IoError("cannot write config echo beside " + out_stem);
  f << "command=" << command << '\n';
  for (const auto& [k, v] : entries) f << k << '=' << v << '\n';
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

MaskDensity parse_density(const std::string& name) {
  if (name == "uniform") return MaskDensity::Uniform;
  if (name == "variable") return MaskDensity::Variable;
  throw InvalidInput("unknown density '" + name + "' (use uniform|variable)");
}

struct EvalCase {
  MultiCoilKSpace measured;
  RealGrid mask;
  RealGrid truth_mag;
  RealGrid zf_mag;
  CoilSpec coils;
};

EvalCase make_eval_case(int ny, int nz, int nc, double R, MaskDensity density, int calib,
                        uint64_t seed) {
  PhantomSpec ps;
  ps.ny = ny;
  ps.nz = nz;
  ps.seed = seed * 2654435761ULL + 17;
  CoilSpec cs{nc, 0.7, 1, seed * 40503ULL + 5};
  const SensitivityMaps maps = make_coils(cs, ny, nz);
  const MultiCoilKSpace full = synthesize_kspace(make_phantom(ps), maps);
  EvalCase c{full, generate_mask({ny, nz, R, density, 2.0, calib, seed * 7919ULL + 1}),
             RealGrid(), RealGrid(), cs};
  for (auto& coil : c.measured.coils) mul_inplace(c.mask, coil);
  c.truth_mag = magnitude(apply_model_adjoint(full, maps)[0]);
  c.zf_mag = magnitude(apply_model_adjoint(c.measured, maps)[0]);
  return c;
}

UnrolledNetParams load_params(const std::string& checkpoint, int iters, int features) {
  if (checkpoint == "identity") return UnrolledNetParams::identity(iters, 1, features);
  return load_checkpoint(checkpoint);
}

MapsProvider maps_provider_from(const std::string& maps_path, const std::string& maps_patch_path,
                                const std::map<std::string, std::string>& meta) {
  if (!maps_path.empty()) {
    auto full = std::make_shared<SensitivityMaps>(read_maps(maps_path));
    std::shared_ptr<SensitivityMaps> patch;
    if (!maps_patch_path.empty())
      patch = std::make_shared<SensitivityMaps>(read_maps(maps_patch_path));
    return [full, patch](int ny, int nz) {
      if (full->ny() == ny && full->nz() == nz) return *full;
      if (patch && patch->ny() == ny && patch->nz() == nz) return *patch;
      throw InvalidInput("no imported sensitivity maps at " + std::to_string(ny) + "x" +
                         std::to_string(nz) + "; pass --maps-patch sized for the patch");
    };
  }
  // fall back on the coil recipe recorded when the data was synthesized
  const auto it_seed = meta.find("coil_seed");
  const auto it_nc = meta.find("coil_nc");
  const auto it_w = meta.find("coil_width");
  if (it_seed == meta.end() || it_nc == meta.end() || it_w == meta.end())
    throw InvalidInput("input carries no coil recipe; pass --maps (and --maps-patch)");
  CoilSpec cs{std::stoi(it_nc->second), std::stod(it_w->second), 1,
              std::stoull(it_seed->second)};
  return [cs](int ny, int nz) { return make_coils(cs, ny, nz); };
}

struct SweepEvalSpec {
  int ny = 96, nz = 96, nc = 4, calib = 20, count = 8;
  double R = 4.0;
  MaskDensity density = MaskDensity::Variable;
  uint64_t seed = 0;
};

// Mean metrics of a parameter set over a synthetic eval set; empty optional
// when the plan fails coverage.
struct SweepPoint {
  bool covered = true;
  double nrmse_v = 0.0, ssim_v = 0.0, psnr_v = 0.0;
};

SweepPoint sweep_eval(const SweepEvalSpec& spec, const ReconOptions& opt,
                      const UnrolledNetParams& params) {
  SweepPoint p;
  double nr = 0, ss = 0, ps = 0;
  for (int i = 0; i < spec.count; ++i) {
    const EvalCase c =
        make_eval_case(spec.ny, spec.nz, spec.nc, spec.R, spec.density, spec.calib,
                       spec.seed + 100 + i);
    auto maps_for = [&](int ny, int nz) { return make_coils(c.coils, ny, nz); };
    try {
      const ReconResult res = reconstruct_full(c.measured, maps_for, c.mask, opt, params);
      const RealGrid mag = magnitude(res.image);
      nr += nrmse(mag, c.truth_mag);
      ss += ssim(mag, c.truth_mag);
      ps += psnr(mag, c.truth_mag);
    } catch (const CoverageError&) {
      p.covered = false;
      return p;
    }
  }
  p.nrmse_v = nr / spec.count;
  p.ssim_v = ss / spec.count;
  p.psnr_v = ps / spec.count;
  return p;
}

int dispatch(CLI::App& app, int argc, char** argv);

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandpass patch reconstruction pipeline"};
  app.require_subcommand(1);
  try {
    return dispatch(app, argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  } catch (const CoverageError& e) {
    std::cerr << "coverage error: " << e.what() << "\n";
    return kExitCoverage;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}

namespace {

int dispatch(CLI::App& app, int argc, char** argv) {
  // ---- phantom ----------------------------------------------------------
  auto* cmd_phantom = app.add_subcommand("phantom", "generate a synthetic ellipse phantom");
  std::string phantom_cfg;
  cmd_phantom->add_option("--config", phantom_cfg, "plain key=value file; flags override");
  PhantomSpec pspec;
  std::string phantom_out;
  cmd_phantom->add_option("--ny", pspec.ny);
  cmd_phantom->add_option("--nz", pspec.nz);
  cmd_phantom->add_option("--ellipses", pspec.n_ellipses);
  cmd_phantom->add_option("--intensity-min", pspec.intensity_min);
  cmd_phantom->add_option("--intensity-max", pspec.intensity_max);
  cmd_phantom->add_option("--phase-scale", pspec.phase_scale);
  cmd_phantom->add_option("--seed", pspec.seed);
  cmd_phantom->add_option("--out", phantom_out)->required();

  // ---- mask -------------------------------------------------------------
  auto* cmd_mask = app.add_subcommand("mask", "generate a poisson-disc sampling mask");
  std::string mask_cfg;
  cmd_mask->add_option("--config", mask_cfg, "plain key=value file; flags override");
  MaskSpec mspec;
  mspec.ny = mspec.nz = 256;
  std::string mask_density = "variable", mask_out;
  cmd_mask->add_option("--ny", mspec.ny);
  cmd_mask->add_option("--nz", mspec.nz);
  cmd_mask->add_option("--R", mspec.target_R);
  cmd_mask->add_option("--density", mask_density)->check(CLI::IsMember({"uniform", "variable"}));
  cmd_mask->add_option("--vd-power", mspec.vd_power);
  cmd_mask->add_option("--calib", mspec.calib);
  cmd_mask->add_option("--seed", mspec.seed);
  cmd_mask->add_option("--out", mask_out)->required();

  // ---- synth ------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand("synth", "synthesize multi-coil k-space from a phantom");
  std::string synth_cfg;
  cmd_synth->add_option("--config", synth_cfg, "plain key=value file; flags override");
  std::string synth_image, synth_out, synth_maps_out;
  CoilSpec coil_spec;
  cmd_synth->add_option("--image", synth_image)->required();
  cmd_synth->add_option("--coils", coil_spec.nc);
  cmd_synth->add_option("--coil-width", coil_spec.width_scale);
  cmd_synth->add_option("--coil-seed", coil_spec.seed);
  cmd_synth->add_option("--out", synth_out)->required();
  cmd_synth->add_option("--maps-out", synth_maps_out);

  // ---- train ------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "train an unrolled network on synthetic data");
  std::string train_cfg;
  cmd_train->add_option("--config", train_cfg, "plain key=value file; flags override");
  TrainConfig tcfg;
  int train_examples = 512, train_masks = 16, train_nc = 4, train_ny = 96, train_nz = 96;
  int train_calib = 20;
  double train_r_min = 3.6, train_r_max = 4.4;
  std::string train_density = "variable", train_ckpt, train_loss_csv;
  cmd_train->add_option("--examples", train_examples);
  cmd_train->add_option("--ny", train_ny);
  cmd_train->add_option("--nz", train_nz);
  cmd_train->add_option("--coils", train_nc);
  cmd_train->add_option("--masks", train_masks);
  cmd_train->add_option("--R-min", train_r_min);
  cmd_train->add_option("--R-max", train_r_max);
  cmd_train->add_option("--density", train_density)
      ->check(CLI::IsMember({"uniform", "variable"}));
  cmd_train->add_option("--calib", train_calib);
  int train_patch = 32;
  cmd_train->add_option("--patch", train_patch);
  cmd_train->add_option("--stopband", tcfg.stopband);
  cmd_train->add_option("--iters", tcfg.n_iter);
  cmd_train->add_option("--features", tcfg.feature_width);
  cmd_train->add_option("--steps", tcfg.steps);
  cmd_train->add_option("--batch", tcfg.batch);
  cmd_train->add_option("--lr", tcfg.lr);
  cmd_train->add_option("--seed", tcfg.seed);
  cmd_train->add_option("--checkpoint", train_ckpt)->required();
  cmd_train->add_option("--loss-csv", train_loss_csv);

  // ---- recon ------------------------------------------------------------
  auto* cmd_recon = app.add_subcommand("recon", "reconstruct subsampled k-space");
  std::string recon_cfg;
  cmd_recon->add_option("--config", recon_cfg, "plain key=value file; flags override");
  std::string recon_input, recon_mask, recon_ckpt = "identity", recon_maps, recon_maps_patch;
  std::string recon_out;
  ReconOptions ropt;
  int recon_iters = 4, recon_features = 16;
  uint64_t recon_seed = 0;
  cmd_recon->add_option("--input", recon_input)->required();
  cmd_recon->add_option("--mask", recon_mask)->required();
  cmd_recon->add_option("--checkpoint", recon_ckpt);
  cmd_recon->add_option("--maps", recon_maps);
  cmd_recon->add_option("--maps-patch", recon_maps_patch);
  cmd_recon->add_option("--patch", ropt.patch_ny);
  cmd_recon->add_option("--overlap-y", ropt.overlap_y);
  cmd_recon->add_option("--overlap-z", ropt.overlap_z);
  cmd_recon->add_option("--stopband", ropt.stopband);
  cmd_recon->add_option("--pad", ropt.pad);
  cmd_recon->add_option("--iters", recon_iters);
  cmd_recon->add_option("--features", recon_features);
  cmd_recon->add_option("--workers", ropt.workers);
  cmd_recon->add_option("--seed", recon_seed);
  cmd_recon->add_option("--out", recon_out)->required();

  // ---- metrics ----------------------------------------------------------
  auto* cmd_metrics = app.add_subcommand("metrics", "image quality metrics (psnr, nrmse, ssim)");
  std::string metrics_cfg;
  cmd_metrics->add_option("--config", metrics_cfg, "plain key=value file; flags override");
  std::string met_test, met_ref, met_out, met_slice = "0";
  cmd_metrics->add_option("--test", met_test)->required();
  cmd_metrics->add_option("--ref", met_ref)->required();
  cmd_metrics->add_option("--slice-id", met_slice);
  cmd_metrics->add_option("--out", met_out);

  // ---- bench ------------------------------------------------------------
  auto* cmd_bench = app.add_subcommand("bench", "single-patch inference timing");
  std::string bench_cfg;
  cmd_bench->add_option("--config", bench_cfg, "plain key=value file; flags override");
  std::vector<int> bench_dims{32, 48, 64, 128, 256};
  int bench_runs = 50, bench_iters = 4, bench_features = 8, bench_nc = 1;
  uint64_t bench_seed = 0;
  std::string bench_out;
  cmd_bench->add_option("--dims", bench_dims)->delimiter(',');
  cmd_bench->add_option("--runs", bench_runs);
  cmd_bench->add_option("--iters", bench_iters);
  cmd_bench->add_option("--features", bench_features);
  cmd_bench->add_option("--coils", bench_nc);
  cmd_bench->add_option("--seed", bench_seed);
  cmd_bench->add_option("--out", bench_out)->required();

  // ---- sweep ------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "experiment sweeps over one axis");
  std::string sweep_cfg;
  cmd_sweep->add_option("--config", sweep_cfg, "plain key=value file; flags override");
  std::string sweep_axis, sweep_out, sweep_ckpt = "identity", sweep_density = "variable";
  std::vector<double> sweep_values;
  SweepEvalSpec sspec;
  ReconOptions sopt;
  int sweep_iters = 4, sweep_features = 16, sweep_train_steps = 0;
  cmd_sweep->add_option("--axis", sweep_axis)
      ->required()
      ->check(CLI::IsMember({"overlap", "iterations", "patch", "R"}));
  cmd_sweep->add_option("--values", sweep_values)->required()->delimiter(',');
  cmd_sweep->add_option("--eval-count", sspec.count);
  cmd_sweep->add_option("--ny", sspec.ny);
  cmd_sweep->add_option("--nz", sspec.nz);
  cmd_sweep->add_option("--coils", sspec.nc);
  cmd_sweep->add_option("--R", sspec.R);
  cmd_sweep->add_option("--density", sweep_density)
      ->check(CLI::IsMember({"uniform", "variable"}));
  cmd_sweep->add_option("--calib", sspec.calib);
  cmd_sweep->add_option("--seed", sspec.seed);
  cmd_sweep->add_option("--checkpoint", sweep_ckpt);
  cmd_sweep->add_option("--iters", sweep_iters);
  cmd_sweep->add_option("--features", sweep_features);
  cmd_sweep->add_option("--train-steps", sweep_train_steps);
  cmd_sweep->add_option("--patch", sopt.patch_ny);
  cmd_sweep->add_option("--overlap-y", sopt.overlap_y);
  cmd_sweep->add_option("--overlap-z", sopt.overlap_z);
  cmd_sweep->add_option("--stopband", sopt.stopband);
  cmd_sweep->add_option("--pad", sopt.pad);
  cmd_sweep->add_option("--workers", sopt.workers);
  cmd_sweep->add_option("--out", sweep_out)->required();

  // plain key=value config support: file entries become trailing options for
  // the active subcommand unless the same flag was passed explicitly
  std::vector<std::string> args(argv + 1, argv + argc);
  for (size_t i = 0; i < args.size(); ++i) {
    std::string cfg_path;
    if (args[i] == "--config" && i + 1 < args.size())
      cfg_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      cfg_path = args[i].substr(9);
    if (cfg_path.empty()) continue;
    std::ifstream cfg(cfg_path);
    if (!cfg) throw IoError("cannot open config file " + cfg_path);
    std::string line;
    while (std::getline(cfg, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw IoError("config line is not key=value: '" + line + "'");
      const std::string flag = "--" + line.substr(0, eq);
      bool given = false;
      for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
      if (!given) args.push_back(flag + "=" + line.substr(eq + 1));
    }
    break;
  }
  std::vector<const char*> cargs;
  cargs.push_back(argv[0]);
  for (const auto& a : args) cargs.push_back(a.c_str());
  app.parse(static_cast<int>(cargs.size()), cargs.data());

  if (app.got_subcommand(cmd_phantom)) {
    const ComplexGrid img = make_phantom(pspec);
    write_image(phantom_out, img, {{"seed", std::to_string(pspec.seed)}});
    echo_config(phantom_out, "phantom",
                {{"ny", fmt(pspec.ny)},
                 {"nz", fmt(pspec.nz)},
                 {"ellipses", fmt(pspec.n_ellipses)},
                 {"intensity_min", fmt(pspec.intensity_min)},
                 {"intensity_max", fmt(pspec.intensity_max)},
                 {"phase_scale", fmt(pspec.phase_scale)},
                 {"seed", std::to_string(pspec.seed)},
                 {"out", phantom_out}});
    std::cout << "phantom " << pspec.ny << "x" << pspec.nz << " -> " << phantom_out << "\n";
    return kExitOk;
  }

  if (app.got_subcommand(cmd_mask)) {
    mspec.density = parse_density(mask_density);
    double r0 = 0.0;
    const RealGrid mask = generate_mask(mspec, &r0);
    const double achieved = achieved_R(mask);
    write_mask(mask_out, mask,
               {{"seed", std::to_string(mspec.seed)},
                {"target_R", fmt(mspec.target_R)},
                {"achieved_R", fmt(achieved)},
                {"density", mask_density},
                {"vd_power", fmt(mspec.vd_power)},
                {"base_radius", fmt(r0)},
                {"note", "variable-density law r0*(1+p*|k|/kmax) is an artifact choice"}});
    echo_config(mask_out, "mask",
                {{"ny", fmt(mspec.ny)},
                 {"nz", fmt(mspec.nz)},
                 {"R", fmt(mspec.target_R)},
                 {"density", mask_density},
                 {"vd_power", fmt(mspec.vd_power)},
                 {"calib", fmt(mspec.calib)},
                 {"seed", std::to_string(mspec.seed)},
                 {"out", mask_out}});
    std::cout << "mask " << mspec.ny << "x" << mspec.nz << " target R " << mspec.target_R
              << " achieved R " << achieved << " -> " << mask_out << "\n";
    return kExitOk;
  }

  if (app.got_subcommand(cmd_synth)) {
    const ComplexGrid img = read_image(synth_image);
    const SensitivityMaps maps = make_coils(coil_spec, img.ny, img.nz);
    const MultiCoilKSpace ksp = synthesize_kspace(img, maps);
    write_kspace(synth_out, ksp,
                 {{"coil_seed", std::to_string(coil_spec.seed)},
                  {"coil_nc", std::to_string(coil_spec.nc)},
                  {"coil_width", fmt(coil_spec.width_scale)},
                  {"source_image", synth_image}});
    if (!synth_maps_out.empty()) write_maps(synth_maps_out, maps);
    echo_config(synth_out, "synth",
                {{"image", synth_image},
                 {"coils", fmt(coil_spec.nc)},
                 {"coil_width", fmt(coil_spec.width_scale)},
                 {"coil_seed", std::to_string(coil_spec.seed)},
                 {"out", synth_out}});
    std::cout << "k-space " << ksp.nc() << "x" << ksp.ny() << "x" << ksp.nz() << " -> "
              << synth_out << "\n";
    return kExitOk;
  }

  if (app.got_subcommand(cmd_train)) {
    tcfg.patch_ny = tcfg.patch_nz = train_patch;
    std::vector<TrainExample> dataset;
    for (int i = 0; i < train_examples; ++i) {
      PhantomSpec ps;
      ps.ny = train_ny;
      ps.nz = train_nz;
      ps.seed = tcfg.seed * 1000003ULL + i;
      CoilSpec cs{train_nc, 0.7, 1, tcfg.seed * 911ULL + 31 * i};
      dataset.push_back(
          {synthesize_kspace(make_phantom(ps), make_coils(cs, train_ny, train_nz)), cs});
    }
    std::vector<RealGrid> masks;
    const MaskDensity density = parse_density(train_density);
    for (int i = 0; i < train_masks; ++i) {
      const double R = train_r_min + (train_r_max - train_r_min) *
                                         (train_masks > 1 ? double(i) / (train_masks - 1) : 0.5);
      masks.push_back(generate_mask(
          {train_ny, train_nz, R, density, 2.0, train_calib, tcfg.seed * 6151ULL + i}));
    }
    const TrainResult result = train_loop(dataset, masks, tcfg);
    save_checkpoint(train_ckpt, result.params);
    if (!train_loss_csv.empty()) {
      std::vector<std::vector<std::string>> rows;
      for (const auto& r : result.curve)
        rows.push_back({std::to_string(r.step), fmt(r.loss), fmt(r.wall_ms)});
      write_csv(train_loss_csv, {"step", "loss", "wall_ms"}, rows);
    }
    echo_config(train_ckpt, "train",
                {{"examples", fmt(train_examples)},
                 {"ny", fmt(train_ny)},
                 {"nz", fmt(train_nz)},
                 {"coils", fmt(train_nc)},
                 {"masks", fmt(train_masks)},
                 {"R_min", fmt(train_r_min)},
                 {"R_max", fmt(train_r_max)},
                 {"density", train_density},
                 {"calib", fmt(train_calib)},
                 {"patch", fmt(train_patch)},
                 {"stopband", fmt(tcfg.stopband)},
                 {"iters", fmt(tcfg.n_iter)},
                 {"features", fmt(tcfg.feature_width)},
                 {"steps", fmt(tcfg.steps)},
                 {"batch", fmt(tcfg.batch)},
                 {"lr", fmt(tcfg.lr)},
                 {"seed", std::to_string(tcfg.seed)},
                 {"checkpoint", train_ckpt}});
    std::cout << "trained " << tcfg.n_iter << "-iteration network, final loss "
              << (result.curve.empty() ? 0.0 : result.curve.back().loss) << " -> " << train_ckpt
              << "\n";
    return kExitOk;
  }

  if (app.got_subcommand(cmd_recon)) {
    ropt.patch_nz = ropt.patch_ny;
    MultiCoilKSpace ksp = read_kspace(recon_input);
    const RealGrid mask = read_mask(recon_mask);
    // the mask defines the measured bins; zero the rest of the input
    for (auto& coil : ksp.coils) mul_inplace(mask, coil);
    const UnrolledNetParams params = load_params(recon_ckpt, recon_iters, recon_features);
    const MapsProvider maps_for =
        maps_provider_from(recon_maps, recon_maps_patch, read_meta(recon_input));
    const ReconResult res = reconstruct_full(ksp, maps_for, mask, ropt, params);
    write_kspace(recon_out + ".kspace.bpg", res.kspace, {{"source", recon_input}});
    write_image(recon_out + ".image.bpg", res.image, {{"source", recon_input}});
    echo_config(recon_out, "recon",
                {{"input", recon_input},
                 {"mask", recon_mask},
                 {"checkpoint", recon_ckpt},
                 {"patch", fmt(ropt.patch_ny)},
                 {"overlap_y", fmt(ropt.overlap_y)},
                 {"overlap_z", fmt(ropt.overlap_z)},
                 {"stopband", fmt(ropt.stopband)},
                 {"pad", fmt(ropt.pad)},
                 {"iters", fmt(recon_iters)},
                 {"features", fmt(recon_features)},
                 {"workers", fmt(ropt.workers)},
                 {"seed", std::to_string(recon_seed)},
                 {"out", recon_out}});
    std::cout << "reconstructed " << ksp.ny() << "x" << ksp.nz() << " -> " << recon_out
              << ".{kspace,image}.bpg\n";
    return kExitOk;
  }

  if (app.got_subcommand(cmd_metrics)) {
    const RealGrid test = magnitude(read_image(met_test));
    const RealGrid ref = magnitude(read_image(met_ref));
    const MetricReport r = compute_metrics(test, ref);
    std::cout << "psnr " << r.psnr << " dB, nrmse " << r.nrmse << ", ssim " << r.ssim << "\n";
    if (!met_out.empty()) {
      write_csv(met_out, {"slice_id", "psnr", "nrmse", "ssim"},
                {{met_slice, fmt(r.psnr), fmt(r.nrmse), fmt(r.ssim)}});
      echo_config(met_out, "metrics",
                  {{"test", met_test}, {"ref", met_ref}, {"slice_id", met_slice}});
    }
    return kExitOk;
  }

  if (app.got_subcommand(cmd_bench)) {
    const auto records =
        bench_patch_time(bench_dims, bench_iters, bench_features, bench_nc, bench_runs,
                         bench_seed);
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
      rows.push_back({std::to_string(r.patch_dim), fmt(r.mean_ms), fmt(r.std_ms),
                      std::to_string(r.runs), "1"});
      std::cout << "patch " << r.patch_dim << ": " << r.mean_ms << " +- " << r.std_ms
                << " ms over " << r.runs << " runs\n";
    }
    write_csv(bench_out, {"patch_dim", "mean_ms", "std_ms", "runs", "workers"}, rows);
    echo_config(bench_out, "bench",
                {{"runs", fmt(bench_runs)},
                 {"iters", fmt(bench_iters)},
                 {"features", fmt(bench_features)},
                 {"coils", fmt(bench_nc)},
                 {"seed", std::to_string(bench_seed)}});
    return kExitOk;
  }

  if (app.got_subcommand(cmd_sweep)) {
    sspec.density = parse_density(sweep_density);
    sopt.patch_nz = sopt.patch_ny;
    std::vector<std::vector<std::string>> rows;
    for (const double v : sweep_values) {
      ReconOptions opt = sopt;
      UnrolledNetParams params = load_params(sweep_ckpt, sweep_iters, sweep_features);
      SweepEvalSpec espec = sspec;
      if (sweep_axis == "overlap") {
        opt.overlap_y = v;
      } else if (sweep_axis == "patch") {
        opt.patch_ny = opt.patch_nz = static_cast<int>(v);
      } else if (sweep_axis == "R") {
        espec.R = v;
      } else { // iterations: train a fresh network per depth
        TrainConfig cfg;
        cfg.n_iter = static_cast<int>(v);
        cfg.feature_width = sweep_features;
        cfg.steps = sweep_train_steps;
        cfg.seed = sspec.seed;
        std::vector<TrainExample> dataset;
        for (int i = 0; i < 64; ++i) {
          PhantomSpec ps;
          ps.ny = sspec.ny;
          ps.nz = sspec.nz;
          ps.seed = sspec.seed * 1000003ULL + i;
          CoilSpec cs{sspec.nc, 0.7, 1, sspec.seed * 911ULL + 31 * i};
          dataset.push_back(
              {synthesize_kspace(make_phantom(ps), make_coils(cs, sspec.ny, sspec.nz)), cs});
        }
        std::vector<RealGrid> masks;
        for (int i = 0; i < 8; ++i)
          masks.push_back(generate_mask({sspec.ny, sspec.nz, sspec.R, sspec.density, 2.0,
                                         sspec.calib, sspec.seed * 6151ULL + i}));
        params = train_loop(dataset, masks, cfg).params;
      }
      const SweepPoint p = sweep_eval(espec, opt, params);
      rows.push_back({fmt(v), p.covered ? "ok" : "coverage_error",
                      p.covered ? fmt(p.nrmse_v) : "", p.covered ? fmt(p.ssim_v) : "",
                      p.covered ? fmt(p.psnr_v) : ""});
      std::cout << sweep_axis << " " << v << ": "
                << (p.covered ? "nrmse " + fmt(p.nrmse_v) + " ssim " + fmt(p.ssim_v)
                              : "coverage_error")
                << "\n";
    }
    write_csv(sweep_out, {sweep_axis, "status", "nrmse", "ssim", "psnr"}, rows);
    echo_config(sweep_out, "sweep",
                {{"axis", sweep_axis},
                 {"checkpoint", sweep_ckpt},
                 {"eval_count", fmt(sspec.count)},
                 {"R", fmt(sspec.R)},
                 {"density", sweep_density},
                 {"seed", std::to_string(sspec.seed)},
                 {"workers", fmt(sopt.workers)}});
    return kExitOk;
  }

  return kExitError;
}

} // namespace
