#ifndef BPR_TRAINING_HPP
#define BPR_TRAINING_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "bpr/network.hpp"
#include "bpr/simulate.hpp"

namespace bpr {

struct TrainConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch = 4;
  int steps = 800;
  int patch_ny = 32, patch_nz = 32;
  int stopband = 10;
  int n_iter = 4;
  int feature_width = 16;
  int nsets = 1;
  uint64_t seed = 0;

  void validate() const {
    if (lr <= 0.0) throw InvalidInput("TrainConfig: lr must be > 0");
    if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0)
      throw InvalidInput("TrainConfig: betas must be in (0, 1)");
    if (batch < 1 || steps < 0) throw InvalidInput("TrainConfig: bad batch/steps");
  }
};

struct NormalizationRecord {
  double scale = 1.0; // multiplier that was applied to the example
};

/// Scale an example so the energy of its center 5x5 k-space block (summed over
/// coils) equals 1e10: divide by the square root of that energy, multiply by
/// 1e5. Idempotent; rejects examples with zero center energy.
std::pair<MultiCoilKSpace, NormalizationRecord> normalize_example(const MultiCoilKSpace& ksp);

/// Mean over elements of |re(pred-truth)| + |im(pred-truth)|, complex data
/// treated as two real channels.
double l1_loss(const ComplexGrid& pred, const ComplexGrid& truth);
double l1_loss(const ImageSet& pred, const ImageSet& truth);
double l1_loss(const MultiCoilKSpace& pred, const MultiCoilKSpace& truth);

/// Gradients for every trainable leaf, mirroring UnrolledNetParams.
struct NetGrads {
  std::vector<double> step_size;
  std::vector<DenoiserGrads> denoisers;

  static NetGrads zeros_like(const UnrolledNetParams& p);
  void scale(double s);
  bool finite() const;
};

/// One training item: a measured (masked, normalized) patch, its windowed
/// fully sampled target at the same scale, the patch mask/center, and the
/// patch-sized sensitivity maps.
struct PatchExample {
  MultiCoilKSpace u;
  MultiCoilKSpace truth_w;
  RealGrid mask;
  PatchCenter center;
  SensitivityMaps maps;
};

/// Forward pass of the unrolled pipeline over a batch (Train-mode
/// normalization with joint batch statistics) followed by the exact
/// reverse-mode pass. Accumulates parameter gradients into `grads` and
/// returns the batch-mean l1 loss between projected outputs and targets.
/// The FFT cotangent rule is the unitary inverse transform; gradients pass
/// through the hard projection as zero on replaced bins.
double forward_backward_batch(const std::vector<PatchExample>& batch, const RealGrid& window,
                              UnrolledNetParams& params, NetGrads& grads, bool update_running);

/// Loss of the same batch without gradients. Train mode reproduces the
/// forward path of forward_backward_batch (batch statistics, running averages
/// untouched); Frozen mode is the inference path.
double forward_loss_batch(const std::vector<PatchExample>& batch, const RealGrid& window,
                          const UnrolledNetParams& params, NormMode mode = NormMode::Frozen);

struct AdamState {
  long step = 0;
  NetGrads m, v;

  static AdamState zeros_like(const UnrolledNetParams& p);
};

/// Standard Adam update with bias correction over every trainable leaf.
void adam_step(UnrolledNetParams& params, const NetGrads& grads, AdamState& state,
               const TrainConfig& config);

/// Training dataset entry: a fully sampled k-space example plus the coil
/// configuration used to regenerate its sensitivity maps at any patch size.
struct TrainExample {
  MultiCoilKSpace kspace;
  CoilSpec coils;
};

struct LossRecord {
  int step = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  UnrolledNetParams params;
  std::vector<LossRecord> curve;
};

/// Assemble one batch: sample examples and masks, apply the mask, normalize,
/// crop to the patch dimensions, window the target. Deterministic in rng.
std::vector<PatchExample> prepare_batch(const std::vector<TrainExample>& dataset,
                                        const std::vector<RealGrid>& masks,
                                        const TrainConfig& config, Rng& rng);

/// One optimizer step on a prepared batch; returns the training loss.
double train_step(UnrolledNetParams& params, const std::vector<PatchExample>& batch,
                  const RealGrid& window, AdamState& state, const TrainConfig& config);

/// Full toy training loop: per step sample batch -> mask -> crop -> normalize
/// -> forward -> l1 -> backward -> Adam. Aborts with TrainingError when the
/// loss turns non-finite.
TrainResult train_loop(const std::vector<TrainExample>& dataset,
                       const std::vector<RealGrid>& masks, const TrainConfig& config);

} // namespace bpr

#endif
