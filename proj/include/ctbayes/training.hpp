#pragma once

// Objective assembly, alternating adversarial optimization, checkpoints and
// the epoch loop.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <torch/torch.h>

#include "ctbayes/config.hpp"
#include "ctbayes/data.hpp"
#include "ctbayes/metrics.hpp"
#include "ctbayes/model.hpp"
#include "ctbayes/rda.hpp"

namespace ctbayes {

/// Counter-based random stream: same (seed, tags) always yields the same draws.
at::Generator make_stream(uint64_t seed, std::initializer_list<uint64_t> tags);

torch::Tensor images_to_tensor(const std::vector<Image>& images, torch::Dtype dtype = torch::kFloat32);
Image tensor_to_image(const torch::Tensor& t);

/// Feature-space distance through a frozen, seeded, randomly initialized
/// 3x3 conv stack (ReLU after each layer). Holds no trainable parameters.
class PerceptualLossImpl : public torch::nn::Module {
 public:
  explicit PerceptualLossImpl(const PerceptualConfig& cfg);

  torch::Tensor features(const torch::Tensor& x) const;
  /// Mean squared feature difference per image, shape [B].
  torch::Tensor per_image(const torch::Tensor& y, const torch::Tensor& y_hat) const;

 private:
  std::vector<torch::Tensor> weights_;
  std::vector<torch::Tensor> biases_;
};
TORCH_MODULE(PerceptualLoss);

/// Per-image MAE and perceptual terms, each shape [B].
struct ReconstructionTerms {
  torch::Tensor l1;
  torch::Tensor pl;
};

ReconstructionTerms reconstruction_terms(const torch::Tensor& y, const torch::Tensor& y_hat,
                                         const PerceptualLoss& pl);

/// Sum over the batch of MAE + PL.
torch::Tensor reconstruction_loss(const torch::Tensor& y, const torch::Tensor& y_hat, const PerceptualLoss& pl);

struct DomainBatch {
  torch::Tensor source_ldct;  // [B,1,H,W]
  torch::Tensor source_ndct;
  torch::Tensor target_ldct;  // undefined when the configuration ignores the target domain
};

inline constexpr std::array<const char*, 6> kLossComponentNames = {"l1", "pl", "kl_enc", "kl_dec", "bnua", "rda"};

/// Raw (unweighted) objective terms plus their weights. Components that the
/// configuration switches off are zero.
struct LossTerms {
  std::array<torch::Tensor, 6> raw;
  std::array<double, 6> weight{};
  torch::Tensor total;

  torch::Tensor weighted(size_t i) const { return raw[i] * weight[i]; }
};

struct LossRecord {
  std::array<double, 6> raw{};
  std::array<double, 6> weighted{};
  double total = 0.0;
  double discriminator = 0.0;
};

class NonFiniteLossError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ForwardPass {
  McForward source;
  std::optional<McForward> target;
};

/// Everything mutable during training, owned by one thread.
class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg, int64_t n_train_patches, torch::Dtype dtype = torch::kFloat32);

  ForwardPass forward(const DomainBatch& batch, at::Generator& gen);
  LossTerms assemble(const DomainBatch& batch, const ForwardPass& fwd);
  LossTerms total_loss(const DomainBatch& batch, at::Generator& gen) { return assemble(batch, forward(batch, gen)); }

  /// Discriminator update with the reconstruction frozen, then one
  /// reconstruction update with the discriminator frozen.
  LossRecord train_step(const DomainBatch& batch, at::Generator& gen);

  /// Deterministic source-only step (L1 + PL) used before MOPED.
  double pretrain_step(const DomainBatch& batch);

  /// MOPED init of the Bayesian layers from the pretrained means, fresh
  /// optimizers, and sigma freezing per config.
  void begin_bayesian_phase();

  ReconstructionNet& net() { return net_; }
  rda::Discriminator& discriminator() { return disc_; }
  const PerceptualLoss& perceptual() const { return perceptual_; }
  const ExperimentConfig& config() const { return cfg_; }
  double kl_scale() const { return kl_scale_; }
  torch::Dtype dtype() const { return dtype_; }

  struct Progress {
    int64_t epoch = 0;  // completed training epochs
    double best_val_loss = std::numeric_limits<double>::infinity();
    int64_t best_epoch = 0;
    int64_t epochs_since_best = 0;
  };
  Progress& progress() { return progress_; }

  void save_checkpoint(const std::filesystem::path& path) const;
  /// Restores parameters, optimizer moments and progress. The stored config
  /// must describe the same architecture.
  void load_checkpoint(const std::filesystem::path& path);

 private:
  void build_optimizers();

  ExperimentConfig cfg_;
  torch::Dtype dtype_;
  double kl_scale_;
  ReconstructionNet net_{nullptr};
  rda::Discriminator disc_{nullptr};
  PerceptualLoss perceptual_{nullptr};
  std::unique_ptr<torch::optim::Adam> recon_opt_;
  std::unique_ptr<torch::optim::Adam> disc_opt_;
  Progress progress_;
};

inline constexpr int kCheckpointSchemaVersion = 1;

/// Config snapshot stored in a checkpoint.
ExperimentConfig read_checkpoint_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Evaluation helpers

struct SplitEvaluation {
  metrics::MetricReport report;
  std::vector<float> flat_residuals;  // ldct - reconstruction on flat NDCT regions
  std::vector<float> flat_noise;      // ldct - ndct on the same pixels
  double mean_val_loss = 0.0;         // mean per-slice MAE + PL
  torch::Tensor covariances;          // [N, C, C] MC covariances, one per slice
};

/// Reconstructs every slice with mc_forward and scores it against its NDCT.
SplitEvaluation evaluate_slices(ReconstructionNet& net, const PerceptualLoss& pl, const std::vector<SlicePair>& slices,
                                int64_t mc_samples, uint64_t seed, bool with_metrics = true);

/// MC covariances for LDCT-only slices, [N, C, C].
torch::Tensor slice_covariances(ReconstructionNet& net, const std::vector<Image>& ldct, int64_t mc_samples,
                                uint64_t seed);

// ---------------------------------------------------------------------------
// Epoch loop

inline constexpr const char* kEpochLogHeader =
    "epoch,l1,pl,kl_enc,kl_dec,bnua,rda,val_psnr,val_ssim,val_gmsd,val_dss,val_bnua_disc";

struct EpochLogRow {
  int64_t epoch = 0;
  std::array<double, 6> losses{};
  double val_psnr = 0, val_ssim = 0, val_gmsd = 0, val_dss = 0, val_bnua_disc = 0;
};

std::string format_log_row(const EpochLogRow& row);
/// Parses an epoch log, rejecting malformed rows with their line number.
std::vector<EpochLogRow> read_epoch_log(const std::filesystem::path& path);

struct FitOptions {
  std::optional<std::filesystem::path> resume_from;
  /// Stop after this many training epochs in this call (for interruption tests).
  std::optional<int64_t> max_epochs_this_call;
  bool verbose = false;
};

struct FitResult {
  std::filesystem::path run_dir;
  std::filesystem::path last_checkpoint;
  std::filesystem::path best_checkpoint;
  std::vector<EpochLogRow> log;
  int64_t best_epoch = 0;
};

/// MOPED pretraining then Bayesian training; per-epoch log, residual
/// histograms, periodic checkpoints, model selection on source validation loss.
FitResult fit(const ExperimentConfig& cfg, const FitOptions& options = {});

/// Network restored from a checkpoint, ready for inference.
struct LoadedModel {
  ExperimentConfig config;
  ReconstructionNet net{nullptr};
  PerceptualLoss perceptual{nullptr};
};
LoadedModel load_model(const std::filesystem::path& checkpoint);

}  // namespace ctbayes
