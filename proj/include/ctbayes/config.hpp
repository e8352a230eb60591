#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbayes/data.hpp"
#include "ctbayes/model.hpp"
#include "ctbayes/rda.hpp"

namespace ctbayes {

/// Raised for malformed or out-of-range configuration; maps to a usage error.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PerceptualConfig {
  std::vector<int64_t> channels = {16, 32, 32};
  uint64_t seed = 1234;
};

/// Every knob of an experiment. Defaults are the published training protocol:
/// M = 10, beta1 = 10, beta2 = 0.001, Adam at 1e-4, batch 32, MOPED delta 0.1,
/// 8 patches of 64x64 per slice.
struct ExperimentConfig {
  uint64_t seed = 0;
  int64_t mc_samples = 10;
  double beta1 = 10.0;
  double beta2 = 0.001;
  double learning_rate = 1e-4;
  int64_t batch_size = 32;
  double moped_delta = 0.1;
  int64_t epochs = 50;
  int64_t pretrain_epochs = 2;
  std::optional<double> kl_scale;  // unset: 1 / number of training patches
  bool freeze_sigma = false;       // deterministic ablation: sigmas pinned at 0, no KL
  int64_t patience = 10;
  int64_t patch_size = kDefaultPatchSize;
  int64_t patches_per_slice = kDefaultPatchesPerSlice;
  int64_t val_mc_samples = 10;
  int64_t checkpoint_every = 1;

  ModelConfig model;
  rda::DiscriminatorConfig discriminator;
  PerceptualConfig perceptual;
  DatasetConfig data;

  std::string data_dir = "data";
  std::string run_dir = "runs/train";

  void validate() const;

  bool uses_target() const { return beta1 > 0.0 || beta2 > 0.0; }
};

void to_json(nlohmann::json& j, const ExperimentConfig& cfg);
/// Strict: unknown keys and wrong types raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// Named presets layered over the defaults: "paper" (no change) and "smoke"
/// (128x128 slices, 64 training slices per domain, 3 epochs).
void apply_profile(ExperimentConfig& cfg, const std::string& profile);

}  // namespace ctbayes
