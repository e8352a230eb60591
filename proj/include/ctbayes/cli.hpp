#pragma once

// Command implementations behind the `ctbayes` binary. Each command is also
// callable as a library function so tests can drive it in-process.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctbayes/config.hpp"
#include "ctbayes/training.hpp"

namespace ctbayes::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv, dispatches, and maps failures onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// `<root>/<prefix>-YYYYmmdd-HHMMSS`, suffixed when the name is taken. Not created.
std::filesystem::path timestamped_dir(const std::filesystem::path& root, const std::string& prefix);

Manifest gen_data(const ExperimentConfig& cfg, std::ostream& out);

struct EvalOutputs {
  SplitEvaluation evaluation;
  double residual_w1 = 0.0;  // flat-region residual vs injected-noise distance
};

/// Reconstructs `domain/split` with the checkpoint's network and scores it.
EvalOutputs evaluate_checkpoint(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                                const std::string& domain, const std::string& split, int64_t mc_samples,
                                uint64_t seed);

/// Writes metrics.csv and summary.json into `out_dir`.
void write_eval_outputs(const EvalOutputs& eval, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Ablation lattice

struct AblationSetting {
  const char* name;
  bool freeze_sigma;
  double beta1;
  double beta2;
};

/// deterministic, bayesian, +bnua, +rda, full. beta values of the enabled
/// terms come from the base config.
std::array<AblationSetting, 5> ablation_lattice(const ExperimentConfig& base);
ExperimentConfig apply_setting(const ExperimentConfig& base, const AblationSetting& s);

struct AblationRow {
  std::string setting;
  uint64_t seed = 0;
  int64_t best_epoch = 0;
  double psnr = 0, ssim = 0, gmsd = 0, dss = 0;  // target-domain test split, best checkpoint
  double val_bnua_disc = 0;                      // source vs target validation covariances
  double residual_w1 = 0;                        // target test flat-region residual vs noise
  double seconds = 0;                            // wall time of training plus evaluation
};

/// Trains and evaluates every (seed, setting) under `out_dir/seed_<s>/<setting>`.
std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::vector<uint64_t>& seeds,
                                      const std::filesystem::path& out_dir, bool verbose);
/// Per-run rows followed by per-setting means across seeds.
void write_ablation_table(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Diagnostics

struct ReportOutputs {
  std::filesystem::path scatter_csv;
  std::vector<std::filesystem::path> loss_curve_csvs;
  std::vector<std::filesystem::path> residual_pdf_csvs;
  std::vector<std::filesystem::path> plots;
};

/// For each run directory: loss curves and residual PDFs (latest epoch); across
/// all runs: discrepancy-vs-metric scatter with one row per logged checkpoint.
ReportOutputs make_report(const std::vector<std::filesystem::path>& run_dirs, const std::filesystem::path& out_dir);

}  // namespace ctbayes::cli
