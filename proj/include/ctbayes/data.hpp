#pragma once

// Synthetic two-domain LDCT/NDCT generation, display windowing, patch
// extraction and the on-disk dataset layout (raw slice files + manifest).

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbayes/image.hpp"

namespace ctbayes {

enum class PhantomStyle { abdomen_like, head_like };

std::string to_string(PhantomStyle style);
PhantomStyle phantom_style_from_string(const std::string& name);

struct DomainSpec {
  std::string name;
  PhantomStyle phantom_style = PhantomStyle::abdomen_like;
  double noise_sigma_base = 0.05;      // Gaussian std, normalized window units
  double photon_count_base = 5.0e4;    // Poisson scale at water density
  double mas_jitter_pct = 0.3;         // per-slice noise-level jitter amplitude
  double window_level = 40.0;          // HU
  double window_width = 400.0;         // HU

  void validate() const;

  static DomainSpec abdomen_default();
  static DomainSpec head_default();
};

void to_json(nlohmann::json& j, const DomainSpec& spec);
void from_json(const nlohmann::json& j, DomainSpec& spec);

struct SlicePair {
  Image ndct;
  Image ldct;
  std::string domain;
  double slice_noise_scale = 1.0;
};

// Clean phantom in HU. Air is exactly -1000 HU.
Image generate_phantom(const DomainSpec& spec, int64_t size, std::mt19937_64& rng);

float window_normalize(float hu, double level, double width);
Image window_normalize(const Image& hu, double level, double width);

SlicePair apply_low_dose_noise(const Image& clean_hu, const DomainSpec& spec, std::mt19937_64& rng);

/// Std of (ldct - ndct) at a flat pixel of the given HU value for a realized
/// noise scale, ignoring clamping at the window edges.
double effective_noise_sigma(const DomainSpec& spec, double hu, double noise_scale);

struct PatchPair {
  Image x;  // LDCT crop
  Image y;  // NDCT crop
  int64_t row = 0;
  int64_t col = 0;
};

inline constexpr int kDefaultPatchesPerSlice = 8;
inline constexpr int kDefaultPatchSize = 64;

std::vector<PatchPair> extract_patches(const SlicePair& pair, int n, int size, std::mt19937_64& rng);
/// Crops of a single image at the same random coordinates extract_patches would draw.
std::vector<Image> extract_patches(const Image& image, int n, int size, std::mt19937_64& rng);

/// Pixels whose 5x5 neighbourhood in `ndct` is constant and away from the
/// window clamps. Used for noise/residual statistics.
std::vector<uint8_t> flat_region_mask(const Image& ndct, int radius = 2);

// ---------------------------------------------------------------------------
// Slice files: magic "BNUA", u32 version = 1, u32 H, u32 W, H*W f32, all LE.

inline constexpr uint32_t kSliceFileVersion = 1;

void write_slice(const std::filesystem::path& path, const Image& image);
Image read_slice(const std::filesystem::path& path);
uint64_t image_hash(const Image& image);

// ---------------------------------------------------------------------------

struct SplitCounts {
  int train = 64;
  int val = 8;
  int test = 16;
  int get(const std::string& split) const;
};

struct DomainDataConfig {
  DomainSpec spec;
  SplitCounts counts;
};

struct DatasetConfig {
  int64_t slice_size = 128;
  uint64_t seed = 0;
  std::string source_domain = "head";
  std::string target_domain = "abdomen";
  std::vector<DomainDataConfig> domains = {{DomainSpec::head_default(), {}},
                                           {DomainSpec::abdomen_default(), {}}};
  void validate() const;
  const DomainDataConfig& domain(const std::string& name) const;
};

void to_json(nlohmann::json& j, const DatasetConfig& cfg);
void from_json(const nlohmann::json& j, DatasetConfig& cfg);

struct SliceRecord {
  int index = 0;
  uint64_t seed = 0;
  double noise_scale = 1.0;
  std::string ldct_file;
  std::optional<std::string> ndct_file;  // absent for target-domain training slices
  std::string ldct_hash;
  std::optional<std::string> ndct_hash;
};

struct Manifest {
  int version = 1;
  DatasetConfig config;
  // domain -> split -> slices
  std::map<std::string, std::map<std::string, std::vector<SliceRecord>>> slices;

  size_t count(const std::string& domain, const std::string& split) const;
};

inline const std::vector<std::string> kSplits = {"train", "val", "test"};

Manifest build_dataset(const DatasetConfig& cfg, const std::filesystem::path& root);
Manifest load_manifest(const std::filesystem::path& root);
void save_manifest(const Manifest& manifest, const std::filesystem::path& root);

/// Read-only access to a built dataset. The target domain's training split
/// only ever hands out LDCT images.
class DatasetView {
 public:
  explicit DatasetView(std::filesystem::path root);

  const Manifest& manifest() const { return manifest_; }
  const std::string& source() const { return manifest_.config.source_domain; }
  const std::string& target() const { return manifest_.config.target_domain; }

  std::vector<SlicePair> source_train() const { return paired(source(), "train"); }
  std::vector<Image> target_train() const { return ldct_only(target(), "train"); }

  /// Paired slices; throws for splits that carry no NDCT.
  std::vector<SlicePair> paired(const std::string& domain, const std::string& split) const;
  std::vector<Image> ldct_only(const std::string& domain, const std::string& split) const;

 private:
  const std::vector<SliceRecord>& records(const std::string& domain, const std::string& split) const;

  std::filesystem::path root_;
  Manifest manifest_;
};

}  // namespace ctbayes
