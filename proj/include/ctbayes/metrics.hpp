#pragma once

// Full-reference image quality metrics used for validation and test reports.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ctbayes/image.hpp"

namespace ctbayes::metrics {

inline constexpr double kPsnrCapDb = 100.0;

/// 10 log10(peak^2 / MSE), capped at 100 dB when MSE < 1e-12.
double psnr(const Image& ref, const Image& test, double peak = 1.0);

/// Mean local SSIM over the valid region of an 11x11 Gaussian window
/// (sigma 1.5), c1 = (0.01 peak)^2, c2 = (0.03 peak)^2. Needs both sides >= 11.
double ssim(const Image& ref, const Image& test, double peak = 1.0);

inline constexpr double kGmsdConstant = 0.0026;

/// Standard deviation (n-1) of the gradient magnitude similarity map.
/// Prewitt gradients with zero 'same' padding on [0,1]-scaled inputs.
double gmsd(const Image& ref, const Image& test);

struct DssResult {
  double similarity = 1.0;
  double dissimilarity = 0.0;  // 1 - similarity, lower is better
};

/// Block-DCT sub-band similarity on non-overlapping 8x8 blocks.
///
/// Every block is transformed with an orthonormal 2-D DCT-II and the
/// coefficients are regrouped into 64 sub-bands (one value per block).
/// The DC sub-band is compared with an SSIM-style luminance x structure term
/// (constants scaled by 8 for the DC gain). Each AC sub-band gets a structural
/// term (2 cov + c) / (var_a + var_b + c), c = (0.03 peak)^2. The AC bands are
/// split into low (1 <= u+v <= 3) and high frequency groups and averaged per
/// group. All terms are clamped at 0, then
///   similarity = 0.5 s_dc + 0.3 mean(s_low) + 0.2 mean(s_high).
/// Trailing rows/columns that do not fill a block are ignored. Requires at
/// least 2 blocks.
DssResult dss_detail(const Image& ref, const Image& test, double peak = 1.0);
inline double dss(const Image& ref, const Image& test, double peak = 1.0) {
  return dss_detail(ref, test, peak).dissimilarity;
}

struct MetricValues {
  double psnr = 0.0;
  double ssim = 0.0;
  double gmsd = 0.0;
  double dss = 0.0;
  double dss_similarity = 0.0;
};

MetricValues evaluate(const Image& ref, const Image& test);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& values);

struct MetricReport {
  std::vector<std::string> names;
  std::vector<MetricValues> per_image;

  void add(std::string name, const MetricValues& v) {
    names.push_back(std::move(name));
    per_image.push_back(v);
  }
  MeanStd aggregate(double MetricValues::*field) const;
  nlohmann::json summary() const;
  void write_csv(const std::filesystem::path& path) const;
  void write_summary(const std::filesystem::path& path) const;
};

}  // namespace ctbayes::metrics
