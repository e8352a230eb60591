#pragma once

// Image-space residual distribution alignment: the LDCT-minus-reconstruction
// residual stands in for the noise, and a least-squares patch discriminator
// separates target residuals (label 1) from source residuals (label 0).

#include <span>
#include <utility>
#include <vector>

#include <torch/torch.h>

namespace ctbayes::rda {

/// x - y_hat, elementwise.
torch::Tensor residual(const torch::Tensor& x, const torch::Tensor& y_hat);

struct DiscriminatorConfig {
  std::vector<int64_t> channels = {64, 128, 256};  // hidden widths; output is 1 channel
  std::vector<int64_t> strides = {2, 2, 1, 1};     // one per conv, channels.size() + 1 total
  int64_t kernel = 4;
  int64_t padding = 1;
  double leaky_slope = 0.2;

  void validate() const;
  /// Spatial size of the score map for an h x w input.
  std::pair<int64_t, int64_t> output_size(int64_t h, int64_t w) const;
};

/// Fully-convolutional patch discriminator: 4x4 convs, leaky-rectifier
/// activations, instance normalization on every hidden layer but the first,
/// linear output.
class DiscriminatorImpl : public torch::nn::Module {
 public:
  DiscriminatorImpl(const DiscriminatorConfig& cfg, at::Generator& init_gen);

  torch::Tensor forward(const torch::Tensor& residual);

  void set_requires_grad(bool on);

 private:
  DiscriminatorConfig cfg_;
  std::vector<torch::nn::Conv2d> convs_;
};
TORCH_MODULE(Discriminator);

/// mean((D_target - 1)^2) + mean(D_source^2).
torch::Tensor lsgan_discriminator_loss(const torch::Tensor& score_target, const torch::Tensor& score_source);

/// mean((D_source - 1)^2).
torch::Tensor lsgan_generator_loss(const torch::Tensor& score_source);

// Diagnostics ---------------------------------------------------------------

inline constexpr int kHistogramBins = 256;
inline constexpr double kHistogramLo = -0.5;
inline constexpr double kHistogramHi = 0.5;

/// Density histogram (integrates to 1). Values outside [lo, hi] land in the
/// edge bins.
std::vector<double> density_histogram(std::span<const float> values, int bins = kHistogramBins,
                                      double lo = kHistogramLo, double hi = kHistogramHi);

/// 1-D Wasserstein-1 distance between two empirical distributions.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

}  // namespace ctbayes::rda
