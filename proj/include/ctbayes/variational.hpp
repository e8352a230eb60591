#pragma once

// Mean-field Gaussian weight posteriors: reparameterized sampling, closed-form
// KL to a Gaussian prior, MOPED initialization and the Bayesian conv layer.

#include <utility>

#include <torch/torch.h>

namespace ctbayes {

inline constexpr double kMopedSigmaFloor = 1e-5;

/// q(w) = N(mu, softplus(raw_sigma)^2), elementwise.
struct VariationalGaussian {
  torch::Tensor mu;
  torch::Tensor raw_sigma;

  torch::Tensor sigma() const { return torch::nn::functional::softplus(raw_sigma); }
};

/// p(w) = N(mu0, sigma0^2); both broadcast against the posterior shape.
struct PriorGaussian {
  torch::Tensor mu0;
  torch::Tensor sigma0;
};

/// Inverse of softplus, log(expm1(s)). Maps 0 to -inf.
torch::Tensor softplus_inverse(const torch::Tensor& sigma);

/// w = mu + sigma * eps with eps ~ N(0, 1) drawn from `gen`.
torch::Tensor sample_weights(const VariationalGaussian& q, at::Generator& gen);

/// Sum over elements of KL(N(mu, sigma^2) || N(mu0, sigma0^2)).
torch::Tensor kl_gaussian(const VariationalGaussian& q, const PriorGaussian& p);

/// Posterior centred on the deterministic weights with sigma = delta |w|
/// (floored), and a prior equal to that posterior.
std::pair<VariationalGaussian, PriorGaussian> moped_init(const torch::Tensor& deterministic_weights, double delta,
                                                         double sigma_floor = kMopedSigmaFloor);

enum class ConvKind { forward, transposed };

/// Stride-1, size-preserving 2-D (transposed) convolution with a freshly
/// sampled kernel and bias. Kernel layout follows torch: [out, in, k, k] for
/// forward, [in, out, k, k] for transposed.
torch::Tensor bayesian_conv_forward(const torch::Tensor& x, const VariationalGaussian& kernel,
                                    const VariationalGaussian& bias, at::Generator& gen,
                                    ConvKind kind = ConvKind::forward);

/// Bayesian counterpart of a 3x3 conv / transposed-conv layer. Bias is
/// variational too. In mean-only mode the layer behaves like its
/// deterministic twin: forward uses the means and the KL term is zero.
class BayesianConv2dImpl : public torch::nn::Module {
 public:
  BayesianConv2dImpl(int64_t in_channels, int64_t out_channels, int64_t kernel_size, ConvKind kind);

  torch::Tensor forward(const torch::Tensor& x, at::Generator& gen);
  torch::Tensor forward_mean(const torch::Tensor& x);

  torch::Tensor kl() const;

  /// Deterministic init of the means (fan-in uniform) from `gen`.
  void reset_parameters(at::Generator& gen);
  /// MOPED re-initialization from the current means.
  void moped_from_means(double delta, double sigma_floor = kMopedSigmaFloor);
  /// Pushes every sigma to exactly 0 (raw_sigma = -inf).
  void zero_sigma();

  void set_mean_only(bool on) { mean_only_ = on; }
  bool mean_only() const { return mean_only_; }

  VariationalGaussian kernel_posterior() const { return {weight_mu_, weight_raw_sigma_}; }
  VariationalGaussian bias_posterior() const { return {bias_mu_, bias_raw_sigma_}; }
  PriorGaussian kernel_prior() const { return {prior_weight_mu_, prior_weight_sigma_}; }
  PriorGaussian bias_prior() const { return {prior_bias_mu_, prior_bias_sigma_}; }

  std::vector<torch::Tensor> sigma_parameters() const { return {weight_raw_sigma_, bias_raw_sigma_}; }
  std::vector<torch::Tensor> mean_parameters() const { return {weight_mu_, bias_mu_}; }

  ConvKind kind() const { return kind_; }
  int64_t in_channels() const { return in_channels_; }
  int64_t out_channels() const { return out_channels_; }

 private:
  int64_t in_channels_;
  int64_t out_channels_;
  int64_t kernel_size_;
  ConvKind kind_;
  bool mean_only_ = false;

  torch::Tensor weight_mu_, weight_raw_sigma_, bias_mu_, bias_raw_sigma_;
  torch::Tensor prior_weight_mu_, prior_weight_sigma_, prior_bias_mu_, prior_bias_sigma_;
};
TORCH_MODULE(BayesianConv2d);

}  // namespace ctbayes
