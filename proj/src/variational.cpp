#include "ctbayes/variational.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ctbayes/image.hpp"

namespace ctbayes {

torch::Tensor softplus_inverse(const torch::Tensor& sigma) { return torch::log(torch::expm1(sigma)); }

torch::Tensor sample_weights(const VariationalGaussian& q, at::Generator& gen) {
  const auto eps = torch::randn(q.mu.sizes(), gen, q.mu.options().requires_grad(false));
  return q.mu + q.sigma() * eps;
}

torch::Tensor kl_gaussian(const VariationalGaussian& q, const PriorGaussian& p) {
  const auto sigma = q.sigma();
  const auto diff = q.mu - p.mu0;
  const auto terms = torch::log(p.sigma0) - torch::log(sigma) +
                     (sigma * sigma + diff * diff) / (2.0 * p.sigma0 * p.sigma0) - 0.5;
  return terms.sum();
}

std::pair<VariationalGaussian, PriorGaussian> moped_init(const torch::Tensor& deterministic_weights, double delta,
                                                         double sigma_floor) {
  if (!(delta > 0.0)) throw std::invalid_argument("moped_init: delta must be > 0, got " + std::to_string(delta));
  torch::NoGradGuard no_grad;
  VariationalGaussian q;
  q.mu = deterministic_weights.detach().clone();
  const auto target_sigma = torch::clamp_min(delta * q.mu.abs(), sigma_floor);
  q.raw_sigma = softplus_inverse(target_sigma);
  // The prior snapshots the realized sigma so that KL is exactly zero here.
  PriorGaussian p{q.mu.clone(), q.sigma().clone()};
  return {q, p};
}

torch::Tensor bayesian_conv_forward(const torch::Tensor& x, const VariationalGaussian& kernel,
                                    const VariationalGaussian& bias, at::Generator& gen, ConvKind kind) {
  const int64_t expected_in = kind == ConvKind::forward ? kernel.mu.size(1) : kernel.mu.size(0);
  if (x.dim() != 4 || x.size(1) != expected_in) {
    throw ShapeError("bayesian_conv_forward: input has " + std::to_string(x.dim() == 4 ? x.size(1) : -1) +
                     " channels (dim " + std::to_string(x.dim()) + "), kernel expects " +
                     std::to_string(expected_in));
  }
  const auto w = sample_weights(kernel, gen);
  const auto b = sample_weights(bias, gen);
  const int64_t pad = kernel.mu.size(2) / 2;
  if (kind == ConvKind::forward) return torch::conv2d(x, w, b, 1, pad);
  return torch::conv_transpose2d(x, w, b, 1, pad);
}

BayesianConv2dImpl::BayesianConv2dImpl(int64_t in_channels, int64_t out_channels, int64_t kernel_size,
                                       ConvKind kind)
    : in_channels_(in_channels), out_channels_(out_channels), kernel_size_(kernel_size), kind_(kind) {
  const std::vector<int64_t> shape = kind == ConvKind::forward
                                         ? std::vector<int64_t>{out_channels, in_channels, kernel_size, kernel_size}
                                         : std::vector<int64_t>{in_channels, out_channels, kernel_size, kernel_size};
  weight_mu_ = register_parameter("weight_mu", torch::zeros(shape));
  weight_raw_sigma_ = register_parameter("weight_raw_sigma", torch::zeros(shape));
  bias_mu_ = register_parameter("bias_mu", torch::zeros({out_channels}));
  bias_raw_sigma_ = register_parameter("bias_raw_sigma", torch::zeros({out_channels}));
  prior_weight_mu_ = register_buffer("prior_weight_mu", torch::zeros(shape));
  prior_weight_sigma_ = register_buffer("prior_weight_sigma", torch::ones(shape));
  prior_bias_mu_ = register_buffer("prior_bias_mu", torch::zeros({out_channels}));
  prior_bias_sigma_ = register_buffer("prior_bias_sigma", torch::ones({out_channels}));
  moped_from_means(0.1);
}

void BayesianConv2dImpl::reset_parameters(at::Generator& gen) {
  torch::NoGradGuard no_grad;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels_ * kernel_size_ * kernel_size_));
  weight_mu_.uniform_(-bound, bound, gen);
  bias_mu_.uniform_(-bound, bound, gen);
  moped_from_means(0.1);
}

void BayesianConv2dImpl::moped_from_means(double delta, double sigma_floor) {
  torch::NoGradGuard no_grad;
  auto [qw, pw] = moped_init(weight_mu_, delta, sigma_floor);
  auto [qb, pb] = moped_init(bias_mu_, delta, sigma_floor);
  weight_raw_sigma_.copy_(qw.raw_sigma);
  bias_raw_sigma_.copy_(qb.raw_sigma);
  prior_weight_mu_.copy_(pw.mu0);
  prior_weight_sigma_.copy_(pw.sigma0);
  prior_bias_mu_.copy_(pb.mu0);
  prior_bias_sigma_.copy_(pb.sigma0);
}

void BayesianConv2dImpl::zero_sigma() {
  torch::NoGradGuard no_grad;
  weight_raw_sigma_.fill_(-std::numeric_limits<double>::infinity());
  bias_raw_sigma_.fill_(-std::numeric_limits<double>::infinity());
}

torch::Tensor BayesianConv2dImpl::forward(const torch::Tensor& x, at::Generator& gen) {
  if (mean_only_) return forward_mean(x);
  return bayesian_conv_forward(x, kernel_posterior(), bias_posterior(), gen, kind_);
}

torch::Tensor BayesianConv2dImpl::forward_mean(const torch::Tensor& x) {
  const int64_t expected_in = kind_ == ConvKind::forward ? weight_mu_.size(1) : weight_mu_.size(0);
  if (x.dim() != 4 || x.size(1) != expected_in) {
    throw ShapeError("BayesianConv2d: input has " + std::to_string(x.dim() == 4 ? x.size(1) : -1) +
                     " channels, layer expects " + std::to_string(expected_in));
  }
  const int64_t pad = kernel_size_ / 2;
  if (kind_ == ConvKind::forward) return torch::conv2d(x, weight_mu_, bias_mu_, 1, pad);
  return torch::conv_transpose2d(x, weight_mu_, bias_mu_, 1, pad);
}

torch::Tensor BayesianConv2dImpl::kl() const {
  if (mean_only_) return torch::zeros({}, weight_mu_.options());
  return kl_gaussian(kernel_posterior(), kernel_prior()) + kl_gaussian(bias_posterior(), bias_prior());
}

}  // namespace ctbayes
