#pragma once

// Encoder/decoder reconstruction network F = E o G in the CPCE style: 3x3
// stride-1 convolutions, conveying paths from every deterministic encoder
// layer to its mirrored decoder layer, and Bayesian last layers on both sides.

#include <vector>

#include <torch/torch.h>

#include "ctbayes/variational.hpp"

namespace ctbayes {

struct ModelConfig {
  int64_t channels = 32;
  int64_t encoder_layers = 4;  // decoder mirrors this count
  double leaky_slope = 0.01;

  void validate() const;
};

/// One stochastic embedding plus the deterministic encoder activations the
/// decoder's conveying paths consume (shallow to deep).
struct Encoding {
  torch::Tensor z;
  std::vector<torch::Tensor> skips;
};

class EncoderImpl : public torch::nn::Module {
 public:
  EncoderImpl(const ModelConfig& cfg, at::Generator& init_gen);

  /// Outputs of the deterministic layers, shallow to deep.
  std::vector<torch::Tensor> trunk(const torch::Tensor& x);
  /// Bayesian last layer (with activation) applied to the deepest trunk output.
  torch::Tensor head(const torch::Tensor& deepest, at::Generator& gen);

  Encoding forward(const torch::Tensor& x, at::Generator& gen);

  BayesianConv2d bayesian() const { return bayes_; }

 private:
  ModelConfig cfg_;
  std::vector<torch::nn::Conv2d> convs_;
  BayesianConv2d bayes_{nullptr};
};
TORCH_MODULE(Encoder);

class DecoderImpl : public torch::nn::Module {
 public:
  DecoderImpl(const ModelConfig& cfg, at::Generator& init_gen);

  torch::Tensor forward(const Encoding& enc, at::Generator& gen);

  BayesianConv2d bayesian() const { return bayes_; }

 private:
  ModelConfig cfg_;
  std::vector<torch::nn::ConvTranspose2d> deconvs_;
  BayesianConv2d bayes_{nullptr};
};
TORCH_MODULE(Decoder);

struct McForward {
  torch::Tensor y_hat;      // [B, 1, H, W]
  torch::Tensor z_samples;  // [B, M, C, H', W']
  torch::Tensor residual;   // x - y_hat
};

class ReconstructionNetImpl : public torch::nn::Module {
 public:
  ReconstructionNetImpl(const ModelConfig& cfg, at::Generator& init_gen);

  Encoding encode(const torch::Tensor& x, at::Generator& gen);
  torch::Tensor decode(const Encoding& enc, at::Generator& gen);
  /// Single-sample reconstruction decode(encode(x)).
  torch::Tensor forward(const torch::Tensor& x, at::Generator& gen);

  /// M encoder weight draws on the same input; the mean embedding goes
  /// through one decoder draw. Rejects M < 2.
  McForward mc_forward(const torch::Tensor& x, int64_t mc_samples, at::Generator& gen);

  torch::Tensor kl_encoder() const;
  torch::Tensor kl_decoder() const;

  void set_mean_only(bool on);
  void zero_sigma();
  void moped(double delta);

  std::vector<torch::Tensor> sigma_parameters() const;
  /// All trainable parameters except the raw sigmas.
  std::vector<torch::Tensor> non_sigma_parameters() const;
  std::vector<torch::Tensor> encoder_variational_parameters() const;

  const ModelConfig& config() const { return cfg_; }
  Encoder encoder() const { return encoder_; }
  Decoder decoder() const { return decoder_; }

 private:
  ModelConfig cfg_;
  Encoder encoder_{nullptr};
  Decoder decoder_{nullptr};
};
TORCH_MODULE(ReconstructionNet);

/// Fan-in uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)), for weight and bias.
void init_uniform_fan_in(torch::Tensor& weight, torch::Tensor& bias, int64_t fan_in, at::Generator& gen);

void check_image_batch(const torch::Tensor& x, const char* what);

}  // namespace ctbayes
