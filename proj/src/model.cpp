#include "ctbayes/model.hpp"

#include <cmath>
#include <string>

#include "ctbayes/image.hpp"

namespace ctbayes {

namespace F = torch::nn::functional;

void ModelConfig::validate() const {
  if (channels < 1) throw std::invalid_argument("model.channels must be >= 1");
  if (encoder_layers < 2) throw std::invalid_argument("model.encoder_layers must be >= 2");
  if (!(leaky_slope >= 0.0)) throw std::invalid_argument("model.leaky_slope must be >= 0");
}

void init_uniform_fan_in(torch::Tensor& weight, torch::Tensor& bias, int64_t fan_in, at::Generator& gen) {
  torch::NoGradGuard no_grad;
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  weight.uniform_(-bound, bound, gen);
  if (bias.defined()) bias.uniform_(-bound, bound, gen);
}

void check_image_batch(const torch::Tensor& x, const char* what) {
  if (x.dim() != 4 || x.size(1) != 1) {
    std::string shape = "[";
    for (int64_t i = 0; i < x.dim(); ++i) shape += (i ? "," : "") + std::to_string(x.size(i));
    throw ShapeError(std::string(what) + ": expected [B,1,H,W] input, got " + shape + "]");
  }
}

EncoderImpl::EncoderImpl(const ModelConfig& cfg, at::Generator& init_gen) : cfg_(cfg) {
  cfg_.validate();
  const int64_t c = cfg_.channels;
  for (int64_t i = 0; i + 1 < cfg_.encoder_layers; ++i) {
    const int64_t in = i == 0 ? 1 : c;
    auto conv = register_module("conv" + std::to_string(i),
                                torch::nn::Conv2d(torch::nn::Conv2dOptions(in, c, 3).stride(1).padding(1)));
    init_uniform_fan_in(conv->weight, conv->bias, in * 9, init_gen);
    convs_.push_back(conv);
  }
  bayes_ = register_module("bayes", BayesianConv2d(c, c, 3, ConvKind::forward));
  bayes_->reset_parameters(init_gen);
}

std::vector<torch::Tensor> EncoderImpl::trunk(const torch::Tensor& x) {
  check_image_batch(x, "encode");
  std::vector<torch::Tensor> out;
  torch::Tensor h = x;
  for (auto& conv : convs_) {
    h = F::leaky_relu(conv->forward(h), F::LeakyReLUFuncOptions().negative_slope(cfg_.leaky_slope));
    out.push_back(h);
  }
  return out;
}

torch::Tensor EncoderImpl::head(const torch::Tensor& deepest, at::Generator& gen) {
  return F::leaky_relu(bayes_->forward(deepest, gen), F::LeakyReLUFuncOptions().negative_slope(cfg_.leaky_slope));
}

Encoding EncoderImpl::forward(const torch::Tensor& x, at::Generator& gen) {
  Encoding enc;
  enc.skips = trunk(x);
  enc.z = head(enc.skips.back(), gen);
  return enc;
}

DecoderImpl::DecoderImpl(const ModelConfig& cfg, at::Generator& init_gen) : cfg_(cfg) {
  cfg_.validate();
  const int64_t c = cfg_.channels;
  for (int64_t i = 0; i + 1 < cfg_.encoder_layers; ++i) {
    const int64_t in = i == 0 ? c : 2 * c;
    auto deconv = register_module(
        "deconv" + std::to_string(i),
        torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(in, c, 3).stride(1).padding(1)));
    init_uniform_fan_in(deconv->weight, deconv->bias, in * 9, init_gen);
    deconvs_.push_back(deconv);
  }
  bayes_ = register_module("bayes", BayesianConv2d(2 * c, 1, 3, ConvKind::transposed));
  bayes_->reset_parameters(init_gen);
}

torch::Tensor DecoderImpl::forward(const Encoding& enc, at::Generator& gen) {
  const auto n_skips = static_cast<int64_t>(enc.skips.size());
  if (n_skips != cfg_.encoder_layers - 1) {
    throw ShapeError("decode: expected " + std::to_string(cfg_.encoder_layers - 1) + " conveying paths, got " +
                     std::to_string(n_skips));
  }
  if (enc.z.dim() != 4 || enc.z.size(1) != cfg_.channels) {
    throw ShapeError("decode: latent must have " + std::to_string(cfg_.channels) + " channels");
  }
  const auto act = F::LeakyReLUFuncOptions().negative_slope(cfg_.leaky_slope);
  torch::Tensor h = enc.z;
  for (size_t i = 0; i < deconvs_.size(); ++i) {
    if (i > 0) h = torch::cat({h, enc.skips[static_cast<size_t>(n_skips) - i]}, 1);
    h = F::leaky_relu(deconvs_[i]->forward(h), act);
  }
  h = torch::cat({h, enc.skips.front()}, 1);
  return bayes_->forward(h, gen);
}

ReconstructionNetImpl::ReconstructionNetImpl(const ModelConfig& cfg, at::Generator& init_gen) : cfg_(cfg) {
  cfg_.validate();
  encoder_ = register_module("encoder", Encoder(cfg_, init_gen));
  decoder_ = register_module("decoder", Decoder(cfg_, init_gen));
}

Encoding ReconstructionNetImpl::encode(const torch::Tensor& x, at::Generator& gen) {
  return encoder_->forward(x, gen);
}

torch::Tensor ReconstructionNetImpl::decode(const Encoding& enc, at::Generator& gen) {
  return decoder_->forward(enc, gen);
}

torch::Tensor ReconstructionNetImpl::forward(const torch::Tensor& x, at::Generator& gen) {
  return decode(encode(x, gen), gen);
}

McForward ReconstructionNetImpl::mc_forward(const torch::Tensor& x, int64_t mc_samples, at::Generator& gen) {
  if (mc_samples < 2) throw std::invalid_argument("mc_forward: need M >= 2, got " + std::to_string(mc_samples));
  Encoding enc;
  enc.skips = encoder_->trunk(x);
  std::vector<torch::Tensor> samples;
  samples.reserve(static_cast<size_t>(mc_samples));
  if (encoder_->bayesian()->mean_only()) {
    samples.assign(static_cast<size_t>(mc_samples), encoder_->head(enc.skips.back(), gen));
  } else {
    for (int64_t j = 0; j < mc_samples; ++j) samples.push_back(encoder_->head(enc.skips.back(), gen));
  }
  McForward out;
  out.z_samples = torch::stack(samples, 1);
  // z_0 + mean(z_j - z_0): identical samples give back z_0 bit for bit.
  const auto first = out.z_samples.select(1, 0);
  enc.z = first + (out.z_samples - first.unsqueeze(1)).mean(1);
  out.y_hat = decode(enc, gen);
  out.residual = x - out.y_hat;
  return out;
}

torch::Tensor ReconstructionNetImpl::kl_encoder() const { return encoder_->bayesian()->kl(); }
torch::Tensor ReconstructionNetImpl::kl_decoder() const { return decoder_->bayesian()->kl(); }

void ReconstructionNetImpl::set_mean_only(bool on) {
  encoder_->bayesian()->set_mean_only(on);
  decoder_->bayesian()->set_mean_only(on);
}

void ReconstructionNetImpl::zero_sigma() {
  encoder_->bayesian()->zero_sigma();
  decoder_->bayesian()->zero_sigma();
}

void ReconstructionNetImpl::moped(double delta) {
  encoder_->bayesian()->moped_from_means(delta);
  decoder_->bayesian()->moped_from_means(delta);
}

std::vector<torch::Tensor> ReconstructionNetImpl::sigma_parameters() const {
  auto out = encoder_->bayesian()->sigma_parameters();
  for (auto& t : decoder_->bayesian()->sigma_parameters()) out.push_back(t);
  return out;
}

std::vector<torch::Tensor> ReconstructionNetImpl::non_sigma_parameters() const {
  const auto sig = sigma_parameters();
  std::vector<torch::Tensor> out;
  for (const auto& p : parameters()) {
    bool is_sigma = false;
    for (const auto& s : sig) is_sigma = is_sigma || p.is_same(s);
    if (!is_sigma) out.push_back(p);
  }
  return out;
}

std::vector<torch::Tensor> ReconstructionNetImpl::encoder_variational_parameters() const {
  auto out = encoder_->bayesian()->mean_parameters();
  for (auto& t : encoder_->bayesian()->sigma_parameters()) out.push_back(t);
  return out;
}

}  // namespace ctbayes
