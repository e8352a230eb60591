#include "ctbayes/rda.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctbayes/image.hpp"

namespace ctbayes::rda {

namespace F = torch::nn::functional;

torch::Tensor residual(const torch::Tensor& x, const torch::Tensor& y_hat) {
  if (x.sizes() != y_hat.sizes()) throw ShapeError("residual: LDCT and reconstruction shapes differ");
  return x - y_hat;
}

void DiscriminatorConfig::validate() const {
  if (channels.empty()) throw std::invalid_argument("discriminator.channels must be non-empty");
  if (strides.size() != channels.size() + 1)
    throw std::invalid_argument("discriminator.strides needs channels.size() + 1 entries");
  for (auto c : channels)
    if (c < 1) throw std::invalid_argument("discriminator.channels must be positive");
  for (auto s : strides)
    if (s < 1) throw std::invalid_argument("discriminator.strides must be positive");
  if (kernel < 1 || padding < 0) throw std::invalid_argument("discriminator kernel/padding invalid");
}

std::pair<int64_t, int64_t> DiscriminatorConfig::output_size(int64_t h, int64_t w) const {
  for (auto s : strides) {
    h = (h + 2 * padding - kernel) / s + 1;
    w = (w + 2 * padding - kernel) / s + 1;
  }
  return {h, w};
}

DiscriminatorImpl::DiscriminatorImpl(const DiscriminatorConfig& cfg, at::Generator& init_gen) : cfg_(cfg) {
  cfg_.validate();
  int64_t in = 1;
  for (size_t i = 0; i < cfg_.strides.size(); ++i) {
    const int64_t out = i < cfg_.channels.size() ? cfg_.channels[i] : 1;
    auto conv = register_module(
        "conv" + std::to_string(i),
        torch::nn::Conv2d(
            torch::nn::Conv2dOptions(in, out, cfg_.kernel).stride(cfg_.strides[i]).padding(cfg_.padding)));
    torch::NoGradGuard no_grad;
    conv->weight.normal_(0.0, 0.02, init_gen);
    conv->bias.zero_();
    convs_.push_back(conv);
    in = out;
  }
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& residual) {
  if (residual.dim() != 4 || residual.size(1) != 1) throw ShapeError("discriminate: expected [B,1,H,W] residuals");
  const auto [oh, ow] = cfg_.output_size(residual.size(2), residual.size(3));
  if (oh < 1 || ow < 1) {
    throw ShapeError("discriminate: " + std::to_string(residual.size(2)) + "x" + std::to_string(residual.size(3)) +
                     " input too small for the stride plan");
  }
  const auto act = F::LeakyReLUFuncOptions().negative_slope(cfg_.leaky_slope);
  torch::Tensor h = residual;
  const size_t last = convs_.size() - 1;
  for (size_t i = 0; i < convs_.size(); ++i) {
    h = convs_[i]->forward(h);
    if (i == last) break;
    if (i > 0) h = F::instance_norm(h, F::InstanceNormFuncOptions().eps(1e-5));
    h = F::leaky_relu(h, act);
  }
  return h;
}

void DiscriminatorImpl::set_requires_grad(bool on) {
  for (auto& p : parameters()) p.set_requires_grad(on);
}

torch::Tensor lsgan_discriminator_loss(const torch::Tensor& score_target, const torch::Tensor& score_source) {
  return (score_target - 1.0).pow(2).mean() + score_source.pow(2).mean();
}

torch::Tensor lsgan_generator_loss(const torch::Tensor& score_source) { return (score_source - 1.0).pow(2).mean(); }

std::vector<double> density_histogram(std::span<const float> values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("density_histogram: invalid binning");
  std::vector<double> density(static_cast<size_t>(bins), 0.0);
  if (values.empty()) return density;
  const double width = (hi - lo) / bins;
  for (float v : values) {
    auto idx = static_cast<int64_t>(std::floor((static_cast<double>(v) - lo) / width));
    idx = std::clamp<int64_t>(idx, 0, bins - 1);
    density[static_cast<size_t>(idx)] += 1.0;
  }
  const double norm = static_cast<double>(values.size()) * width;
  for (auto& d : density) d /= norm;
  return density;
}

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Integrate |F_a - F_b| over the merged breakpoints.
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  size_t i = 0, j = 0;
  double prev = std::min(a.front(), b.front());
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) next = a[i];
    else next = b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
    prev = next;
  }
  return total;
}

}  // namespace ctbayes::rda
