#include "ctbayes/bnua.hpp"

#include <string>

#include "ctbayes/image.hpp"

namespace ctbayes::bnua {

torch::Tensor squeeze(const torch::Tensor& z_samples) {
  if (z_samples.dim() != 4 && z_samples.dim() != 5) {
    throw ShapeError("squeeze: expected [M,C,H,W] or [B,M,C,H,W], got dim " + std::to_string(z_samples.dim()));
  }
  return z_samples.mean({-2, -1});
}

torch::Tensor mc_covariance(const torch::Tensor& compact) {
  if (compact.dim() != 2 && compact.dim() != 3) {
    throw ShapeError("mc_covariance: expected [M,C] or [B,M,C], got dim " + std::to_string(compact.dim()));
  }
  const int64_t m = compact.size(-2);
  if (m < 2) throw std::invalid_argument("mc_covariance: need M >= 2 samples, got " + std::to_string(m));
  // Mean taken relative to the first row so identical rows centre to exact zeros.
  const auto first = compact.narrow(-2, 0, 1);
  const auto mean = first + (compact - first).mean(-2, /*keepdim=*/true);
  const auto centered = compact - mean;
  return torch::matmul(centered.transpose(-2, -1), centered) / static_cast<double>(m - 1);
}

torch::Tensor bnua_loss(const torch::Tensor& source_covs, const torch::Tensor& target_covs) {
  if (source_covs.dim() != 3 || target_covs.dim() != 3) {
    throw ShapeError("bnua_loss: expected [B,C,C] stacks");
  }
  if (source_covs.size(0) == 0 || target_covs.size(0) == 0) {
    throw std::invalid_argument("bnua_loss: covariance lists must be non-empty");
  }
  if (source_covs.size(1) != target_covs.size(1) || source_covs.size(2) != target_covs.size(2) ||
      source_covs.size(1) != source_covs.size(2)) {
    throw ShapeError("bnua_loss: covariance dimensions differ (" + std::to_string(source_covs.size(1)) + "x" +
                     std::to_string(source_covs.size(2)) + " vs " + std::to_string(target_covs.size(1)) + "x" +
                     std::to_string(target_covs.size(2)) + ")");
  }
  const auto s = source_covs.flatten(1);
  const auto t = target_covs.flatten(1);
  const auto diff = s.unsqueeze(1) - t.unsqueeze(0);  // [Bs, Bt, C*C]
  return diff.pow(2).sum() / static_cast<double>(s.size(0) * t.size(0));
}

}  // namespace ctbayes::bnua
