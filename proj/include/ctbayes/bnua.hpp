#pragma once

// Latent-space noise uncertainty alignment. The covariance is taken across
// the Monte-Carlo weight draws of a single input, never across inputs, so the
// statistic carries no content signal.

#include <torch/torch.h>

namespace ctbayes::bnua {

/// Global average pooling of an MC embedding stack.
/// [M, C, H, W] -> [M, C], or batched [B, M, C, H, W] -> [B, M, C].
torch::Tensor squeeze(const torch::Tensor& z_samples);

/// Unbiased (1/(M-1)) covariance over the rows of U.
/// [M, C] -> [C, C], or batched [B, M, C] -> [B, C, C]. Rejects M < 2.
torch::Tensor mc_covariance(const torch::Tensor& compact);

/// (1/B^2) sum_i sum_j ||C_i^S - C_j^T||_F^2 over all cross-domain pairs.
/// Both arguments are [B, C, C] stacks (B may differ between the two).
torch::Tensor bnua_loss(const torch::Tensor& source_covs, const torch::Tensor& target_covs);

/// squeeze + mc_covariance on a batched stack [B, M, C, H, W].
inline torch::Tensor covariances_from_stack(const torch::Tensor& z_samples) {
  return mc_covariance(bnua::squeeze(z_samples));
}

}  // namespace ctbayes::bnua
