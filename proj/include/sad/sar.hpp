#pragma once

#include "sad/encoder.hpp"
#include "sad/types.hpp"

#include <torch/torch.h>

#include <vector>

namespace sad {

/// Self-adversarial regularizer head: region-pool the whole feature map to a
/// fixed grid, flatten, then affine -> relu -> affine to N domainness logits.
struct SarArch {
    int channels = 64;
    int pooled_h = 4;
    int pooled_w = 4;
    int hidden = 256;
    int n_bins = 4;

    void validate() const;
    nlohmann::json to_json() const;
    static SarArch from_json(const nlohmann::json& j);
    bool operator==(const SarArch&) const = default;
};

/// Logits and their softmax, one row per batch element.
struct DomainnessPrediction {
    torch::Tensor logits; // [B, N]
    torch::Tensor probs;  // [B, N]

    static DomainnessPrediction from_logits(torch::Tensor logits);
    std::int64_t n_bins() const { return logits.size(1); }
};

class SarHeadImpl : public torch::nn::Module {
public:
    explicit SarHeadImpl(SarArch arch);

    /// With `frozen_params`, gradients still flow into `z` but not into the
    /// head's own weights.
    torch::Tensor forward(const torch::Tensor& z, bool frozen_params = false);

    const SarArch& arch() const { return arch_; }

private:
    SarArch arch_;
    torch::nn::Linear fc1_{nullptr};
    torch::nn::Linear fc2_{nullptr};
};
TORCH_MODULE(SarHead);

/// Region pooling of the whole map to (h, w) followed by flattening.
torch::Tensor pool_features(const torch::Tensor& z, int pooled_h, int pooled_w);

DomainnessPrediction sar_forward(SarHead& head, const FeatureMap& z, bool frozen_params = false);

/// Cross-entropy against the generated one-hot label, -sum_i d_gt[i] log p[i],
/// averaged over the batch. `bins` is [B] int64.
torch::Tensor loss_spf(const DomainnessPrediction& pred, const torch::Tensor& bins);
torch::Tensor loss_spf(const DomainnessPrediction& pred, const std::vector<DomainnessSpec>& labels);

/// KL(q || uniform) = sum_i q_i log(N q_i), averaged over the batch.
torch::Tensor loss_inv(const DomainnessPrediction& pred);

} // namespace sad
