#pragma once

#include "sad/encoder.hpp"

#include <torch/torch.h>

namespace sad {

struct DiscriminatorArch {
    int channels = 64;
    int hidden = 64;

    nlohmann::json to_json() const { return {{"channels", channels}, {"hidden", hidden}}; }
    static DiscriminatorArch from_json(const nlohmann::json& j);
    bool operator==(const DiscriminatorArch&) const = default;
};

/// Binary source/target critic on invariant features: two stride-1 3x3
/// convs (hidden, 1), global average, sigmoid.
class DiscriminatorImpl : public torch::nn::Module {
public:
    explicit DiscriminatorImpl(DiscriminatorArch arch);

    /// Per-sample logit, shape [B].
    torch::Tensor forward(const torch::Tensor& z);

    const DiscriminatorArch& arch() const { return arch_; }

private:
    DiscriminatorArch arch_;
    torch::nn::Conv2d conv1_{nullptr};
    torch::nn::Conv2d conv2_{nullptr};
};
TORCH_MODULE(Discriminator);

/// Probability that each map came from the (diversified) source domain.
/// Rejects spf-tagged maps.
torch::Tensor disc_forward(Discriminator& disc, const FeatureMap& z);

inline constexpr double kAdvEpsilon = 1e-6;

struct AdvLoss {
    torch::Tensor loss;        // -mean log p_src - mean log(1 - p_tgt)
    std::int64_t clamped = 0;  // probabilities pulled into [eps, 1 - eps]
};

/// Discriminator objective with source labelled 1 and target 0. The encoder
/// side of the min-max comes from `grad_reverse` on the target branch.
AdvLoss loss_adv(const torch::Tensor& p_src, const torch::Tensor& p_tgt);

} // namespace sad
