#pragma once

#include "sad/encoder.hpp"

#include <torch/torch.h>

namespace sad {

struct TaskHeadArch {
    int channels = 64;
    int num_classes = 6;
    int upsample = 8;

    nlohmann::json to_json() const {
        return {{"channels", channels}, {"num_classes", num_classes}, {"upsample", upsample}};
    }
    static TaskHeadArch from_json(const nlohmann::json& j);
    bool operator==(const TaskHeadArch&) const = default;
};

/// Per-pixel segmentation head: 1x1 conv to K classes, bilinear upsampling
/// back to input resolution.
class SegHeadImpl : public torch::nn::Module {
public:
    explicit SegHeadImpl(TaskHeadArch arch);
    torch::Tensor forward(const torch::Tensor& z);
    const TaskHeadArch& arch() const { return arch_; }

private:
    TaskHeadArch arch_;
    torch::nn::Conv2d classifier_{nullptr};
};
TORCH_MODULE(SegHead);

/// [B, K, H'*up, W'*up] logits. Rejects spf-tagged maps.
torch::Tensor seg_forward(SegHead& head, const FeatureMap& z);

/// Mean pixel cross-entropy over non-ignored pixels (label 255 is ignored).
/// `mask` is [B, H, W] of any integer type.
torch::Tensor loss_task(const torch::Tensor& logits, const torch::Tensor& mask);

} // namespace sad
