#include "sad/taskhead.hpp"

#include "sad/error.hpp"

namespace sad {

namespace F = torch::nn::functional;

TaskHeadArch TaskHeadArch::from_json(const nlohmann::json& j) {
    TaskHeadArch a;
    a.channels = j.value("channels", a.channels);
    a.num_classes = j.value("num_classes", a.num_classes);
    a.upsample = j.value("upsample", a.upsample);
    return a;
}

SegHeadImpl::SegHeadImpl(TaskHeadArch arch) : arch_(arch) {
    if (arch_.channels <= 0 || arch_.num_classes < 2 || arch_.upsample <= 0)
        throw ConfigError("invalid task head configuration");
    classifier_ = register_module(
        "classifier", torch::nn::Conv2d(torch::nn::Conv2dOptions(arch_.channels, arch_.num_classes, 1)));
}

torch::Tensor SegHeadImpl::forward(const torch::Tensor& z) {
    const std::vector<std::int64_t> size{z.size(2) * arch_.upsample, z.size(3) * arch_.upsample};
    return F::interpolate(classifier_(z), F::InterpolateFuncOptions().size(size).mode(torch::kBilinear).align_corners(false));
}

torch::Tensor seg_forward(SegHead& head, const FeatureMap& z) {
    if (z.tag != FeatureTag::inv) throw ContractError("task head only consumes domainness-invariant features");
    if (z.values.dim() != 4 || z.channels() != head->arch().channels)
        throw ShapeError("task head expects " + std::to_string(head->arch().channels) + " feature channels");
    return head->forward(z.values);
}

torch::Tensor loss_task(const torch::Tensor& logits, const torch::Tensor& mask) {
    if (logits.dim() != 4 || mask.dim() != 3 || logits.size(0) != mask.size(0) ||
        logits.size(2) != mask.size(1) || logits.size(3) != mask.size(2))
        throw ShapeError("segmentation logits and mask shapes do not align");
    const auto target = mask.to(torch::kInt64);
    const auto K = logits.size(1);
    const auto valid = target != kIgnoreLabel;
    if ((target.masked_select(valid) >= K).any().item<bool>() || (target < 0).any().item<bool>())
        throw DataError("mask contains a class index >= K");
    if (!valid.any().item<bool>()) return logits.sum() * 0.0;
    return F::cross_entropy(logits, target, F::CrossEntropyFuncOptions().ignore_index(kIgnoreLabel));
}

} // namespace sad
