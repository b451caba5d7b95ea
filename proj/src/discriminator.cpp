#include "sad/discriminator.hpp"

#include "sad/error.hpp"

namespace sad {

DiscriminatorArch DiscriminatorArch::from_json(const nlohmann::json& j) {
    DiscriminatorArch a;
    a.channels = j.value("channels", a.channels);
    a.hidden = j.value("hidden", a.hidden);
    return a;
}

DiscriminatorImpl::DiscriminatorImpl(DiscriminatorArch arch) : arch_(arch) {
    if (arch_.channels <= 0 || arch_.hidden <= 0) throw ConfigError("discriminator sizes must be positive");
    conv1_ = register_module("conv1",
                             torch::nn::Conv2d(torch::nn::Conv2dOptions(arch_.channels, arch_.hidden, 3).padding(1)));
    conv2_ = register_module("conv2", torch::nn::Conv2d(torch::nn::Conv2dOptions(arch_.hidden, 1, 3).padding(1)));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& z) {
    auto x = torch::leaky_relu(conv1_(z), 0.2);
    return conv2_(x).mean({1, 2, 3});
}

torch::Tensor disc_forward(Discriminator& disc, const FeatureMap& z) {
    if (z.tag != FeatureTag::inv)
        throw ContractError("discriminator only consumes domainness-invariant features");
    if (z.values.dim() != 4 || z.channels() != disc->arch().channels)
        throw ShapeError("discriminator expects " + std::to_string(disc->arch().channels) + " feature channels");
    return torch::sigmoid(disc->forward(z.values));
}

AdvLoss loss_adv(const torch::Tensor& p_src, const torch::Tensor& p_tgt) {
    constexpr double lo = kAdvEpsilon, hi = 1.0 - kAdvEpsilon;
    AdvLoss out;
    {
        torch::NoGradGuard no_grad;
        out.clamped = ((p_src < lo) | (p_src > hi)).sum().item<std::int64_t>() +
                      ((p_tgt < lo) | (p_tgt > hi)).sum().item<std::int64_t>();
    }
    const auto ps = p_src.clamp(lo, hi);
    const auto pt = p_tgt.clamp(lo, hi);
    out.loss = -torch::log(ps).mean() - torch::log1p(-pt).mean();
    return out;
}

} // namespace sad
