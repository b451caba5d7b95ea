#include "sad/sar.hpp"

#include "sad/error.hpp"

#include <cmath>

namespace sad {

namespace F = torch::nn::functional;

void SarArch::validate() const {
    if (channels <= 0 || pooled_h <= 0 || pooled_w <= 0 || hidden <= 0)
        throw ConfigError("regularizer head sizes must be positive");
    if (n_bins < 2) throw ConfigError("regularizer head needs at least 2 bins");
}

nlohmann::json SarArch::to_json() const {
    return {{"channels", channels}, {"pooled", {pooled_h, pooled_w}}, {"hidden", hidden}, {"n_bins", n_bins}};
}

SarArch SarArch::from_json(const nlohmann::json& j) {
    SarArch a;
    a.channels = j.value("channels", a.channels);
    if (j.contains("pooled")) {
        a.pooled_h = j["pooled"].at(0).get<int>();
        a.pooled_w = j["pooled"].at(1).get<int>();
    }
    a.hidden = j.value("hidden", a.hidden);
    a.n_bins = j.value("n_bins", a.n_bins);
    return a;
}

DomainnessPrediction DomainnessPrediction::from_logits(torch::Tensor logits) {
    DomainnessPrediction p;
    p.probs = torch::softmax(logits, 1);
    p.logits = std::move(logits);
    return p;
}

SarHeadImpl::SarHeadImpl(SarArch arch) : arch_(arch) {
    arch_.validate();
    const int in = arch_.channels * arch_.pooled_h * arch_.pooled_w;
    fc1_ = register_module("fc1", torch::nn::Linear(in, arch_.hidden));
    fc2_ = register_module("fc2", torch::nn::Linear(arch_.hidden, arch_.n_bins));
}

torch::Tensor SarHeadImpl::forward(const torch::Tensor& z, bool frozen_params) {
    auto x = pool_features(z, arch_.pooled_h, arch_.pooled_w);
    if (!frozen_params) return fc2_(torch::relu(fc1_(x)));
    x = F::linear(x, fc1_->weight.detach(), fc1_->bias.detach());
    return F::linear(torch::relu(x), fc2_->weight.detach(), fc2_->bias.detach());
}

torch::Tensor pool_features(const torch::Tensor& z, int pooled_h, int pooled_w) {
    return F::adaptive_avg_pool2d(z, F::AdaptiveAvgPool2dFuncOptions({pooled_h, pooled_w})).flatten(1);
}

DomainnessPrediction sar_forward(SarHead& head, const FeatureMap& z, bool frozen_params) {
    if (z.values.dim() != 4 || z.channels() != head->arch().channels)
        throw ShapeError("regularizer head expects " + std::to_string(head->arch().channels) +
                         " feature channels");
    return DomainnessPrediction::from_logits(head->forward(z.values, frozen_params));
}

torch::Tensor loss_spf(const DomainnessPrediction& pred, const torch::Tensor& bins) {
    if (bins.dim() != 1 || bins.size(0) != pred.logits.size(0))
        throw ShapeError("domainness labels must be one per batch element");
    const auto n = pred.n_bins();
    if (bins.numel() > 0 && (bins.min().item<std::int64_t>() < 0 || bins.max().item<std::int64_t>() >= n))
        throw ShapeError("domainness label outside the predicted bin range");
    const auto onehot = F::one_hot(bins.to(torch::kInt64), n).to(pred.logits.dtype());
    return -(onehot * torch::log_softmax(pred.logits, 1)).sum(1).mean();
}

torch::Tensor loss_spf(const DomainnessPrediction& pred, const std::vector<DomainnessSpec>& labels) {
    std::vector<std::int64_t> bins;
    bins.reserve(labels.size());
    for (const auto& l : labels) {
        if (l.n_bins != pred.n_bins()) throw ShapeError("domainness label and prediction disagree on N");
        bins.push_back(l.bin);
    }
    return loss_spf(pred, torch::tensor(bins, torch::kInt64));
}

torch::Tensor loss_inv(const DomainnessPrediction& pred) {
    const double log_n = std::log(static_cast<double>(pred.n_bins()));
    const auto log_q = torch::log_softmax(pred.logits, 1);
    return (log_q.exp() * (log_q + log_n)).sum(1).mean();
}

} // namespace sad
