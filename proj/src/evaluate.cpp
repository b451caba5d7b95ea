#include "sad/evaluate.hpp"

#include "sad/error.hpp"
#include "sad/sar.hpp"

#include <algorithm>
#include <cmath>

namespace sad {
namespace {

struct EvalModeGuard {
    std::vector<std::pair<torch::nn::Module*, bool>> saved;

    explicit EvalModeGuard(std::initializer_list<torch::nn::Module*> modules) {
        for (auto* m : modules) {
            saved.emplace_back(m, m->is_training());
            m->eval();
        }
    }
    ~EvalModeGuard() {
        for (auto& [m, was] : saved) m->train(was);
    }
};

torch::Dtype param_dtype(const torch::nn::Module& m) {
    const auto ps = m.parameters();
    return ps.empty() ? torch::kFloat32 : ps.front().scalar_type();
}

} // namespace

torch::Tensor stack_images(const std::vector<SceneSample>& samples, torch::Dtype dtype) {
    if (samples.empty()) throw DomainError("empty batch");
    std::vector<torch::Tensor> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.image);
    return torch::stack(xs).to(dtype);
}

torch::Tensor stack_masks(const std::vector<SceneSample>& samples) {
    if (samples.empty()) throw DomainError("empty batch");
    std::vector<torch::Tensor> ms;
    ms.reserve(samples.size());
    for (const auto& s : samples) ms.push_back(s.mask);
    return torch::stack(ms).to(torch::kInt64);
}

torch::Tensor predict_masks(Encoder& encoder, SegHead& head, const torch::Tensor& images) {
    torch::NoGradGuard no_grad;
    const auto z = encode(encoder, images, FeatureTag::inv);
    return seg_forward(head, z).argmax(1);
}

nlohmann::json SegReport::to_json() const {
    nlohmann::json per_class = nlohmann::json::array();
    for (double v : overall.per_class) per_class.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& [b, v] : per_bin_miou) bins.push_back({{"bin", b}, {"miou", v}, {"count", per_bin_count.at(b)}});
    nlohmann::json j{{"miou", overall.mean}, {"per_class_iou", per_class}, {"n_samples", n_samples}, {"per_bin", bins}};
    j["intra_gap"] = intra_gap ? nlohmann::json(*intra_gap) : nlohmann::json(nullptr);
    return j;
}

SegReport evaluate_segmentation(Encoder& encoder, SegHead& head, const std::vector<SceneSample>& samples,
                                int num_classes, int batch_size) {
    if (samples.empty()) throw DomainError("evaluation set is empty");
    EvalModeGuard guard{encoder.get(), head.get()};
    const auto dtype = param_dtype(*encoder);

    ConfusionMatrix all(num_classes);
    std::map<int, ConfusionMatrix> by_bin;
    SegReport r;
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
        const std::size_t end = std::min(samples.size(), start + static_cast<std::size_t>(batch_size));
        const std::vector<SceneSample> batch(samples.begin() + start, samples.begin() + end);
        const auto pred = predict_masks(encoder, head, stack_images(batch, dtype));
        const auto gt = stack_masks(batch);
        all.add(pred, gt);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto& d = batch[i].meta.domainness;
            if (!d) continue;
            auto it = by_bin.try_emplace(d->bin, num_classes).first;
            it->second.add(pred[i], gt[i]);
            ++r.per_bin_count[d->bin];
        }
    }
    r.overall = miou(all);
    r.n_samples = static_cast<std::int64_t>(samples.size());
    for (const auto& [b, cm] : by_bin)
        if (cm.total() > 0) r.per_bin_miou[b] = miou(cm).mean;
    if (r.per_bin_miou.size() >= 2) r.intra_gap = sad::intra_gap(r.per_bin_miou);
    return r;
}

ProbeSet collect_probe_features(Encoder& encoder, const std::vector<SceneSample>& samples, const DcConfig& dc,
                                int pool, std::uint64_t seed, int batch_size) {
    dc.validate();
    if (samples.empty()) throw DomainError("probe set is empty");
    EvalModeGuard guard{encoder.get()};
    const auto dtype = param_dtype(*encoder);
    Rng rng = Rng::stream(seed, 12);
    const double width = (dc.hi - dc.lo) / dc.n_bins;

    std::vector<torch::Tensor> feats;
    std::vector<std::int64_t> labels;
    std::vector<SceneSample> batch;
    torch::NoGradGuard no_grad;
    auto flush = [&] {
        if (batch.empty()) return;
        const auto z = encoder->forward(stack_images(batch, dtype));
        feats.push_back(pool_features(z, pool, pool).to(torch::kFloat64));
        batch.clear();
    };
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int bin = static_cast<int>(i % dc.n_bins);
        // Draw from the interior of the bin.
        const double lo = dc.lo + width * bin, hi = lo + width;
        const double value = lo + (hi - lo) * (0.02 + 0.96 * rng.uniform());
        auto [div, spec] = diversify_at(samples[i], value, dc);
        labels.push_back(spec.bin);
        batch.push_back(std::move(div));
        if (static_cast<int>(batch.size()) == batch_size) flush();
    }
    flush();
    return {torch::cat(feats), torch::tensor(labels, torch::kInt64)};
}

} // namespace sad
