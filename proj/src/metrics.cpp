#include "sad/metrics.hpp"

#include "sad/error.hpp"
#include "sad/rng.hpp"
#include "sad/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sad {

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes), counts_(std::size_t(num_classes) * num_classes, 0) {
    if (num_classes < 1) throw DomainError("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(const torch::Tensor& pred, const torch::Tensor& gt) {
    if (pred.sizes() != gt.sizes()) throw ShapeError("prediction and ground-truth shapes differ");
    const auto p = pred.to(torch::kInt64).reshape(-1);
    const auto g = gt.to(torch::kInt64).reshape(-1);
    const auto valid = g != kIgnoreLabel;
    const auto pv = p.masked_select(valid);
    const auto gv = g.masked_select(valid);
    if (gv.numel() == 0) return;
    if (gv.min().item<std::int64_t>() < 0 || gv.max().item<std::int64_t>() >= k_ ||
        pv.min().item<std::int64_t>() < 0 || pv.max().item<std::int64_t>() >= k_)
        throw DataError("class index outside [0, K)");
    const auto flat = torch::bincount(gv * k_ + pv, /*weights=*/{}, k_ * k_);
    const auto* c = flat.data_ptr<std::int64_t>();
    for (int i = 0; i < k_ * k_; ++i) counts_[i] += c[i];
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t n = 0;
    for (auto c : counts_) n += c;
    return n;
}

MiouResult miou(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DomainError("mIoU of an empty evaluation set");
    const int K = cm.num_classes();
    const auto& c = cm.counts();
    MiouResult r;
    r.per_class.assign(K, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    int present = 0;
    for (int k = 0; k < K; ++k) {
        std::int64_t tp = c[k * K + k], fp = 0, fn = 0;
        for (int j = 0; j < K; ++j) {
            if (j == k) continue;
            fn += c[k * K + j];
            fp += c[j * K + k];
        }
        const std::int64_t denom = tp + fp + fn;
        if (denom == 0) continue;
        r.per_class[k] = double(tp) / double(denom);
        sum += r.per_class[k];
        ++present;
    }
    r.mean = sum / present;
    return r;
}

MiouResult miou(const torch::Tensor& preds, const torch::Tensor& gts, int num_classes) {
    if (preds.numel() == 0) throw DomainError("mIoU of an empty evaluation set");
    ConfusionMatrix cm(num_classes);
    cm.add(preds, gts);
    return miou(cm);
}

double intra_gap(const std::map<int, double>& per_bin) {
    if (per_bin.size() < 2) throw DomainError("intra-domain gap needs at least two domainness bins");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [bin, v] : per_bin) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

ProbeResult probe_domainness(const torch::Tensor& features, const torch::Tensor& labels, int n_bins,
                             const ProbeOptions& opts) {
    if (features.dim() != 2 || labels.dim() != 1 || features.size(0) != labels.size(0))
        throw ShapeError("probe expects [S, D] features and [S] labels");
    const auto y_all = labels.to(torch::kInt64);
    if (y_all.min().item<std::int64_t>() < 0 || y_all.max().item<std::int64_t>() >= n_bins)
        throw DataError("probe label outside [0, N)");

    // Stratified split, shuffled per bin with the probe seed.
    Rng rng = Rng::stream(opts.seed, 7);
    std::vector<std::int64_t> train_idx, test_idx;
    int populated = 0;
    for (int b = 0; b < n_bins; ++b) {
        std::vector<std::int64_t> idx;
        const auto* y = y_all.data_ptr<std::int64_t>();
        for (std::int64_t i = 0; i < y_all.numel(); ++i)
            if (y[i] == b) idx.push_back(i);
        if (idx.empty()) continue;
        if (idx.size() < 10) throw DataError("probe needs at least 10 samples per populated bin");
        ++populated;
        for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
        const auto n_train = static_cast<std::size_t>(std::llround(opts.train_fraction * idx.size()));
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + n_train);
        test_idx.insert(test_idx.end(), idx.begin() + n_train, idx.end());
    }
    if (populated < 2) throw DataError("probe needs samples from at least two bins");

    const auto X = features.to(torch::kFloat64);
    const auto tr = torch::tensor(train_idx, torch::kInt64);
    const auto te = torch::tensor(test_idx, torch::kInt64);
    auto x_train = X.index_select(0, tr);
    auto x_test = X.index_select(0, te);
    const auto y_train = y_all.index_select(0, tr);
    const auto y_test = y_all.index_select(0, te);

    const auto mean = x_train.mean(0, true);
    auto scale = x_train.std(0, /*unbiased=*/false, true);
    scale = torch::where(scale > 1e-12, scale, torch::ones_like(scale));
    x_train = (x_train - mean) / scale;
    x_test = (x_test - mean) / scale;

    const auto D = X.size(1);
    auto W = torch::zeros({D, n_bins}, torch::kFloat64).requires_grad_(true);
    auto b = torch::zeros({n_bins}, torch::kFloat64).requires_grad_(true);
    torch::optim::LBFGS opt({W, b}, torch::optim::LBFGSOptions(1.0)
                                        .max_iter(opts.max_iter)
                                        .tolerance_grad(1e-9)
                                        .tolerance_change(1e-12)
                                        .line_search_fn("strong_wolfe"));
    auto closure = [&] {
        opt.zero_grad();
        auto loss = torch::nn::functional::cross_entropy(torch::addmm(b, x_train, W), y_train) +
                    opts.l2 * W.pow(2).sum();
        loss.backward();
        return loss;
    };
    opt.step(closure);

    torch::NoGradGuard no_grad;
    const auto pred = torch::addmm(b, x_test, W).argmax(1);
    ProbeResult r;
    r.n_train = static_cast<std::int64_t>(train_idx.size());
    r.n_test = static_cast<std::int64_t>(test_idx.size());
    r.accuracy = pred.eq(y_test).to(torch::kFloat64).mean().item<double>();
    return r;
}

} // namespace sad
