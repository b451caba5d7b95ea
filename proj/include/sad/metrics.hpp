#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <map>
#include <vector>

namespace sad {

/// K x K confusion counts (rows = ground truth, cols = prediction);
/// pixels labelled 255 in the ground truth are skipped.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void add(const torch::Tensor& pred, const torch::Tensor& gt);
    std::int64_t total() const;
    int num_classes() const { return k_; }
    const std::vector<std::int64_t>& counts() const { return counts_; }

private:
    int k_;
    std::vector<std::int64_t> counts_;
};

struct MiouResult {
    std::vector<double> per_class; // NaN where a class is absent from both pred and gt
    double mean = 0.0;
};

MiouResult miou(const ConfusionMatrix& cm);
/// Convenience wrapper: preds and gts share a shape; any integer dtype.
MiouResult miou(const torch::Tensor& preds, const torch::Tensor& gts, int num_classes);

/// max - min over per-bin scores; needs at least two bins.
double intra_gap(const std::map<int, double>& per_bin);

struct ProbeOptions {
    double l2 = 1e-3;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    int max_iter = 200;
};

struct ProbeResult {
    double accuracy = 0.0;
    std::int64_t n_train = 0;
    std::int64_t n_test = 0;
};

/// Linear N-way probe on frozen features ([S, D]) with integer labels ([S]).
/// Features are standardised with train-split statistics; the split is
/// stratified per label.
ProbeResult probe_domainness(const torch::Tensor& features, const torch::Tensor& labels, int n_bins,
                             const ProbeOptions& opts = {});

} // namespace sad
