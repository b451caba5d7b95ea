#pragma once

#include "sad/dataset.hpp"
#include "sad/encoder.hpp"
#include "sad/metrics.hpp"
#include "sad/taskhead.hpp"

#include "json.hpp"

#include <map>
#include <optional>
#include <vector>

namespace sad {

/// Stack sample images into a [B, 3, H, W] tensor of `dtype`.
torch::Tensor stack_images(const std::vector<SceneSample>& samples, torch::Dtype dtype);
/// Stack masks into [B, H, W] int64.
torch::Tensor stack_masks(const std::vector<SceneSample>& samples);

/// Argmax class map [B, H, W] (int64) from the invariant encoder and task head.
/// The caller controls train/eval mode; gradients are disabled here.
torch::Tensor predict_masks(Encoder& encoder, SegHead& head, const torch::Tensor& images);

struct SegReport {
    MiouResult overall;
    std::int64_t n_samples = 0;
    std::map<int, double> per_bin_miou;           // by domainness bin, when samples carry one
    std::map<int, std::int64_t> per_bin_count;
    std::optional<double> intra_gap;              // set when at least two bins are present

    nlohmann::json to_json() const;
};

/// mIoU over `samples` with the modules in eval mode (restored afterwards).
SegReport evaluate_segmentation(Encoder& encoder, SegHead& head, const std::vector<SceneSample>& samples,
                                int num_classes, int batch_size = 16);

struct ProbeSet {
    torch::Tensor features; // [S, C * pool * pool] float64
    torch::Tensor labels;   // [S] int64 bins
};

/// Push `samples` through the creator at stratified domainness values (sample
/// i lands in bin i mod N, uniformly within that bin) and pool the encoder's
/// output to a pool x pool grid. Modules run in eval mode.
ProbeSet collect_probe_features(Encoder& encoder, const std::vector<SceneSample>& samples, const DcConfig& dc,
                                int pool, std::uint64_t seed, int batch_size = 16);

} // namespace sad
