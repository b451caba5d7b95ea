#pragma once

#include "sad/adam.hpp"
#include "sad/config.hpp"
#include "sad/dataset.hpp"
#include "sad/evaluate.hpp"
#include "sad/networks.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace sad {

/// Scalar losses of one step. Disabled terms report 0.
struct LossBundle {
    double task = 0.0;
    double adv = 0.0;
    double inv = 0.0;
    double spf = 0.0;
    double total = 0.0; // task + lambda_adv * adv + lambda_inv * inv + lambda_spf * spf

    nlohmann::json to_json() const;
    bool operator==(const LossBundle&) const = default;
};

struct StepDiagnostics {
    double sar_accuracy = 0.0;     // regularizer head on z_spf against d_gt
    double sar_inv_accuracy = 0.0; // same head on z_inv
    double disc_accuracy = 0.0;
    std::int64_t adv_clamped = 0;
    double lr = 0.0;
};

struct StepResult {
    LossBundle losses;
    StepDiagnostics diag;
};

class Trainer {
public:
    explicit Trainer(TrainerConfig cfg);

    /// One joint update on a labelled source batch and an unlabelled target
    /// batch. Source images are diversified online when the creator is on.
    StepResult train_step(const std::vector<SceneSample>& src, const std::vector<SceneSample>& tgt);

    /// Polynomial decay: lr * (1 - step / steps)^power.
    double lr_at(std::int64_t step) const;

    /// Draw a batch of indices into a pool of `n` samples (with replacement).
    std::vector<std::size_t> sample_indices(std::size_t n);

    std::int64_t step() const { return step_; }
    const TrainerConfig& config() const { return cfg_; }
    Networks& nets() { return nets_; }

    void save_checkpoint(const std::filesystem::path& path) const;
    void load_checkpoint(const std::filesystem::path& path);

private:
    TrainerConfig cfg_;
    Networks nets_;
    Adam adam_;
    Rng dc_rng_;
    Rng sampler_rng_;
    std::int64_t step_ = 0;
};

struct TrainResult {
    std::filesystem::path checkpoint;
    LossBundle last;
    std::optional<SegReport> eval;
};

/// Full run: loads the datasets, writes `config.json`, streams
/// `metrics.jsonl`, evaluates on the validation split and writes
/// `checkpoint.sad` under `cfg.out_dir`. With `resume`, training continues
/// from that checkpoint.
TrainResult train(const TrainerConfig& cfg, const std::optional<std::filesystem::path>& resume = std::nullopt);

/// Keep only the inference path (invariant encoder + task head) of a checkpoint.
/// Returns the number of exported parameters.
std::int64_t export_inference(const std::filesystem::path& checkpoint, const std::filesystem::path& out);

struct InferenceModel {
    Encoder encoder{nullptr};
    SegHead head{nullptr};

    torch::Tensor predict(const torch::Tensor& images);
    std::int64_t parameter_count() const;
};

/// Accepts an exported bundle or a full training checkpoint.
InferenceModel load_inference(const std::filesystem::path& path);

/// Rebuild the full module set of a training checkpoint (eval mode).
std::pair<TrainerConfig, Networks> load_networks(const std::filesystem::path& checkpoint);

} // namespace sad
