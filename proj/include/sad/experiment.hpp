#pragma once

#include "sad/presets.hpp"
#include "sad/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sad {

struct DataPaths {
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path target_val;
};

/// Render the benchmark under `dir` unless an identical one is already there
/// (same `data_config.json`, all manifests present).
DataPaths ensure_data(const SplitConfig& cfg, const std::filesystem::path& dir);

struct ProbeReport {
    double spf = 0.0;
    double inv = 0.0;
    std::int64_t n_train = 0;
    std::int64_t n_test = 0;

    nlohmann::json to_json() const;
};

/// Linear domainness probes on both encoders over `samples` pushed through
/// the creator at stratified values.
ProbeReport probe_encoders(Networks& nets, const TrainerConfig& cfg, const std::vector<SceneSample>& samples,
                           std::uint64_t seed);

struct RunReport {
    std::string variant;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::filesystem::path run_dir;
    SegReport eval;
    ProbeReport probe;

    nlohmann::json to_json() const;
};

struct RunRequest {
    TrainerConfig config; // fully resolved: data paths, seed, out_dir
    std::string variant;
    std::int64_t probe_samples = 400;
};

/// Train, evaluate on the validation split and probe on the source split.
/// Writes `report.json` in the run directory. A run directory that already
/// holds a report for the same config hash is reused.
RunReport run_experiment(const RunRequest& req);

/// Base config of `preset` wired to `data`, with the variant, seed and
/// output directory applied.
TrainerConfig experiment_config(const Preset& preset, const DataPaths& data, const std::string& variant,
                                std::uint64_t seed, const std::filesystem::path& out_dir);

} // namespace sad
