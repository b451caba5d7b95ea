#pragma once

#include "sad/domainness.hpp"
#include "sad/scene.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sad {

enum class DomainTag { source, source_diversified, target };

std::string_view to_string(DomainTag tag) noexcept;
DomainTag parse_domain_tag(std::string_view name);

/// Depth PNGs store round(depth_m * kDepthScale) as 16-bit gray.
inline constexpr double kDepthScale = 256.0;

struct SampleRecord {
    std::string id;
    std::uint64_t seed = 0;
    std::optional<double> value; // domainness applied to this sample, if any
    std::optional<int> bin;
};

struct DomainnessBin {
    int bin = 0;
    double value = 0.0;
    std::int64_t count = 0;
};

/// Contents of `<root>/<split>/manifest.json`.
struct DatasetManifest {
    std::filesystem::path root; // directory holding the manifest and the PNG triplets
    std::string split;
    std::int64_t sample_count = 0;
    int num_classes = 6;
    int height = 0;
    int width = 0;
    DomainTag domain = DomainTag::source;
    std::optional<Dimension> dimension;
    std::vector<DomainnessBin> bins;
    std::vector<SampleRecord> samples;
};

void write_manifest(const DatasetManifest& manifest);
/// Reads and validates a manifest; `path` may name the file or its directory.
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Quantise and store one PNG triplet under `dir`.
void write_sample(const std::filesystem::path& dir, const std::string& id, const SceneSample& sample);
SceneSample read_sample(const std::filesystem::path& dir, const std::string& id);

struct Dataset {
    DatasetManifest manifest;
    std::vector<SceneSample> samples;
};

/// Load every sample listed in a manifest, checking sizes and class range.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Benchmark layout: clear source scenes plus a target domain rendered at
/// domainness values the creator never samples during training.
struct SplitConfig {
    SceneGenConfig scene;
    Dimension dimension = Dimension::fog;
    std::vector<double> target_values{0.06};
    double train_lo = 0.0; // domainness creator sampling range used in training
    double train_hi = 0.04;
    int n_bins = 4;
    bool strict_unseen = true;
    std::int64_t source_size = 2000;
    std::int64_t target_size = 500;
    std::int64_t target_val_size = 200;
    std::uint64_t seed = 0;
    std::array<double, 3> atmospheric_light{0.9, 0.9, 0.9};
    bool resize_after_crop = true;

    void validate() const;
    DcConfig dc_config() const;
};

struct SplitManifests {
    DatasetManifest source;
    DatasetManifest target;
    DatasetManifest target_val;
};

/// Seed of sample `index` in split `split_index` (0 source, 1 target, 2 target-val).
std::uint64_t split_seed(std::uint64_t base, int split_index, std::int64_t index);

/// Render all three splits under `out` (`source/`, `target/`, `target_val/`).
SplitManifests build_splits(const SplitConfig& cfg, const std::filesystem::path& out);

} // namespace sad
