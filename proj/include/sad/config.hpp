#pragma once

#include "sad/adam.hpp"
#include "sad/dataset.hpp"
#include "sad/discriminator.hpp"
#include "sad/domainness.hpp"
#include "sad/encoder.hpp"
#include "sad/sar.hpp"
#include "sad/taskhead.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace sad {

/// How the two opposing regularizer losses reach the parameters.
///
/// split_heads_shared: loss_spf trains the head and E_spf; loss_inv reaches
/// E_inv only (the head's weights are detached on the inv branch).
/// both_into_sar: both losses update the head.
enum class SarWiring { split_heads_shared, both_into_sar };

enum class Precision { f32, f64 };

std::string_view to_string(SarWiring w) noexcept;
SarWiring parse_sar_wiring(std::string_view s);

struct TrainerConfig {
    // data
    std::string source_manifest;
    std::string target_manifest;
    std::string val_manifest; // optional; enables periodic evaluation

    // model
    EncoderArch encoder;
    int num_classes = 6;
    int sar_hidden = 256;
    int sar_pool = 4;
    int disc_hidden = 64;
    DcConfig dc;

    // components
    bool use_dc = true;
    bool use_sar = true;
    bool use_adv = true;
    bool use_task = true;
    SarWiring sar_wiring = SarWiring::split_heads_shared;

    // total = task + lambda_adv * adv + lambda_inv * inv + lambda_spf * spf
    double lambda_adv = 0.001;
    double lambda_spf = 0.1;
    double lambda_inv = 1.0;

    // optimisation
    int batch_size = 8;
    std::int64_t steps = 20000;
    double lr = 2.5e-4;
    double poly_power = 0.9;
    AdamOptions adam;
    std::uint64_t seed = 0;
    Precision precision = Precision::f32;

    // bookkeeping
    std::int64_t log_interval = 50;
    std::int64_t eval_interval = 0;       // 0: evaluate only at the end
    std::int64_t checkpoint_interval = 0; // 0: checkpoint only at the end
    int eval_batch = 16;
    std::string out_dir;

    SarArch sar_arch() const;
    DiscriminatorArch disc_arch() const;
    TaskHeadArch head_arch() const;
    torch::Dtype dtype() const { return precision == Precision::f64 ? torch::kFloat64 : torch::kFloat32; }

    void validate() const;
    nlohmann::json to_json() const;
    static TrainerConfig from_json(const nlohmann::json& j);
};

nlohmann::json dc_to_json(const DcConfig& dc);
DcConfig dc_from_json(const nlohmann::json& j);

/// Parse a config file. Relative dataset paths are resolved against
/// $SAD_DATA_ROOT when it is set, otherwise against the file's directory.
TrainerConfig load_trainer_config(const std::filesystem::path& path);

nlohmann::json split_config_to_json(const SplitConfig& cfg);
SplitConfig split_config_from_json(const nlohmann::json& j);
/// Read a data-generation config file (missing file: ConfigError).
SplitConfig load_split_config(const std::filesystem::path& path);

/// A relative path that does not exist under the working directory is looked
/// up under $SAD_DATA_ROOT when that is set.
std::filesystem::path resolve_data_path(const std::filesystem::path& p);

/// Hex FNV-1a digest of a JSON value's canonical dump.
std::string config_hash(const nlohmann::json& j);

} // namespace sad
