#pragma once

#include "sad/config.hpp"
#include "sad/dataset.hpp"

#include <string>
#include <vector>

namespace sad {

/// A benchmark plus the base training recipe used on it.
struct Preset {
    std::string name;
    std::string description;
    SplitConfig data;
    TrainerConfig train; // dataset paths and out_dir are filled in by the runner
};

/// Known presets:
///   fog-small        tiny smoke-test grid (seconds)
///   fog-desk         single unseen fog value, full-size benchmark
///   fog-desk-multi   target mixes three unseen fog values
Preset make_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Ablation variants applied on top of a preset's base recipe:
///   baseline        adversarial alignment only (no creator, no regularizer)
///   dc              + domainness creator
///   dc_sar          + creator + regularizer
///   dc_sar_no_spf   dc_sar with lambda_spf = 0
TrainerConfig make_variant(const TrainerConfig& base, const std::string& variant);
std::vector<std::string> variant_names();

} // namespace sad
