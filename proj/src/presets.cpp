#include "sad/presets.hpp"

#include "sad/error.hpp"

namespace sad {

namespace {

Preset desk_base() {
    Preset p;
    p.data.scene.height = 128;
    p.data.scene.width = 128;
    p.data.target_values = {0.06};
    p.data.train_lo = 0.0;
    p.data.train_hi = 0.04;
    p.data.source_size = 2000;
    p.data.target_size = 500;
    p.data.target_val_size = 200;

    TrainerConfig& t = p.train;
    t.encoder.height = 128;
    t.encoder.width = 128;
    t.encoder.widths = {16, 32, 32, 32};
    t.dc.lo = 0.0;
    t.dc.hi = 0.04;
    t.batch_size = 8;
    t.steps = 6000;
    t.lr = 1e-3;
    t.log_interval = 50;
    t.eval_batch = 25;
    return p;
}

} // namespace

Preset make_preset(const std::string& name) {
    if (name == "fog-small") {
        Preset p;
        p.name = name;
        p.description = "tiny smoke-test grid: 32x32 scenes, 48/24/16 samples, 20 steps";
        p.data.scene.height = 32;
        p.data.scene.width = 32;
        p.data.source_size = 48;
        p.data.target_size = 24;
        p.data.target_val_size = 16;
        p.data.target_values = {0.05, 0.08};
        TrainerConfig& t = p.train;
        t.encoder.height = 32;
        t.encoder.width = 32;
        t.encoder.widths = {8, 16, 16, 16};
        t.sar_hidden = 32;
        t.disc_hidden = 16;
        t.batch_size = 4;
        t.steps = 20;
        t.log_interval = 5;
        t.eval_batch = 8;
        return p;
    }
    if (name == "fog-desk") {
        Preset p = desk_base();
        p.name = name;
        p.description = "fog benchmark: 128x128, 2000 source / 500 target at beta 0.06 / 200 target-val";
        return p;
    }
    if (name == "fog-desk-multi") {
        Preset p = desk_base();
        p.name = name;
        p.description = "fog benchmark with a mixed target at beta 0.05, 0.08, 0.12";
        p.data.target_values = {0.05, 0.08, 0.12};
        p.data.target_val_size = 300;
        return p;
    }
    throw ConfigError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"fog-small", "fog-desk", "fog-desk-multi"}; }

TrainerConfig make_variant(const TrainerConfig& base, const std::string& variant) {
    TrainerConfig c = base;
    c.use_adv = true;
    c.use_task = true;
    if (variant == "baseline") {
        c.use_dc = false;
        c.use_sar = false;
    } else if (variant == "dc") {
        c.use_dc = true;
        c.use_sar = false;
    } else if (variant == "dc_sar") {
        c.use_dc = true;
        c.use_sar = true;
    } else if (variant == "dc_sar_no_spf") {
        c.use_dc = true;
        c.use_sar = true;
        c.lambda_spf = 0.0;
    } else {
        throw ConfigError("unknown ablation variant '" + variant + "'");
    }
    return c;
}

std::vector<std::string> variant_names() { return {"baseline", "dc", "dc_sar", "dc_sar_no_spf"}; }

} // namespace sad
