#include "sad/config.hpp"

#include "sad/error.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_keys(const json& j, const char* section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string("config section '") + section + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError(std::string("unknown key '") + k + "' in config section '" + section + "'");
}

json section(const json& j, const char* name) { return j.contains(name) ? j.at(name) : json::object(); }

} // namespace

std::string_view to_string(SarWiring w) noexcept {
    return w == SarWiring::split_heads_shared ? "split-heads-shared" : "both-into-sar";
}

SarWiring parse_sar_wiring(std::string_view s) {
    if (s == "split-heads-shared") return SarWiring::split_heads_shared;
    if (s == "both-into-sar") return SarWiring::both_into_sar;
    throw ConfigError("unknown sar wiring '" + std::string(s) + "'");
}

SarArch TrainerConfig::sar_arch() const {
    return {encoder.out_channels(), sar_pool, sar_pool, sar_hidden, dc.n_bins};
}

DiscriminatorArch TrainerConfig::disc_arch() const { return {encoder.out_channels(), disc_hidden}; }

TaskHeadArch TrainerConfig::head_arch() const { return {encoder.out_channels(), num_classes, encoder.downsample()}; }

void TrainerConfig::validate() const {
    encoder.validate();
    dc.validate();
    sar_arch().validate();
    if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
    if (disc_hidden <= 0) throw ConfigError("disc_hidden must be positive");
    if (lambda_adv < 0.0 || lambda_spf < 0.0 || lambda_inv < 0.0) throw ConfigError("loss weights must be >= 0");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (batch_size < 1 || eval_batch < 1) throw ConfigError("batch sizes must be >= 1");
    if (!(lr > 0.0) || poly_power < 0.0) throw ConfigError("invalid learning-rate schedule");
    if (log_interval < 1 || eval_interval < 0 || checkpoint_interval < 0)
        throw ConfigError("invalid logging/eval/checkpoint interval");
    if (use_sar && !use_dc) throw ConfigError("the regularizer needs generated domainness labels (enable dc)");
    if (dc.dimension == Dimension::fov && !dc.resize_after_crop)
        throw ConfigError("training batches need resize_after_crop for the fov dimension");
}

json dc_to_json(const DcConfig& dc) {
    return {{"dimension", std::string(to_string(dc.dimension))},
            {"range", {dc.lo, dc.hi}},
            {"n_bins", dc.n_bins},
            {"atmospheric_light", dc.atmospheric_light},
            {"native_fov_deg", dc.native_fov_deg},
            {"resize_after_crop", dc.resize_after_crop}};
}

DcConfig dc_from_json(const json& j) {
    require_keys(j, "dc", {"dimension", "range", "n_bins", "atmospheric_light", "native_fov_deg", "resize_after_crop"});
    DcConfig dc;
    if (j.contains("dimension")) dc.dimension = parse_dimension(j["dimension"].get<std::string>());
    if (j.contains("range")) {
        dc.lo = j["range"].at(0).get<double>();
        dc.hi = j["range"].at(1).get<double>();
    }
    dc.n_bins = j.value("n_bins", dc.n_bins);
    dc.atmospheric_light = j.value("atmospheric_light", dc.atmospheric_light);
    dc.native_fov_deg = j.value("native_fov_deg", dc.native_fov_deg);
    dc.resize_after_crop = j.value("resize_after_crop", dc.resize_after_crop);
    return dc;
}

json TrainerConfig::to_json() const {
    return {
        {"data", {{"source", source_manifest}, {"target", target_manifest}, {"val", val_manifest}}},
        {"model",
         {{"encoder", {{"widths", encoder.widths}, {"strides", encoder.strides}, {"input_size", {encoder.height, encoder.width}}}},
          {"num_classes", num_classes},
          {"sar_hidden", sar_hidden},
          {"sar_pool", sar_pool},
          {"disc_hidden", disc_hidden}}},
        {"dc", dc_to_json(dc)},
        {"components",
         {{"dc", use_dc}, {"sar", use_sar}, {"adv", use_adv}, {"task", use_task}, {"sar_wiring", std::string(to_string(sar_wiring))}}},
        {"loss", {{"lambda_adv", lambda_adv}, {"lambda_spf", lambda_spf}, {"lambda_inv", lambda_inv}}},
        {"optim",
         {{"batch_size", batch_size},
          {"steps", steps},
          {"lr", lr},
          {"poly_power", poly_power},
          {"beta1", adam.beta1},
          {"beta2", adam.beta2},
          {"eps", adam.eps}}},
        {"run",
         {{"seed", seed},
          {"precision", precision == Precision::f64 ? "f64" : "f32"},
          {"log_interval", log_interval},
          {"eval_interval", eval_interval},
          {"checkpoint_interval", checkpoint_interval},
          {"eval_batch", eval_batch},
          {"out_dir", out_dir}}},
    };
}

TrainerConfig TrainerConfig::from_json(const json& j) {
    TrainerConfig c;
    try {
        require_keys(j, "<root>", {"data", "model", "dc", "components", "loss", "optim", "run"});

        const json data = section(j, "data");
        require_keys(data, "data", {"source", "target", "val"});
        c.source_manifest = data.value("source", c.source_manifest);
        c.target_manifest = data.value("target", c.target_manifest);
        c.val_manifest = data.value("val", c.val_manifest);

        const json model = section(j, "model");
        require_keys(model, "model", {"encoder", "num_classes", "sar_hidden", "sar_pool", "disc_hidden"});
        if (model.contains("encoder")) {
            require_keys(model["encoder"], "model.encoder", {"widths", "strides", "input_size"});
            c.encoder = EncoderArch::from_json(model["encoder"]);
        }
        c.num_classes = model.value("num_classes", c.num_classes);
        c.sar_hidden = model.value("sar_hidden", c.sar_hidden);
        c.sar_pool = model.value("sar_pool", c.sar_pool);
        c.disc_hidden = model.value("disc_hidden", c.disc_hidden);

        if (j.contains("dc")) c.dc = dc_from_json(j["dc"]);

        const json comp = section(j, "components");
        require_keys(comp, "components", {"dc", "sar", "adv", "task", "sar_wiring"});
        c.use_dc = comp.value("dc", c.use_dc);
        c.use_sar = comp.value("sar", c.use_sar);
        c.use_adv = comp.value("adv", c.use_adv);
        c.use_task = comp.value("task", c.use_task);
        if (comp.contains("sar_wiring")) c.sar_wiring = parse_sar_wiring(comp["sar_wiring"].get<std::string>());

        const json loss = section(j, "loss");
        require_keys(loss, "loss", {"lambda_adv", "lambda_spf", "lambda_inv"});
        c.lambda_adv = loss.value("lambda_adv", c.lambda_adv);
        c.lambda_spf = loss.value("lambda_spf", c.lambda_spf);
        c.lambda_inv = loss.value("lambda_inv", c.lambda_inv);

        const json optim = section(j, "optim");
        require_keys(optim, "optim", {"batch_size", "steps", "lr", "poly_power", "beta1", "beta2", "eps"});
        c.batch_size = optim.value("batch_size", c.batch_size);
        c.steps = optim.value("steps", c.steps);
        c.lr = optim.value("lr", c.lr);
        c.poly_power = optim.value("poly_power", c.poly_power);
        c.adam.beta1 = optim.value("beta1", c.adam.beta1);
        c.adam.beta2 = optim.value("beta2", c.adam.beta2);
        c.adam.eps = optim.value("eps", c.adam.eps);

        const json run = section(j, "run");
        require_keys(run, "run", {"seed", "precision", "log_interval", "eval_interval", "checkpoint_interval", "eval_batch", "out_dir"});
        c.seed = run.value("seed", c.seed);
        const std::string prec = run.value("precision", std::string("f32"));
        if (prec == "f32") {
            c.precision = Precision::f32;
        } else if (prec == "f64") {
            c.precision = Precision::f64;
        } else {
            throw ConfigError("precision must be f32 or f64");
        }
        c.log_interval = run.value("log_interval", c.log_interval);
        c.eval_interval = run.value("eval_interval", c.eval_interval);
        c.checkpoint_interval = run.value("checkpoint_interval", c.checkpoint_interval);
        c.eval_batch = run.value("eval_batch", c.eval_batch);
        c.out_dir = run.value("out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.encoder.in_channels = 3;
    return c;
}

TrainerConfig load_trainer_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config not found: " + path.string());
    std::ifstream is(path);
    if (!is) throw ConfigError("config not readable: " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    TrainerConfig c = TrainerConfig::from_json(j);

    fs::path base = path.parent_path();
    if (const char* root = std::getenv("SAD_DATA_ROOT"); root && *root) base = root;
    auto resolve = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    resolve(c.source_manifest);
    resolve(c.target_manifest);
    resolve(c.val_manifest);
    c.validate();
    return c;
}

json split_config_to_json(const SplitConfig& c) {
    return {{"scene",
             {{"height", c.scene.height},
              {"width", c.scene.width},
              {"num_classes", c.scene.num_classes},
              {"shapes", {c.scene.min_shapes, c.scene.max_shapes}},
              {"depth_range", {c.scene.depth_min, c.scene.depth_max}},
              {"fov_x_deg", c.scene.fov_x_deg},
              {"noise_sigma", c.scene.noise_sigma}}},
            {"dimension", std::string(to_string(c.dimension))},
            {"target_values", c.target_values},
            {"train_range", {c.train_lo, c.train_hi}},
            {"n_bins", c.n_bins},
            {"strict_unseen", c.strict_unseen},
            {"sizes", {{"source", c.source_size}, {"target", c.target_size}, {"target_val", c.target_val_size}}},
            {"seed", c.seed},
            {"atmospheric_light", c.atmospheric_light},
            {"resize_after_crop", c.resize_after_crop}};
}

SplitConfig split_config_from_json(const json& j) {
    SplitConfig c;
    try {
        require_keys(j, "<root>", {"scene", "dimension", "target_values", "train_range", "n_bins", "strict_unseen",
                                   "sizes", "seed", "atmospheric_light", "resize_after_crop"});
        const json scene = section(j, "scene");
        require_keys(scene, "scene", {"height", "width", "num_classes", "shapes", "depth_range", "fov_x_deg", "noise_sigma"});
        c.scene.height = scene.value("height", c.scene.height);
        c.scene.width = scene.value("width", c.scene.width);
        c.scene.num_classes = scene.value("num_classes", c.scene.num_classes);
        if (scene.contains("shapes")) {
            c.scene.min_shapes = scene["shapes"].at(0).get<int>();
            c.scene.max_shapes = scene["shapes"].at(1).get<int>();
        }
        if (scene.contains("depth_range")) {
            c.scene.depth_min = scene["depth_range"].at(0).get<double>();
            c.scene.depth_max = scene["depth_range"].at(1).get<double>();
        }
        c.scene.fov_x_deg = scene.value("fov_x_deg", c.scene.fov_x_deg);
        c.scene.noise_sigma = scene.value("noise_sigma", c.scene.noise_sigma);
        if (j.contains("dimension")) c.dimension = parse_dimension(j["dimension"].get<std::string>());
        c.target_values = j.value("target_values", c.target_values);
        if (j.contains("train_range")) {
            c.train_lo = j["train_range"].at(0).get<double>();
            c.train_hi = j["train_range"].at(1).get<double>();
        }
        c.n_bins = j.value("n_bins", c.n_bins);
        c.strict_unseen = j.value("strict_unseen", c.strict_unseen);
        const json sizes = section(j, "sizes");
        require_keys(sizes, "sizes", {"source", "target", "target_val"});
        c.source_size = sizes.value("source", c.source_size);
        c.target_size = sizes.value("target", c.target_size);
        c.target_val_size = sizes.value("target_val", c.target_val_size);
        c.seed = j.value("seed", c.seed);
        c.atmospheric_light = j.value("atmospheric_light", c.atmospheric_light);
        c.resize_after_crop = j.value("resize_after_crop", c.resize_after_crop);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed data config: ") + e.what());
    }
    return c;
}

SplitConfig load_split_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("config not found: " + path.string());
    std::ifstream is(path);
    try {
        return split_config_from_json(json::parse(is));
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
}

fs::path resolve_data_path(const fs::path& p) {
    if (p.empty() || p.is_absolute() || fs::exists(p)) return p;
    if (const char* root = std::getenv("SAD_DATA_ROOT"); root && *root) return fs::path(root) / p;
    return p;
}

std::string config_hash(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : j.dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace sad
