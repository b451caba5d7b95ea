#include "sad/experiment.hpp"

#include "sad/error.hpp"

#include <fstream>
#include <limits>
#include <optional>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<json> read_json(const fs::path& p) {
    if (!fs::exists(p)) return std::nullopt;
    std::ifstream is(p);
    try {
        return json::parse(is);
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

void write_json(const fs::path& p, const json& j) {
    fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream os(tmp);
        os << j.dump(2) << "\n";
        if (!os) throw IoError("cannot write '" + tmp.string() + "'");
    }
    fs::rename(tmp, p);
}

SegReport seg_report_from_json(const json& j) {
    SegReport r;
    r.overall.mean = j.at("miou").get<double>();
    for (const auto& v : j.at("per_class_iou"))
        r.overall.per_class.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    r.n_samples = j.at("n_samples").get<std::int64_t>();
    for (const auto& b : j.at("per_bin")) {
        r.per_bin_miou[b.at("bin").get<int>()] = b.at("miou").get<double>();
        r.per_bin_count[b.at("bin").get<int>()] = b.at("count").get<std::int64_t>();
    }
    if (!j.at("intra_gap").is_null()) r.intra_gap = j.at("intra_gap").get<double>();
    return r;
}

} // namespace

DataPaths ensure_data(const SplitConfig& cfg, const fs::path& dir) {
    cfg.validate();
    const json want = split_config_to_json(cfg);
    DataPaths p{dir / "source" / "manifest.json", dir / "target" / "manifest.json",
                dir / "target_val" / "manifest.json"};
    const auto have = read_json(dir / "data_config.json");
    if (have && *have == want && fs::exists(p.source) && fs::exists(p.target) && fs::exists(p.target_val)) return p;
    fs::remove(dir / "data_config.json");
    build_splits(cfg, dir);
    write_json(dir / "data_config.json", want);
    return p;
}

json ProbeReport::to_json() const {
    return {{"probe_spf_accuracy", spf}, {"probe_inv_accuracy", inv}, {"n_train", n_train}, {"n_test", n_test}};
}

ProbeReport probe_encoders(Networks& nets, const TrainerConfig& cfg, const std::vector<SceneSample>& samples,
                           std::uint64_t seed) {
    ProbeOptions opts;
    opts.seed = seed;
    ProbeReport r;
    const auto spf = collect_probe_features(nets.encoder_spf, samples, cfg.dc, cfg.sar_pool, seed, cfg.eval_batch);
    const auto inv = collect_probe_features(nets.encoder_inv, samples, cfg.dc, cfg.sar_pool, seed, cfg.eval_batch);
    const auto a = probe_domainness(spf.features, spf.labels, cfg.dc.n_bins, opts);
    const auto b = probe_domainness(inv.features, inv.labels, cfg.dc.n_bins, opts);
    r.spf = a.accuracy;
    r.inv = b.accuracy;
    r.n_train = a.n_train;
    r.n_test = a.n_test;
    return r;
}

json RunReport::to_json() const {
    json j{{"variant", variant},
           {"seed", seed},
           {"config_hash", config_hash},
           {"run_dir", run_dir.string()},
           {"eval", eval.to_json()},
           {"probe", probe.to_json()}};
    return j;
}

TrainerConfig experiment_config(const Preset& preset, const DataPaths& data, const std::string& variant,
                                std::uint64_t seed, const fs::path& out_dir) {
    TrainerConfig c = make_variant(preset.train, variant);
    c.source_manifest = fs::absolute(data.source).string();
    c.target_manifest = fs::absolute(data.target).string();
    c.val_manifest = fs::absolute(data.target_val).string();
    c.seed = seed;
    c.out_dir = fs::absolute(out_dir).string();
    return c;
}

RunReport run_experiment(const RunRequest& req) {
    const TrainerConfig& cfg = req.config;
    if (cfg.val_manifest.empty()) throw ConfigError("experiments need a validation split");
    const fs::path dir = cfg.out_dir;
    RunReport r;
    r.variant = req.variant;
    r.seed = cfg.seed;
    r.config_hash = config_hash(cfg.to_json());
    r.run_dir = dir;

    if (const auto cached = read_json(dir / "report.json");
        cached && cached->value("config_hash", "") == r.config_hash && fs::exists(dir / "checkpoint.sad")) {
        r.eval = seg_report_from_json(cached->at("eval"));
        const auto& p = cached->at("probe");
        r.probe.spf = p.at("probe_spf_accuracy").get<double>();
        r.probe.inv = p.at("probe_inv_accuracy").get<double>();
        r.probe.n_train = p.at("n_train").get<std::int64_t>();
        r.probe.n_test = p.at("n_test").get<std::int64_t>();
        return r;
    }

    const TrainResult tr = train(cfg);
    r.eval = *tr.eval;
    auto [loaded_cfg, nets] = load_networks(tr.checkpoint);
    const Dataset source = load_dataset(cfg.source_manifest);
    const std::size_t n = std::min<std::size_t>(source.samples.size(), static_cast<std::size_t>(req.probe_samples));
    const std::vector<SceneSample> probe_set(source.samples.begin(), source.samples.begin() + n);
    r.probe = probe_encoders(nets, loaded_cfg, probe_set, cfg.seed);
    write_json(dir / "report.json", r.to_json());
    return r;
}

} // namespace sad
