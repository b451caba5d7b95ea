#include "sad/cli.hpp"

#include "sad/error.hpp"
#include "sad/experiment.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json_file(const fs::path& p, const json& j) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream os(p);
    os << j.dump(2) << "\n";
    if (!os) throw IoError("cannot write '" + p.string() + "'");
}

fs::path default_out(const std::string& flag) {
    if (const char* root = std::getenv("SAD_DATA_ROOT"); root && *root) return root;
    throw ConfigError(flag + " is required when SAD_DATA_ROOT is unset");
}

int cmd_gen_data(const std::string& config, std::string out, const std::optional<std::uint64_t>& seed) {
    SplitConfig cfg = config.empty() ? SplitConfig{} : load_split_config(config);
    if (seed) cfg.seed = *seed;
    cfg.validate();
    const fs::path dir = out.empty() ? default_out("--out") : fs::path(out);
    const SplitManifests m = build_splits(cfg, dir);
    write_json_file(dir / "data_config.json", split_config_to_json(cfg));
    std::cout << json{{"out", dir.string()},
                      {"source", m.source.sample_count},
                      {"target", m.target.sample_count},
                      {"target_val", m.target_val.sample_count}}
                     .dump()
              << "\n";
    return kExitOk;
}

int cmd_diversify(const std::string& in, const std::string& out, const std::string& dim,
                  const std::vector<double>& range, int bins, std::uint64_t seed) {
    DcConfig dc;
    dc.dimension = parse_dimension(dim);
    if (range.size() != 2) throw ConfigError("--range expects lo,hi");
    dc.lo = range[0];
    dc.hi = range[1];
    dc.n_bins = bins;
    dc.validate();

    const Dataset ds = load_dataset(resolve_data_path(in));
    if (dc.dimension == Dimension::fov && !dc.resize_after_crop)
        throw ConfigError("fov diversification keeps the native size");

    DatasetManifest m;
    m.root = out;
    m.split = fs::path(out).filename().string();
    m.sample_count = static_cast<std::int64_t>(ds.samples.size());
    m.num_classes = ds.manifest.num_classes;
    m.height = ds.manifest.height;
    m.width = ds.manifest.width;
    m.domain = DomainTag::source_diversified;
    m.dimension = dc.dimension;
    const double width = (dc.hi - dc.lo) / dc.n_bins;
    for (int b = 0; b < dc.n_bins; ++b) m.bins.push_back({b, dc.lo + width * (b + 0.5), 0});

    fs::create_directories(out);
    std::ofstream labels(fs::path(out) / "labels.jsonl");
    Rng rng = Rng::stream(seed, 10);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto& rec = ds.manifest.samples[i];
        auto [div, spec] = diversify(ds.samples[i], rng, dc);
        write_sample(out, rec.id, div);
        labels << json{{"id", rec.id},
                       {"dimension", std::string(to_string(spec.dimension))},
                       {"value", spec.value},
                       {"bin", spec.bin},
                       {"n_bins", spec.n_bins},
                       {"onehot", spec.onehot}}
                      .dump()
               << "\n";
        m.samples.push_back({rec.id, rec.seed, spec.value, spec.bin});
        ++m.bins[spec.bin].count;
    }
    if (!labels) throw IoError("cannot write labels.jsonl under '" + out + "'");
    write_manifest(m);
    write_json_file(fs::path(out) / "diversify_config.json",
                    {{"in", fs::absolute(resolve_data_path(in)).string()}, {"dc", dc_to_json(dc)}, {"seed", seed}});
    std::cout << json{{"out", out}, {"samples", m.sample_count}}.dump() << "\n";
    return kExitOk;
}

int cmd_train(const std::string& config, const std::string& out, const std::string& resume,
              const std::optional<std::int64_t>& steps, const std::optional<std::uint64_t>& seed) {
    TrainerConfig cfg = load_trainer_config(config);
    if (!out.empty()) cfg.out_dir = out;
    if (steps) cfg.steps = *steps;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    const TrainResult r = train(cfg, resume.empty() ? std::nullopt : std::optional<fs::path>(resume));
    json j{{"checkpoint", r.checkpoint.string()}, {"last", r.last.to_json()}, {"config_hash", config_hash(cfg.to_json())}};
    if (r.eval) j["eval"] = r.eval->to_json();
    std::cout << j.dump() << "\n";
    return kExitOk;
}

std::vector<SceneSample> head_of(const Dataset& ds, std::int64_t n) {
    const auto k = std::min<std::size_t>(ds.samples.size(), static_cast<std::size_t>(n));
    return {ds.samples.begin(), ds.samples.begin() + k};
}

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& report, std::string probe_data,
             std::int64_t probe_samples, const std::optional<std::uint64_t>& probe_seed) {
    auto [cfg, nets] = load_networks(ckpt);
    const Dataset ds = load_dataset(resolve_data_path(data));
    const SegReport seg = evaluate_segmentation(nets.encoder_inv, nets.taskhead, ds.samples, cfg.num_classes, cfg.eval_batch);
    if (probe_data.empty()) probe_data = fs::exists(cfg.source_manifest) ? cfg.source_manifest : data;
    const Dataset pd = load_dataset(resolve_data_path(probe_data));
    const ProbeReport probe = probe_encoders(nets, cfg, head_of(pd, probe_samples), probe_seed.value_or(cfg.seed));
    json j = seg.to_json();
    j["probe"] = probe.to_json();
    j["checkpoint"] = ckpt;
    j["data"] = data;
    j["config_hash"] = config_hash(cfg.to_json());
    if (!report.empty()) write_json_file(report, j);
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int cmd_probe(const std::string& ckpt, const std::string& data, std::int64_t samples, const std::optional<std::uint64_t>& seed,
              const std::string& report) {
    auto [cfg, nets] = load_networks(ckpt);
    const Dataset ds = load_dataset(resolve_data_path(data));
    const ProbeReport probe = probe_encoders(nets, cfg, head_of(ds, samples), seed.value_or(cfg.seed));
    const json j = probe.to_json();
    if (!report.empty()) write_json_file(report, j);
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int cmd_export(const std::string& ckpt, const std::string& out) {
    const std::int64_t n = export_inference(ckpt, out);
    std::cout << json{{"out", out}, {"parameters", n}}.dump() << "\n";
    return kExitOk;
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

int cmd_ablate(const std::string& preset_name, std::string out, const std::vector<std::uint64_t>& seeds,
               std::vector<std::string> variants, const std::optional<std::int64_t>& steps) {
    Preset preset = make_preset(preset_name);
    if (steps) preset.train.steps = *steps;
    if (variants.empty()) variants = variant_names();
    const fs::path dir = out.empty() ? fs::path("ablate-" + preset_name) : fs::path(out);
    write_json_file(dir / "preset.json", {{"name", preset.name},
                                          {"description", preset.description},
                                          {"data", split_config_to_json(preset.data)},
                                          {"train", preset.train.to_json()}});
    const DataPaths data = ensure_data(preset.data, dir / "data");

    json reports = json::array();
    std::ostringstream table;
    table << "| variant | seed | mIoU | intra-gap | probe z_spf | probe z_inv | config hash |\n"
          << "|---|---|---|---|---|---|---|\n";
    for (const auto& v : variants) {
        for (auto seed : seeds) {
            RunRequest req;
            req.variant = v;
            req.config = experiment_config(preset, data, v, seed, dir / "runs" / (v + "-seed" + std::to_string(seed)));
            req.probe_samples = std::min<std::int64_t>(400, preset.data.source_size);
            const RunReport r = run_experiment(req);
            reports.push_back(r.to_json());
            table << "| " << v << " | " << seed << " | " << fmt(100.0 * r.eval.overall.mean, 2) << " | "
                  << (r.eval.intra_gap ? fmt(100.0 * *r.eval.intra_gap, 2) : std::string("-")) << " | "
                  << fmt(r.probe.spf, 3) << " | " << fmt(r.probe.inv, 3) << " | " << r.config_hash << " |\n";
        }
    }
    write_json_file(dir / "ablation.json", {{"preset", preset.name}, {"runs", reports}});
    std::ofstream(dir / "ablation.md") << "# " << preset.name << "\n\n" << table.str();
    std::cout << table.str();
    return kExitOk;
}

int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::validation: return kExitConfig;
    default: return kExitFailure;
    }
}

void report_error(std::string_view kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Self-adversarial disentangling for specific domain adaptation", "sad"};
    app.require_subcommand(1);
    std::function<int()> action;

    std::string gen_config, gen_out;
    std::optional<std::uint64_t> gen_seed;
    auto* gen = app.add_subcommand("gen-data", "Render the source / target / target-val benchmark splits");
    gen->add_option("--config", gen_config, "Data-generation config (JSON); defaults apply when omitted");
    gen->add_option("--out", gen_out, "Output directory (default: $SAD_DATA_ROOT)");
    gen->add_option("--seed", gen_seed, "Override the base seed");
    gen->callback([&] { action = [&] { return cmd_gen_data(gen_config, gen_out, gen_seed); }; });

    std::string div_in, div_out, div_dim = "fog";
    std::vector<double> div_range{0.0, 0.04};
    int div_bins = 4;
    std::uint64_t div_seed = 0;
    auto* div = app.add_subcommand("diversify", "Push a split through the domainness creator and write labels.jsonl");
    div->add_option("--in", div_in, "Input manifest (file or directory)")->required();
    div->add_option("--out", div_out, "Output directory")->required();
    div->add_option("--dim", div_dim, "Domainness dimension")->check(CLI::IsMember({"fog", "fov", "rain"}));
    div->add_option("--range", div_range, "Sampling range lo,hi")->delimiter(',')->expected(2);
    div->add_option("--bins", div_bins, "Number of domainness bins N");
    div->add_option("--seed", div_seed, "Seed of the creator's random stream");
    div->callback([&] { action = [&] { return cmd_diversify(div_in, div_out, div_dim, div_range, div_bins, div_seed); }; });

    std::string tr_config, tr_out, tr_resume;
    std::optional<std::int64_t> tr_steps;
    std::optional<std::uint64_t> tr_seed;
    auto* tr = app.add_subcommand("train", "Train from a config file");
    tr->add_option("--config", tr_config, "Training config (JSON)")->required();
    tr->add_option("--out", tr_out, "Run directory (overrides run.out_dir)");
    tr->add_option("--resume", tr_resume, "Continue from a training checkpoint");
    tr->add_option("--steps", tr_steps, "Override optim.steps");
    tr->add_option("--seed", tr_seed, "Override run.seed");
    tr->callback([&] { action = [&] { return cmd_train(tr_config, tr_out, tr_resume, tr_steps, tr_seed); }; });

    std::string ev_ckpt, ev_data, ev_report, ev_probe_data;
    std::int64_t ev_probe_samples = 400;
    std::optional<std::uint64_t> ev_probe_seed;
    auto* ev = app.add_subcommand("eval", "Segmentation mIoU, per-bin table, intra-gap and domainness probes");
    ev->add_option("--ckpt", ev_ckpt, "Training checkpoint")->required();
    ev->add_option("--data", ev_data, "Evaluation manifest")->required();
    ev->add_option("--report", ev_report, "Write the JSON report here");
    ev->add_option("--probe-data", ev_probe_data, "Clear-scene manifest for the probes (default: training source)");
    ev->add_option("--probe-samples", ev_probe_samples, "Number of probe samples");
    ev->add_option("--probe-seed", ev_probe_seed, "Probe seed (default: run seed)");
    ev->callback([&] {
        action = [&] { return cmd_eval(ev_ckpt, ev_data, ev_report, ev_probe_data, ev_probe_samples, ev_probe_seed); };
    });

    std::string pr_ckpt, pr_data, pr_report;
    std::int64_t pr_samples = 400;
    std::optional<std::uint64_t> pr_seed;
    auto* pr = app.add_subcommand("probe", "Linear domainness probes on z_spf and z_inv");
    pr->add_option("--ckpt", pr_ckpt, "Training checkpoint")->required();
    pr->add_option("--data", pr_data, "Clear-scene manifest")->required();
    pr->add_option("--samples", pr_samples, "Number of probe samples");
    pr->add_option("--seed", pr_seed, "Probe seed (default: run seed)");
    pr->add_option("--report", pr_report, "Write the JSON report here");
    pr->callback([&] { action = [&] { return cmd_probe(pr_ckpt, pr_data, pr_samples, pr_seed, pr_report); }; });

    std::string ex_ckpt, ex_out;
    auto* ex = app.add_subcommand("export", "Write the inference bundle (invariant encoder + task head)");
    ex->add_option("--ckpt", ex_ckpt, "Training checkpoint")->required();
    ex->add_option("--out", ex_out, "Output file")->required();
    ex->callback([&] { action = [&] { return cmd_export(ex_ckpt, ex_out); }; });

    std::string ab_preset, ab_out;
    std::vector<std::uint64_t> ab_seeds{0};
    std::vector<std::string> ab_variants;
    std::optional<std::int64_t> ab_steps;
    auto* ab = app.add_subcommand("ablate", "Run the component ablation grid of a preset and tabulate it");
    ab->add_option("--preset", ab_preset, "Preset name")->required()->check(CLI::IsMember(preset_names()));
    ab->add_option("--out", ab_out, "Output directory");
    ab->add_option("--seeds", ab_seeds, "Comma-separated seeds")->delimiter(',');
    ab->add_option("--variants", ab_variants, "Subset of baseline,dc,dc_sar,dc_sar_no_spf")
        ->delimiter(',')
        ->check(CLI::IsMember(variant_names()));
    ab->add_option("--steps", ab_steps, "Override the preset's step count");
    ab->callback([&] { action = [&] { return cmd_ablate(ab_preset, ab_out, ab_seeds, ab_variants, ab_steps); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << app.help();
        report_error("usage", e.what());
        return kExitUsage;
    }

    try {
        return action();
    } catch (const Error& e) {
        report_error(to_string(e.kind()), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kExitFailure;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"sad"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace sad
