#include "sad/trainer.hpp"

#include "sad/archive.hpp"
#include "sad/error.hpp"
#include "sad/nn_util.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointKind = "training-checkpoint";
constexpr const char* kInferenceKind = "inference-bundle";
const char* const kModules[] = {"encoder_spf", "encoder_inv", "sar", "discriminator", "taskhead"};

double scalar(const torch::Tensor& t) { return t.defined() ? t.item<double>() : 0.0; }

std::string batch_ids(const std::vector<SceneSample>& src, const std::vector<SceneSample>& tgt) {
    std::ostringstream os;
    os << "source seeds [";
    for (std::size_t i = 0; i < src.size(); ++i) os << (i ? "," : "") << src[i].meta.seed;
    os << "], target seeds [";
    for (std::size_t i = 0; i < tgt.size(); ++i) os << (i ? "," : "") << tgt[i].meta.seed;
    os << "]";
    return os.str();
}

std::vector<std::string> names_of(const NamedTensors& ts) {
    std::vector<std::string> out;
    for (const auto& [n, t] : ts) out.push_back(n);
    return out;
}

void check_dataset(const Dataset& ds, const TrainerConfig& cfg, const std::string& what) {
    if (ds.samples.empty()) throw DataError(what + " split is empty");
    if (ds.manifest.height != cfg.encoder.height || ds.manifest.width != cfg.encoder.width)
        throw DataError(what + " images are " + std::to_string(ds.manifest.height) + "x" +
                        std::to_string(ds.manifest.width) + ", the encoder expects " +
                        std::to_string(cfg.encoder.height) + "x" + std::to_string(cfg.encoder.width));
    if (ds.manifest.num_classes > cfg.num_classes)
        throw DataError(what + " split has " + std::to_string(ds.manifest.num_classes) + " classes, the model " +
                        std::to_string(cfg.num_classes));
}

} // namespace

json LossBundle::to_json() const {
    return {{"task", task}, {"adv", adv}, {"inv", inv}, {"spf", spf}, {"total", total}};
}

Trainer::Trainer(TrainerConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))),
      nets_(Networks::create(cfg_)),
      adam_(nets_.named_parameters(), cfg_.adam),
      dc_rng_(Rng::stream(cfg_.seed, 10)),
      sampler_rng_(Rng::stream(cfg_.seed, 11)) {
    nets_.train(true);
}

double Trainer::lr_at(std::int64_t step) const {
    const double frac = std::clamp(1.0 - double(step) / double(cfg_.steps), 0.0, 1.0);
    return cfg_.lr * std::pow(frac, cfg_.poly_power);
}

std::vector<std::size_t> Trainer::sample_indices(std::size_t n) {
    if (n == 0) throw DataError("cannot sample a batch from an empty split");
    std::vector<std::size_t> idx(cfg_.batch_size);
    for (auto& i : idx) i = static_cast<std::size_t>(sampler_rng_.below(n));
    return idx;
}

StepResult Trainer::train_step(const std::vector<SceneSample>& src, const std::vector<SceneSample>& tgt) {
    if (src.empty()) throw DomainError("source batch is empty");
    if (cfg_.use_adv && tgt.empty()) throw DomainError("target batch is empty");
    const auto dtype = cfg_.dtype();
    StepResult out;
    auto& L = out.losses;
    auto& diag = out.diag;

    std::vector<SceneSample> xs;
    std::vector<std::int64_t> bins;
    xs.reserve(src.size());
    for (const auto& s : src) {
        if (cfg_.use_dc) {
            auto [div, spec] = diversify(s, dc_rng_, cfg_.dc);
            bins.push_back(spec.bin);
            xs.push_back(std::move(div));
        } else {
            xs.push_back(s);
        }
    }
    const auto images = stack_images(xs, dtype);

    const bool add_spf = cfg_.use_sar && cfg_.lambda_spf > 0.0;
    const bool add_inv = cfg_.use_sar && cfg_.lambda_inv > 0.0;
    const bool add_adv = cfg_.use_adv && cfg_.lambda_adv > 0.0;

    torch::Tensor total = torch::zeros({}, torch::TensorOptions().dtype(dtype));
    FeatureMap z_inv{{}, FeatureTag::inv};
    if (cfg_.use_task || cfg_.use_sar || cfg_.use_adv) z_inv = encode(nets_.encoder_inv, images, FeatureTag::inv);

    torch::Tensor task, adv, inv, spf;
    if (cfg_.use_task) {
        task = loss_task(seg_forward(nets_.taskhead, z_inv), stack_masks(src));
        total = total + task;
    }
    if (cfg_.use_adv) {
        const auto z_tgt = encode(nets_.encoder_inv, stack_images(tgt, dtype), FeatureTag::inv);
        const auto p_src = disc_forward(nets_.discriminator, {z_inv.values.detach(), FeatureTag::inv});
        const auto p_tgt = disc_forward(nets_.discriminator, {grad_reverse(z_tgt.values), FeatureTag::inv});
        auto a = loss_adv(p_src, p_tgt);
        adv = a.loss;
        diag.adv_clamped = a.clamped;
        diag.disc_accuracy = ((p_src > 0.5).sum().item<double>() + (p_tgt < 0.5).sum().item<double>()) /
                             double(p_src.numel() + p_tgt.numel());
        if (add_adv) total = total + cfg_.lambda_adv * adv;
    }
    if (cfg_.use_sar) {
        const auto bin_t = torch::tensor(bins, torch::kInt64);
        const auto z_spf = encode(nets_.encoder_spf, images, FeatureTag::spf);
        const auto pred_spf = sar_forward(nets_.sar, z_spf);
        const bool frozen = cfg_.sar_wiring == SarWiring::split_heads_shared;
        const auto pred_inv = sar_forward(nets_.sar, z_inv, frozen);
        inv = loss_inv(pred_inv);
        spf = loss_spf(pred_spf, bin_t);
        if (add_inv) total = total + cfg_.lambda_inv * inv;
        if (add_spf) total = total + cfg_.lambda_spf * spf;
        torch::NoGradGuard no_grad;
        diag.sar_accuracy = pred_spf.logits.argmax(1).eq(bin_t).to(torch::kFloat64).mean().item<double>();
        diag.sar_inv_accuracy = pred_inv.logits.argmax(1).eq(bin_t).to(torch::kFloat64).mean().item<double>();
    }

    L.task = scalar(task);
    L.adv = scalar(adv);
    L.inv = scalar(inv);
    L.spf = scalar(spf);
    L.total = scalar(total);
    if (!std::isfinite(L.total) || !std::isfinite(L.task) || !std::isfinite(L.adv) || !std::isfinite(L.inv) ||
        !std::isfinite(L.spf)) {
        const std::string msg = "non-finite loss at step " + std::to_string(step_) + " (" + L.to_json().dump() +
                                "); " + batch_ids(src, tgt);
        if (!cfg_.out_dir.empty()) {
            fs::create_directories(cfg_.out_dir);
            std::ofstream(fs::path(cfg_.out_dir) / ("nonfinite_step" + std::to_string(step_) + ".txt")) << msg << "\n";
        }
        throw NumericError(msg);
    }

    diag.lr = lr_at(step_);
    adam_.zero_grad();
    if (total.requires_grad()) total.backward();
    adam_.step(diag.lr);
    ++step_;
    return out;
}

void Trainer::save_checkpoint(const fs::path& path) const {
    const auto params = nets_.named_parameters();
    const auto buffers = nets_.named_buffers();
    NamedTensors arrays = params;
    arrays.insert(arrays.end(), buffers.begin(), buffers.end());
    for (auto& [name, t] : adam_.state()) arrays.emplace_back("adam." + name, t);
    const json meta{{"kind", kCheckpointKind},
                    {"config", cfg_.to_json()},
                    {"config_hash", config_hash(cfg_.to_json())},
                    {"step", step_},
                    {"rng", {{"dc", dc_rng_.serialize()}, {"sampler", sampler_rng_.serialize()}}},
                    {"arch",
                     {{"encoder", cfg_.encoder.to_json()},
                      {"sar", cfg_.sar_arch().to_json()},
                      {"discriminator", cfg_.disc_arch().to_json()},
                      {"taskhead", cfg_.head_arch().to_json()}}},
                    {"parameters", names_of(params)},
                    {"buffers", names_of(buffers)}};
    write_archive(path, meta, arrays);
}

void Trainer::load_checkpoint(const fs::path& path) {
    const Archive a = read_archive(path);
    if (a.meta.value("kind", "") != kCheckpointKind) throw DataError("'" + path.string() + "' is not a training checkpoint");
    const TrainerConfig saved = TrainerConfig::from_json(a.meta.at("config"));
    if (!(saved.encoder == cfg_.encoder) || !(saved.sar_arch() == cfg_.sar_arch()) ||
        !(saved.disc_arch() == cfg_.disc_arch()) || !(saved.head_arch() == cfg_.head_arch()))
        throw DataError("checkpoint architecture does not match the configuration");
    load_prefixed(*nets_.encoder_spf, "encoder_spf", a.arrays);
    load_prefixed(*nets_.encoder_inv, "encoder_inv", a.arrays);
    load_prefixed(*nets_.sar, "sar", a.arrays);
    load_prefixed(*nets_.discriminator, "discriminator", a.arrays);
    load_prefixed(*nets_.taskhead, "taskhead", a.arrays);
    std::map<std::string, torch::Tensor> adam_state;
    for (const auto& [name, t] : a.arrays)
        if (name.rfind("adam.", 0) == 0) adam_state.emplace(name.substr(5), t);
    adam_.load_state(adam_state);
    step_ = a.meta.at("step").get<std::int64_t>();
    dc_rng_ = Rng::deserialize(a.meta.at("rng").at("dc").get<std::string>());
    sampler_rng_ = Rng::deserialize(a.meta.at("rng").at("sampler").get<std::string>());
}

TrainResult train(const TrainerConfig& cfg, const std::optional<fs::path>& resume) {
    cfg.validate();
    if (cfg.out_dir.empty()) throw ConfigError("run.out_dir must be set");
    if (cfg.source_manifest.empty()) throw ConfigError("data.source must be set");
    if (cfg.use_adv && cfg.target_manifest.empty()) throw ConfigError("data.target must be set when adv is enabled");

    const Dataset source = load_dataset(cfg.source_manifest);
    check_dataset(source, cfg, "source");
    std::optional<Dataset> target, val;
    if (cfg.use_adv) {
        target = load_dataset(cfg.target_manifest);
        check_dataset(*target, cfg, "target");
    }
    if (!cfg.val_manifest.empty()) {
        val = load_dataset(cfg.val_manifest);
        check_dataset(*val, cfg, "validation");
    }

    const fs::path out = cfg.out_dir;
    fs::create_directories(out);
    const json snapshot = cfg.to_json();
    const std::string hash = config_hash(snapshot);
    {
        std::ofstream os(out / "config.json");
        os << snapshot.dump(2) << "\n";
        if (!os) throw IoError("cannot write config snapshot under '" + out.string() + "'");
    }

    Trainer trainer(cfg);
    if (resume) trainer.load_checkpoint(*resume);
    std::ofstream metrics(out / "metrics.jsonl", resume ? std::ios::app : std::ios::trunc);
    if (!metrics) throw IoError("cannot write metrics under '" + out.string() + "'");

    auto evaluate = [&]() {
        auto& n = trainer.nets();
        SegReport r = evaluate_segmentation(n.encoder_inv, n.taskhead, val->samples, cfg.num_classes, cfg.eval_batch);
        json rec = r.to_json();
        rec["kind"] = "eval";
        rec["step"] = trainer.step();
        rec["config_hash"] = hash;
        metrics << rec.dump() << "\n" << std::flush;
        return r;
    };

    TrainResult result;
    result.checkpoint = out / "checkpoint.sad";
    std::vector<SceneSample> src_batch, tgt_batch;
    while (trainer.step() < cfg.steps) {
        src_batch.clear();
        tgt_batch.clear();
        for (auto i : trainer.sample_indices(source.samples.size())) src_batch.push_back(source.samples[i]);
        if (target)
            for (auto i : trainer.sample_indices(target->samples.size())) tgt_batch.push_back(target->samples[i]);
        const StepResult r = trainer.train_step(src_batch, tgt_batch);
        result.last = r.losses;
        const std::int64_t step = trainer.step();
        if (step % cfg.log_interval == 0 || step == cfg.steps) {
            json rec{{"kind", "train"},
                     {"step", step},
                     {"loss_task", r.losses.task},
                     {"loss_adv_disc", r.losses.adv},
                     {"loss_inv", r.losses.inv},
                     {"loss_spf", r.losses.spf},
                     {"loss_total", r.losses.total},
                     {"sar_accuracy", r.diag.sar_accuracy},
                     {"sar_inv_accuracy", r.diag.sar_inv_accuracy},
                     {"disc_accuracy", r.diag.disc_accuracy},
                     {"adv_clamped", r.diag.adv_clamped},
                     {"lr", r.diag.lr}};
            metrics << rec.dump() << "\n" << std::flush;
        }
        if (val && cfg.eval_interval > 0 && step % cfg.eval_interval == 0 && step != cfg.steps) evaluate();
        if (cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0 && step != cfg.steps)
            trainer.save_checkpoint(result.checkpoint);
    }
    trainer.save_checkpoint(result.checkpoint);
    if (val) result.eval = evaluate();
    return result;
}

std::int64_t export_inference(const fs::path& checkpoint, const fs::path& out) {
    const Archive a = read_archive(checkpoint);
    if (a.meta.value("kind", "") != kCheckpointKind)
        throw DataError("'" + checkpoint.string() + "' is not a training checkpoint");
    NamedTensors arrays;
    std::vector<std::string> params, buffers;
    std::int64_t count = 0;
    const auto keep = [](const std::string& name) {
        return name.rfind("encoder_inv.", 0) == 0 || name.rfind("taskhead.", 0) == 0;
    };
    for (const auto& name : a.meta.at("parameters").get<std::vector<std::string>>()) {
        if (!keep(name)) continue;
        const auto& t = a.arrays.at(name);
        arrays.emplace_back(name, t);
        params.push_back(name);
        count += t.numel();
    }
    for (const auto& name : a.meta.at("buffers").get<std::vector<std::string>>()) {
        if (!keep(name)) continue;
        arrays.emplace_back(name, a.arrays.at(name));
        buffers.push_back(name);
    }
    const json meta{{"kind", kInferenceKind},
                    {"encoder", a.meta.at("arch").at("encoder")},
                    {"taskhead", a.meta.at("arch").at("taskhead")},
                    {"parameters", params},
                    {"buffers", buffers},
                    {"parameter_count", count},
                    {"source_step", a.meta.at("step")},
                    {"source_config_hash", a.meta.value("config_hash", "")}};
    write_archive(out, meta, arrays);
    return count;
}

torch::Tensor InferenceModel::predict(const torch::Tensor& images) {
    encoder->eval();
    head->eval();
    const auto dtype = encoder->parameters().front().scalar_type();
    return predict_masks(encoder, head, images.to(dtype));
}

std::int64_t InferenceModel::parameter_count() const {
    return count_parameters(*encoder) + count_parameters(*head);
}

InferenceModel load_inference(const fs::path& path) {
    const Archive a = read_archive(path);
    const std::string kind = a.meta.value("kind", "");
    json enc_arch, head_arch;
    if (kind == kInferenceKind) {
        enc_arch = a.meta.at("encoder");
        head_arch = a.meta.at("taskhead");
    } else if (kind == kCheckpointKind) {
        enc_arch = a.meta.at("arch").at("encoder");
        head_arch = a.meta.at("arch").at("taskhead");
    } else {
        throw DataError("'" + path.string() + "' holds neither a checkpoint nor an inference bundle");
    }
    InferenceModel m;
    m.encoder = Encoder(EncoderArch::from_json(enc_arch));
    m.head = SegHead(TaskHeadArch::from_json(head_arch));
    const auto dtype = a.arrays.at("encoder_inv.conv1.weight").scalar_type();
    m.encoder->to(dtype);
    m.head->to(dtype);
    load_prefixed(*m.encoder, "encoder_inv", a.arrays);
    load_prefixed(*m.head, "taskhead", a.arrays);
    m.encoder->eval();
    m.head->eval();
    return m;
}

std::pair<TrainerConfig, Networks> load_networks(const fs::path& checkpoint) {
    const Archive a = read_archive(checkpoint);
    if (a.meta.value("kind", "") != kCheckpointKind)
        throw DataError("'" + checkpoint.string() + "' is not a training checkpoint");
    TrainerConfig cfg = TrainerConfig::from_json(a.meta.at("config"));
    Networks n = Networks::create(cfg);
    load_prefixed(*n.encoder_spf, kModules[0], a.arrays);
    load_prefixed(*n.encoder_inv, kModules[1], a.arrays);
    load_prefixed(*n.sar, kModules[2], a.arrays);
    load_prefixed(*n.discriminator, kModules[3], a.arrays);
    load_prefixed(*n.taskhead, kModules[4], a.arrays);
    n.train(false);
    return {cfg, n};
}

} // namespace sad
