// Acceptance suite: one PASS/FAIL line per criterion.
//
//   sad_acceptance --work-dir <dir> [--only 1,5,6]
//
// Desk-scale runs (criteria 5-9) are cached under the work directory and
// reused while their configs are unchanged.

#include "sad/archive.hpp"
#include "sad/domainness.hpp"
#include "sad/error.hpp"
#include "sad/experiment.hpp"
#include "sad/nn_util.hpp"
#include "sad/trainer.hpp"
#include "test_support.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

using namespace sad;
namespace fs = std::filesystem;

namespace {

const auto f64 = torch::TensorOptions().dtype(torch::kFloat64);

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int precision = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(precision);
    os << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os.setf(std::ios::scientific);
    os.precision(2);
    os << v;
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<double> row(const torch::Tensor& t, std::int64_t i) {
    std::vector<double> v;
    for (std::int64_t j = 0; j < t.size(1); ++j) v.push_back(t[i][j].item<double>());
    return v;
}

// ---------------------------------------------------------------- 1

Outcome loss_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto logits = torch::empty({1, 4}, f64);
        for (int j = 0; j < 4; ++j) logits[0][j] = 3.0 * rng.normal();
        const auto pred = DomainnessPrediction::from_logits(logits);
        const auto p = testing::softmax_ref(row(logits, 0));
        const int bin = static_cast<int>(rng.below(4));
        worst = std::max(worst, std::abs(loss_spf(pred, torch::tensor({std::int64_t(bin)})).item<double>() -
                                         testing::cross_entropy_ref(p, bin)));
        worst = std::max(worst, std::abs(loss_inv(pred).item<double>() - testing::kl_uniform_ref(p)));

        std::vector<double> ps, pt;
        for (int i = 0; i < 4; ++i) {
            ps.push_back(rng.uniform(0.01, 0.99));
            pt.push_back(rng.uniform(0.01, 0.99));
        }
        worst = std::max(worst, std::abs(loss_adv(torch::tensor(ps, f64), torch::tensor(pt, f64)).loss.item<double>() -
                                         testing::bce_ref(ps, pt)));

        auto seg = torch::empty({1, 6, 3, 3}, f64);
        auto mask = torch::empty({1, 3, 3}, torch::kInt64);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) {
                for (int k = 0; k < 6; ++k) seg[0][k][y][x] = 2.0 * rng.normal();
                mask[0][y][x] = static_cast<std::int64_t>(rng.below(6));
            }
        worst = std::max(worst, std::abs(loss_task(seg, mask).item<double>() - testing::pixel_ce_ref(seg, mask)));
    }
    const auto uniform = DomainnessPrediction::from_logits(torch::zeros({1, 4}, f64));
    auto hot = torch::zeros({1, 4}, f64);
    hot[0][0] = 40.0;
    const double a_spf = std::abs(loss_spf(uniform, torch::tensor({2L})).item<double>() - std::log(4.0));
    const double a_inv0 = std::abs(loss_inv(uniform).item<double>());
    const double a_inv1 = std::abs(loss_inv(DomainnessPrediction::from_logits(hot)).item<double>() - std::log(4.0));
    const auto half = torch::full({4}, 0.5, f64);
    const double a_adv = std::abs(loss_adv(half, half).loss.item<double>() - 2.0 * std::log(2.0));
    const double secs = seconds_since(t0);
    const bool pass = worst <= 1e-7 && a_spf <= 1e-12 && a_inv0 <= 1e-12 && a_inv1 <= 1e-4 && a_adv <= 1e-6 && secs < 5.0;
    return {pass, "max abs err " + sci(worst) + ", anchors spf " + sci(a_spf) + " inv(u) " + sci(a_inv0) +
                      " inv(1hot) " + sci(a_inv1) + " adv " + sci(a_adv) + ", " + fmt(secs, 2) + " s"};
}

// ---------------------------------------------------------------- 2

Outcome gradient_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    TrainerConfig cfg = testing::tiny_config(17);
    cfg.encoder.height = 16;
    cfg.encoder.width = 16;
    Networks n = Networks::create(cfg);
    n.train(true);
    torch::manual_seed(17);
    Rng rng(202);
    const auto x = torch::rand({2, 3, 16, 16}, f64);
    const auto mask = torch::randint(0, 6, {2, 16, 16}, torch::kInt64);
    const auto bins = torch::tensor({0L, 3L});
    const auto proj_z = torch::randn({2, 8, 2, 2}, f64);
    const auto proj_seg = torch::randn({2, 6, 16, 16}, f64);
    const auto proj_sar = torch::randn({2, 4}, f64);
    const auto proj_d = torch::randn({2}, f64);

    auto param = [](torch::nn::Module& m, const std::string& name) { return m.named_parameters()[name]; };
    auto z_leaf = (torch::rand({2, 8, 2, 2}, f64) - 0.3).requires_grad_(true);
    auto x_leaf = x.clone().requires_grad_(true);

    struct Check {
        std::string name;
        std::function<torch::Tensor()> f;
        torch::Tensor wrt;
    };
    const std::vector<Check> checks{
        {"encode/input", [&] { return (encode(n.encoder_inv, x_leaf, FeatureTag::inv).values * proj_z).sum(); }, x_leaf},
        {"encode/conv1", [&] { return (encode(n.encoder_inv, x, FeatureTag::inv).values * proj_z).sum(); },
         param(*n.encoder_inv, "conv1.weight")},
        {"encode/bn3", [&] { return (encode(n.encoder_spf, x, FeatureTag::spf).values * proj_z).sum(); },
         param(*n.encoder_spf, "bn3.weight")},
        {"sar_forward/z", [&] { return (sar_forward(n.sar, {z_leaf, FeatureTag::spf}).logits * proj_sar).sum(); }, z_leaf},
        {"sar_forward/fc1", [&] { return (sar_forward(n.sar, {z_leaf.detach(), FeatureTag::spf}).logits * proj_sar).sum(); },
         param(*n.sar, "fc1.weight")},
        {"disc_forward/z", [&] { return (disc_forward(n.discriminator, {z_leaf, FeatureTag::inv}) * proj_d).sum(); }, z_leaf},
        {"disc_forward/conv2", [&] { return (disc_forward(n.discriminator, {z_leaf.detach(), FeatureTag::inv}) * proj_d).sum(); },
         param(*n.discriminator, "conv2.weight")},
        {"seg_forward/z", [&] { return (seg_forward(n.taskhead, {z_leaf, FeatureTag::inv}) * proj_seg).sum(); }, z_leaf},
        {"seg_forward/classifier", [&] { return (seg_forward(n.taskhead, {z_leaf.detach(), FeatureTag::inv}) * proj_seg).sum(); },
         param(*n.taskhead, "classifier.weight")},
        {"loss_task/E_inv", [&] { return loss_task(seg_forward(n.taskhead, encode(n.encoder_inv, x, FeatureTag::inv)), mask); },
         param(*n.encoder_inv, "conv2.weight")},
        {"loss_spf/E_spf", [&] { return loss_spf(sar_forward(n.sar, encode(n.encoder_spf, x, FeatureTag::spf)), bins); },
         param(*n.encoder_spf, "conv3.weight")},
        {"loss_inv/E_inv", [&] { return loss_inv(sar_forward(n.sar, encode(n.encoder_inv, x, FeatureTag::inv), true)); },
         param(*n.encoder_inv, "conv4.weight")},
        {"loss_adv/D", [&] {
             const auto p = disc_forward(n.discriminator, encode(n.encoder_inv, x, FeatureTag::inv));
             return loss_adv(p.slice(0, 0, 1), p.slice(0, 1, 2)).loss;
         },
         param(*n.discriminator, "conv1.weight")},
        {"total/E_inv", [&] {
             const auto zi = encode(n.encoder_inv, x, FeatureTag::inv);
             const auto zs = encode(n.encoder_spf, x, FeatureTag::spf);
             const auto p = disc_forward(n.discriminator, zi);
             return loss_task(seg_forward(n.taskhead, zi), mask) +
                    0.3 * loss_adv(p.slice(0, 0, 1), p.slice(0, 1, 2)).loss +
                    0.7 * loss_inv(sar_forward(n.sar, zi, true)) + 0.2 * loss_spf(sar_forward(n.sar, zs), bins);
         },
         param(*n.encoder_inv, "conv1.weight")},
    };
    double worst = 0.0;
    std::string worst_name;
    int coords = 1 << 30;
    for (const auto& c : checks) {
        for (auto& p : n.named_parameters())
            if (p.second.grad().defined()) p.second.mutable_grad().zero_();
        if (z_leaf.grad().defined()) z_leaf.mutable_grad().zero_();
        if (x_leaf.grad().defined()) x_leaf.mutable_grad().zero_();
        const auto r = testing::grad_check(c.f, c.wrt, 12, rng);
        coords = std::min(coords, r.checked);
        if (r.max_rel_err >= worst) {
            worst = r.max_rel_err;
            worst_name = c.name;
        }
    }
    const double secs = seconds_since(t0);
    const bool pass = worst <= 1e-5 && coords >= 10 && secs < 120.0;
    return {pass, std::to_string(checks.size()) + " ops x " + std::to_string(coords) + " coords, max rel err " +
                      sci(worst) + " (" + worst_name + "), " + fmt(secs, 1) + " s"};
}

// ---------------------------------------------------------------- 3

Outcome dc_geometry() {
    const auto t0 = std::chrono::steady_clock::now();
    int crop_ok = 0, pairs = 0;
    SceneGenConfig g;
    g.height = 64;
    g.width = 96;
    const SceneSample scene = generate_scene(5, g);
    DcConfig dc;
    dc.dimension = Dimension::fov;
    dc.resize_after_crop = false;
    for (int i = 0; i < 20; ++i) {
        const double theta0 = 60.0 + 3.0 * i;
        const double theta1 = theta0 * (0.3 + 0.035 * i);
        const std::int64_t W = 96;
        const double r = std::tan(theta1 * std::numbers::pi / 360.0) / std::tan(theta0 * std::numbers::pi / 360.0);
        const auto want = static_cast<std::int64_t>(std::llround(static_cast<double>(W) * r));
        dc.native_fov_deg = theta0;
        const auto out = apply_fov(scene, theta1, dc);
        ++pairs;
        crop_ok += fov_crop_extent(W, theta1, theta0) == want && out.image.size(2) == want;
    }

    const SceneSample base = generate_scene(9, g);
    const bool identity = torch::equal(apply_fog(base, 0.0).image, base.image);
    const std::vector<double> betas{0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 50.0};
    const std::array<double, 3> L{0.9, 0.8, 0.7};
    const auto Lt = torch::tensor({L[0], L[1], L[2]}, base.image.options()).view({3, 1, 1});
    torch::Tensor prev;
    std::int64_t violations = 0;
    double final_gap = 0.0;
    for (double b : betas) {
        const auto dist = (apply_fog(base, b, L).image - Lt).abs();
        if (prev.defined()) violations += (dist > prev + 1e-12).sum().item<std::int64_t>();
        prev = dist;
        final_gap = dist.max().item<double>();
    }
    const double secs = seconds_since(t0);
    const bool pass = crop_ok == pairs && identity && violations == 0 && final_gap < 1e-6 && secs < 30.0;
    return {pass, "crop widths " + std::to_string(crop_ok) + "/" + std::to_string(pairs) + ", fog(0) identity " +
                      (identity ? "yes" : "no") + ", monotone violations " + std::to_string(violations) +
                      ", |I - L| at beta 50 " + sci(final_gap) + ", " + fmt(secs, 2) + " s"};
}

// ---------------------------------------------------------------- 4

std::map<std::string, torch::Tensor> snapshot(Trainer& t) {
    std::map<std::string, torch::Tensor> m;
    for (const auto& [n, p] : t.nets().named_parameters()) m[n] = p.detach().clone();
    return m;
}

std::set<std::string> moved(const std::map<std::string, torch::Tensor>& a, const std::map<std::string, torch::Tensor>& b) {
    std::set<std::string> out;
    for (const auto& [n, t] : a)
        if (!torch::equal(t, b.at(n))) out.insert(n.substr(0, n.find('.')));
    return out;
}

Outcome wiring() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto src = testing::tiny_scenes(100, 4);
    const auto tgt = testing::tiny_scenes(500, 4, 32, 0.06);

    TrainerConfig c = testing::tiny_config(3);
    c.lambda_adv = 0.3;
    c.lambda_inv = 0.7;
    c.lambda_spf = 0.2;
    double comp_err = 0.0;
    {
        Trainer t(c);
        for (int i = 0; i < 5; ++i) {
            const auto L = t.train_step(src, tgt).losses;
            comp_err = std::max(comp_err, std::abs(L.total - (L.task + 0.3 * L.adv + 0.7 * L.inv + 0.2 * L.spf)));
        }
    }

    auto partition = [&](bool task, bool adv, double li, double ls) {
        TrainerConfig p = testing::tiny_config(4);
        p.use_task = task;
        p.use_adv = adv;
        p.lambda_adv = adv ? 0.5 : 0.0;
        p.lambda_inv = li;
        p.lambda_spf = ls;
        Trainer t(p);
        const auto before = snapshot(t);
        t.train_step(src, tgt);
        return moved(before, snapshot(t));
    };
    const auto spf_only = partition(false, false, 0.0, 1.0);
    const auto inv_only = partition(false, false, 1.0, 0.0);
    const auto adv_only = partition(false, true, 0.0, 0.0);
    const auto task_only = partition(true, false, 0.0, 0.0);
    const auto inv_side = partition(true, true, 1.0, 0.0);
    const bool part_ok = !spf_only.count("encoder_inv") && spf_only.count("encoder_spf") &&
                         !inv_only.count("encoder_spf") && inv_only.count("encoder_inv") && !inv_only.count("sar") &&
                         !adv_only.count("encoder_spf") && adv_only.count("encoder_inv") &&
                         !task_only.count("encoder_spf") && task_only.count("encoder_inv") &&
                         !inv_side.count("encoder_spf");

    auto scrambled = tgt;
    for (auto& s : scrambled) s.mask.fill_(200);
    Trainer a(c), b(c);
    const bool labels_unused = a.train_step(src, tgt).losses == b.train_step(src, scrambled).losses;
    TrainerConfig no_adv = c;
    no_adv.use_adv = false;
    Trainer d(no_adv), e(no_adv);
    const bool images_unused = d.train_step(src, tgt).losses.task ==
                               e.train_step(src, testing::tiny_scenes(900, 4, 32, 0.1)).losses.task;
    const double secs = seconds_since(t0);
    const bool pass = comp_err <= 1e-6 && part_ok && labels_unused && images_unused && secs < 60.0;
    return {pass, "composition err " + sci(comp_err) + ", partition " + (part_ok ? "ok" : "broken") +
                      ", target labels unused " + (labels_unused ? "yes" : "no") + ", task blind to target " +
                      (images_unused ? "yes" : "no") + ", " + fmt(secs, 2) + " s"};
}

// ---------------------------------------------------------------- 5-9

struct DeskRuns {
    fs::path root;
    std::map<std::string, Preset> presets;
    std::map<std::string, DataPaths> data;

    const Preset& preset(const std::string& name) {
        if (!presets.count(name)) {
            presets.emplace(name, make_preset(name));
            std::cerr << "[acceptance] data for " << name << "\n";
            data.emplace(name, ensure_data(presets.at(name).data, root / name / "data"));
        }
        return presets.at(name);
    }

    RunReport run(const std::string& preset_name, const std::string& variant, std::uint64_t seed,
                  const std::function<void(TrainerConfig&)>& tweak = {}, const std::string& tag = "") {
        const Preset& p = preset(preset_name);
        const std::string name = (tag.empty() ? variant : tag) + "-seed" + std::to_string(seed);
        RunRequest req;
        req.config = experiment_config(p, data.at(preset_name), variant, seed, root / preset_name / "runs" / name);
        if (tweak) tweak(req.config);
        req.variant = variant;
        req.probe_samples = std::min<std::int64_t>(400, p.data.source_size);
        const auto t0 = std::chrono::steady_clock::now();
        RunReport r = run_experiment(req);
        std::cerr << "[acceptance] " << preset_name << "/" << name << ": mIoU " << fmt(100 * r.eval.overall.mean, 2)
                  << ", probe spf " << fmt(r.probe.spf) << " inv " << fmt(r.probe.inv) << " (" << fmt(seconds_since(t0), 0)
                  << " s)\n";
        return r;
    }
};

const std::vector<std::uint64_t> kSeeds{0, 1, 2};

Outcome adaptation_ordering(DeskRuns& runs) {
    std::map<std::string, std::vector<double>> m;
    for (auto seed : kSeeds)
        for (const std::string v : {"baseline", "dc", "dc_sar"}) m[v].push_back(100.0 * runs.run("fog-desk", v, seed).eval.overall.mean);
    const double base = median(m["baseline"]), dc = median(m["dc"]), sar = median(m["dc_sar"]);
    const bool pass = dc >= base + 2.0 && sar >= dc + 1.0;
    return {pass, "median mIoU baseline " + fmt(base, 2) + ", +DC " + fmt(dc, 2) + " (needs >= " + fmt(base + 2.0, 2) +
                      "), +DC+SAR " + fmt(sar, 2) + " (needs >= " + fmt(dc + 1.0, 2) + ")"};
}

Outcome disentanglement(DeskRuns& runs) {
    std::vector<double> spf, inv;
    for (auto seed : kSeeds) {
        const auto r = runs.run("fog-desk", "dc_sar", seed);
        spf.push_back(r.probe.spf);
        inv.push_back(r.probe.inv);
    }
    const double s = median(spf), i = median(inv);
    return {s >= 0.80 && i <= 0.40, "median probe accuracy z_spf " + fmt(s) + " (needs >= 0.800), z_inv " + fmt(i) +
                                        " (needs <= 0.400)"};
}

Outcome intra_gap_reduction(DeskRuns& runs) {
    int wins = 0;
    std::string detail;
    for (auto seed : kSeeds) {
        const auto b = runs.run("fog-desk-multi", "baseline", seed).eval;
        const auto s = runs.run("fog-desk-multi", "dc_sar", seed).eval;
        if (!b.intra_gap || !s.intra_gap) return {false, "validation split lacks multiple domainness bins"};
        wins += *s.intra_gap <= *b.intra_gap;
        detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " +
                  fmt(100 * *b.intra_gap, 2) + " -> " + fmt(100 * *s.intra_gap, 2);
    }
    return {wins >= 2, "intra-gap baseline -> +DC+SAR: " + detail + " (" + std::to_string(wins) + "/3 reduced)"};
}

Outcome lambda_spf_sensitivity(DeskRuns& runs) {
    const std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0};
    std::map<double, double> med;
    std::ostringstream table;
    table << "| lambda_spf | seed 0 | seed 1 | seed 2 | median mIoU |\n|---|---|---|---|---|\n";
    for (double l : lambdas) {
        std::vector<double> v;
        for (auto seed : kSeeds) {
            if (l == 0.1) {
                v.push_back(100.0 * runs.run("fog-desk", "dc_sar", seed).eval.overall.mean);
                continue;
            }
            std::ostringstream tag;
            tag << "dc_sar_lspf" << l;
            v.push_back(100.0 * runs.run("fog-desk", "dc_sar", seed, [l](TrainerConfig& c) { c.lambda_spf = l; }, tag.str())
                                    .eval.overall.mean);
        }
        med[l] = median(v);
        table << "| " << l << " | " << fmt(v[0], 2) << " | " << fmt(v[1], 2) << " | " << fmt(v[2], 2) << " | "
              << fmt(med[l], 2) << " |\n";
    }
    std::ofstream(runs.root / "lambda_spf.md") << table.str();
    std::cout << table.str();
    double best = -1.0;
    for (const auto& [l, v] : med) best = std::max(best, v);
    std::string curve;
    for (const auto& [l, v] : med) curve += (curve.empty() ? "" : ", ") + fmt(l, 2) + ": " + fmt(v, 2);
    return {med[0.1] >= best - 0.5, "median mIoU by lambda_spf {" + curve + "}, best " + fmt(best, 2)};
}

Outcome inference_export(DeskRuns& runs) {
    const auto r = runs.run("fog-desk", "dc_sar", 0);
    const fs::path ckpt = r.run_dir / "checkpoint.sad";
    const fs::path bundle = runs.root / "fog-desk" / "model.sad";
    const std::int64_t exported = export_inference(ckpt, bundle);
    const Archive a = read_archive(bundle);
    int foreign = 0;
    for (const auto& [name, t] : a.arrays)
        foreign += name.rfind("encoder_inv.", 0) != 0 && name.rfind("taskhead.", 0) != 0;

    auto [cfg, nets] = load_networks(ckpt);
    std::int64_t full = 0;
    for (const auto& [name, t] : nets.named_parameters()) full += t.numel();
    const Dataset val = load_dataset(runs.data.at("fog-desk").target_val);
    const std::vector<SceneSample> probe(val.samples.begin(), val.samples.begin() + 16);
    const auto images = stack_images(probe, cfg.dtype());
    InferenceModel m = load_inference(bundle);
    const auto got = m.predict(images);
    const auto want = predict_masks(nets.encoder_inv, nets.taskhead, images);
    const double agree = got.eq(want).to(torch::kFloat64).mean().item<double>();
    const double ratio = static_cast<double>(exported) / static_cast<double>(full);
    const bool pass = foreign == 0 && agree == 1.0 && ratio < 0.40 && m.parameter_count() == exported;
    return {pass, "foreign entries " + std::to_string(foreign) + ", argmax agreement " + fmt(100 * agree, 2) +
                      "% on 16 images, parameters " + std::to_string(exported) + "/" + std::to_string(full) + " = " +
                      fmt(100 * ratio, 1) + "%"};
}

// ---------------------------------------------------------------- 10

bool same_files(const fs::path& a, const fs::path& b, std::int64_t& count) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (const auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) return false;
    count = static_cast<std::int64_t>(fa.size());
    for (const auto& rel : fa) {
        std::ifstream x(a / rel, std::ios::binary), y(b / rel, std::ios::binary);
        const std::string sx((std::istreambuf_iterator<char>(x)), {}), sy((std::istreambuf_iterator<char>(y)), {});
        if (sx != sy) return false;
    }
    return true;
}

Outcome determinism(DeskRuns& runs) {
    const Preset& p = runs.preset("fog-desk");
    TrainerConfig c = experiment_config(p, runs.data.at("fog-desk"), "dc_sar", 7, runs.root / "determinism");
    c.precision = Precision::f64;
    const Dataset source = load_dataset(c.source_manifest);
    const Dataset target = load_dataset(c.target_manifest);
    auto first_50 = [&]() {
        Trainer t(c);
        std::vector<LossBundle> out;
        std::vector<SceneSample> s, g;
        while (out.size() < 50) {
            s.clear();
            g.clear();
            for (auto i : t.sample_indices(source.samples.size())) s.push_back(source.samples[i]);
            for (auto i : t.sample_indices(target.samples.size())) g.push_back(target.samples[i]);
            out.push_back(t.train_step(s, g).losses);
        }
        return out;
    };
    const auto a = first_50(), b = first_50();
    int equal = 0;
    for (std::size_t i = 0; i < a.size(); ++i) equal += a[i] == b[i];

    SplitConfig d = p.data;
    d.source_size = 24;
    d.target_size = 12;
    d.target_val_size = 12;
    const fs::path da = runs.root / "determinism" / "data_a", db = runs.root / "determinism" / "data_b";
    fs::remove_all(da);
    fs::remove_all(db);
    build_splits(d, da);
    build_splits(d, db);
    std::int64_t files = 0;
    const bool data_same = same_files(da, db, files);
    fs::remove_all(runs.root / "determinism");
    return {equal == 50 && data_same, std::to_string(equal) + "/50 loss bundles bit-identical (64-bit), dataset " +
                                          std::to_string(files) + " files " + (data_same ? "identical" : "differ")};
}

} // namespace

int main(int argc, char** argv) {
    torch::set_num_threads(1);
    CLI::App app{"Acceptance criteria"};
    std::string work = "acceptance-work";
    std::vector<int> only;
    app.add_option("--work-dir", work, "Cache directory for datasets and desk-scale runs");
    app.add_option("--only", only, "Subset of criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    DeskRuns runs;
    runs.root = fs::absolute(work);
    fs::create_directories(runs.root);
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, loss_oracles},
        {2, gradient_checks},
        {3, dc_geometry},
        {4, wiring},
        {5, [&] { return adaptation_ordering(runs); }},
        {6, [&] { return disentanglement(runs); }},
        {7, [&] { return intra_gap_reduction(runs); }},
        {8, [&] { return lambda_spf_sensitivity(runs); }},
        {9, [&] { return inference_export(runs); }},
        {10, [&] { return determinism(runs); }},
    };
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
