#include "sad/dataset.hpp"

#include "sad/error.hpp"
#include "sad/image_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace sad {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string sample_id(std::int64_t index) {
    std::ostringstream os;
    os << std::setw(6) << std::setfill('0') << index;
    return os.str();
}

std::uint16_t quantize(double v, double scale, double max) {
    return static_cast<std::uint16_t>(std::clamp(std::nearbyint(v * scale), 0.0, max));
}

} // namespace

std::string_view to_string(DomainTag tag) noexcept {
    switch (tag) {
    case DomainTag::source: return "source";
    case DomainTag::source_diversified: return "source-diversified";
    case DomainTag::target: return "target";
    }
    return "unknown";
}

DomainTag parse_domain_tag(std::string_view name) {
    if (name == "source") return DomainTag::source;
    if (name == "source-diversified") return DomainTag::source_diversified;
    if (name == "target") return DomainTag::target;
    throw DataError("unknown domain tag '" + std::string(name) + "'");
}

void write_manifest(const DatasetManifest& m) {
    json j;
    j["root"] = ".";
    j["split"] = m.split;
    j["sample_count"] = m.sample_count;
    j["num_classes"] = m.num_classes;
    j["image_size"] = {m.height, m.width};
    j["domain"] = std::string(to_string(m.domain));
    j["files"] = {{"image", "<id>_img.png (8-bit RGB)"},
                  {"depth", "<id>_depth.png (16-bit gray, value = depth_m * 256)"},
                  {"mask", "<id>_mask.png (8-bit class indices, 255 = ignore)"}};
    j["depth_scale"] = kDepthScale;
    if (m.dimension) j["dimension"] = std::string(to_string(*m.dimension));
    json bins = json::array();
    for (const auto& b : m.bins) bins.push_back({{"bin", b.bin}, {"value", b.value}, {"count", b.count}});
    j["domainness_bins"] = bins;
    json samples = json::array();
    for (const auto& s : m.samples) {
        json r = {{"id", s.id}, {"seed", s.seed}};
        if (s.value) r["value"] = *s.value;
        if (s.bin) r["bin"] = *s.bin;
        samples.push_back(r);
    }
    j["samples"] = samples;

    fs::create_directories(m.root);
    std::ofstream os(m.root / "manifest.json");
    if (!os) throw IoError("cannot write manifest in '" + m.root.string() + "'");
    os << j.dump(1) << '\n';
}

DatasetManifest read_manifest(const fs::path& path) {
    const fs::path file = fs::is_directory(path) ? path / "manifest.json" : path;
    std::ifstream is(file);
    if (!is) throw DataError("manifest not found: " + file.string());
    DatasetManifest m;
    try {
        const json j = json::parse(is);
        m.root = file.parent_path() / j.value("root", std::string("."));
        m.root = m.root.lexically_normal();
        m.split = j.at("split").get<std::string>();
        m.sample_count = j.at("sample_count").get<std::int64_t>();
        m.num_classes = j.at("num_classes").get<int>();
        m.height = j.at("image_size").at(0).get<int>();
        m.width = j.at("image_size").at(1).get<int>();
        m.domain = parse_domain_tag(j.at("domain").get<std::string>());
        if (j.contains("dimension")) m.dimension = parse_dimension(j["dimension"].get<std::string>());
        for (const auto& b : j.value("domainness_bins", json::array()))
            m.bins.push_back({b.at("bin").get<int>(), b.at("value").get<double>(),
                              b.at("count").get<std::int64_t>()});
        for (const auto& r : j.at("samples")) {
            SampleRecord s;
            s.id = r.at("id").get<std::string>();
            s.seed = r.at("seed").get<std::uint64_t>();
            if (r.contains("value")) s.value = r["value"].get<double>();
            if (r.contains("bin")) s.bin = r["bin"].get<int>();
            m.samples.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw DataError("malformed manifest '" + file.string() + "': " + e.what());
    }
    if (m.sample_count < 1) throw DataError("manifest lists no samples: " + file.string());
    if (static_cast<std::int64_t>(m.samples.size()) != m.sample_count)
        throw DataError("manifest sample_count disagrees with its sample list: " + file.string());
    return m;
}

void write_sample(const fs::path& dir, const std::string& id, const SceneSample& sample) {
    const int H = static_cast<int>(sample.height()), W = static_cast<int>(sample.width());
    auto img = sample.image.to(torch::kFloat64).contiguous();
    auto dep = sample.depth.to(torch::kFloat64).contiguous();
    auto msk = sample.mask.contiguous();
    auto ia = img.accessor<double, 3>();
    auto da = dep.accessor<double, 2>();
    auto ma = msk.accessor<std::uint8_t, 2>();

    io::RawImage rgb{W, H, 3, 8, std::vector<std::uint16_t>(std::size_t(W) * H * 3)};
    io::RawImage depth{W, H, 1, 16, std::vector<std::uint16_t>(std::size_t(W) * H)};
    io::RawImage mask{W, H, 1, 8, std::vector<std::uint16_t>(std::size_t(W) * H)};
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t p = std::size_t(y) * W + x;
            for (int c = 0; c < 3; ++c) rgb.samples[3 * p + c] = quantize(ia[c][y][x], 255.0, 255.0);
            depth.samples[p] = quantize(da[y][x], kDepthScale, 65535.0);
            mask.samples[p] = ma[y][x];
        }
    }
    fs::create_directories(dir);
    io::write_png(dir / (id + "_img.png"), rgb);
    io::write_png(dir / (id + "_depth.png"), depth);
    io::write_png(dir / (id + "_mask.png"), mask);
}

SceneSample read_sample(const fs::path& dir, const std::string& id) {
    const io::RawImage rgb = io::read_png(dir / (id + "_img.png"));
    const io::RawImage depth = io::read_png(dir / (id + "_depth.png"));
    const io::RawImage mask = io::read_png(dir / (id + "_mask.png"));
    if (rgb.channels != 3 || rgb.bit_depth != 8) throw DataError(id + ": image must be 8-bit RGB");
    if (depth.channels != 1 || depth.bit_depth != 16) throw DataError(id + ": depth must be 16-bit gray");
    if (mask.channels != 1 || mask.bit_depth != 8) throw DataError(id + ": mask must be 8-bit gray");
    const int H = rgb.height, W = rgb.width;
    if (depth.height != H || depth.width != W || mask.height != H || mask.width != W)
        throw DataError(id + ": image, depth and mask sizes differ");

    SceneSample s;
    s.image = torch::empty({3, H, W}, torch::kFloat32);
    s.depth = torch::empty({H, W}, torch::kFloat32);
    s.mask = torch::empty({H, W}, torch::kUInt8);
    auto ia = s.image.accessor<float, 3>();
    auto da = s.depth.accessor<float, 2>();
    auto ma = s.mask.accessor<std::uint8_t, 2>();
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            const std::size_t p = std::size_t(y) * W + x;
            for (int c = 0; c < 3; ++c) ia[c][y][x] = static_cast<float>(rgb.samples[3 * p + c] / 255.0);
            da[y][x] = static_cast<float>(depth.samples[p] / kDepthScale);
            ma[y][x] = static_cast<std::uint8_t>(mask.samples[p]);
        }
    }
    return s;
}

Dataset load_dataset(const fs::path& manifest_path) {
    Dataset ds;
    ds.manifest = read_manifest(manifest_path);
    const auto& m = ds.manifest;
    ds.samples.reserve(m.samples.size());
    for (const auto& rec : m.samples) {
        SceneSample s = read_sample(m.root, rec.id);
        if (s.height() != m.height || s.width() != m.width)
            throw DataError(rec.id + ": size disagrees with manifest");
        const auto mx = s.mask.max().item<int>();
        if (mx >= m.num_classes && mx != kIgnoreLabel)
            throw DataError(rec.id + ": mask class out of range");
        s.meta.seed = rec.seed;
        if (rec.value && m.dimension) {
            DomainnessSpec spec;
            spec.dimension = *m.dimension;
            spec.value = *rec.value;
            spec.bin = rec.bin.value_or(0);
            spec.n_bins = std::max<int>(static_cast<int>(m.bins.size()), spec.bin + 1);
            spec.onehot.assign(spec.n_bins, 0.0);
            spec.onehot[spec.bin] = 1.0;
            s.meta.domainness = spec;
        }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

void SplitConfig::validate() const {
    scene.validate();
    dc_config().validate();
    if (source_size < 1 || target_size < 1 || target_val_size < 1)
        throw ConfigError("split sizes must be >= 1");
    constexpr std::int64_t kSplitStride = std::int64_t(1) << 32;
    if (source_size >= kSplitStride || target_size >= kSplitStride || target_val_size >= kSplitStride)
        throw ConfigError("split sizes must be < 2^32");
    if (target_values.empty()) throw ConfigError("target domainness list is empty");
    if (dimension == Dimension::fov && !resize_after_crop)
        throw ConfigError("fov splits need resize_after_crop so every sample keeps the scene size");
    for (double v : target_values) {
        if (dimension == Dimension::fog && v < 0.0)
            throw ConfigError("target fog attenuation must be non-negative");
        if (dimension == Dimension::fov && (!(v > 0.0) || v > scene.fov_x_deg))
            throw ConfigError("target FoV must lie in (0, native FoV]");
        if (strict_unseen && v >= train_lo && v <= train_hi) {
            std::ostringstream os;
            os << "target domainness " << v << " lies inside the training sampling range [" << train_lo
               << ", " << train_hi << "]";
            throw ValidationError(os.str());
        }
    }
}

DcConfig SplitConfig::dc_config() const {
    DcConfig dc;
    dc.dimension = dimension;
    dc.lo = train_lo;
    dc.hi = train_hi;
    dc.n_bins = n_bins;
    dc.atmospheric_light = atmospheric_light;
    dc.native_fov_deg = scene.fov_x_deg;
    dc.resize_after_crop = resize_after_crop;
    return dc;
}

std::uint64_t split_seed(std::uint64_t base, int split_index, std::int64_t index) {
    return base + (std::uint64_t(split_index) << 32) + std::uint64_t(index);
}

SplitManifests build_splits(const SplitConfig& cfg, const fs::path& out) {
    cfg.validate();
    const DcConfig dc = cfg.dc_config();

    // Target-side bins index the distinct target values in ascending order.
    std::vector<double> distinct(cfg.target_values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    auto target_bin = [&](double v) {
        return static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin());
    };

    auto make = [&](const std::string& split, int split_index, std::int64_t size, bool is_target) {
        DatasetManifest m;
        m.root = out / split;
        m.split = split;
        m.sample_count = size;
        m.num_classes = cfg.scene.num_classes;
        m.height = cfg.scene.height;
        m.width = cfg.scene.width;
        m.domain = is_target ? DomainTag::target : DomainTag::source;
        if (is_target) {
            m.dimension = cfg.dimension;
            for (std::size_t b = 0; b < distinct.size(); ++b)
                m.bins.push_back({static_cast<int>(b), distinct[b], 0});
        }
        for (std::int64_t i = 0; i < size; ++i) {
            SampleRecord rec;
            rec.id = sample_id(i);
            rec.seed = split_seed(cfg.seed, split_index, i);
            SceneSample s = generate_scene(rec.seed, cfg.scene);
            if (is_target) {
                const double v = cfg.target_values[i % cfg.target_values.size()];
                s = diversify_at(s, v, dc).first;
                rec.value = v;
                rec.bin = target_bin(v);
                ++m.bins[*rec.bin].count;
            }
            write_sample(m.root, rec.id, s);
            m.samples.push_back(std::move(rec));
        }
        write_manifest(m);
        return m;
    };

    SplitManifests result;
    result.source = make("source", 0, cfg.source_size, false);
    result.target = make("target", 1, cfg.target_size, true);
    result.target_val = make("target_val", 2, cfg.target_val_size, true);
    return result;
}

} // namespace sad
