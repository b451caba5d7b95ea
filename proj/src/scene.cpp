#include "sad/scene.hpp"

#include "sad/error.hpp"
#include "sad/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sad {
namespace {

// Class-conditional base colours; per-shape jitter is added on top.
constexpr std::array<std::array<double, 3>, 5> kClassColors{{
    {0.85, 0.25, 0.20},
    {0.20, 0.55, 0.85},
    {0.25, 0.75, 0.30},
    {0.85, 0.75, 0.20},
    {0.60, 0.30, 0.75},
}};
constexpr double kColorJitter = 0.2;
constexpr double kCrossArm = 0.3;
constexpr double kRingInner = 0.55;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// (x, y) rotated into the shape's local frame.
std::pair<double, double> to_local(const Shape& s, double x, double y) {
    const double dx = x - s.cx;
    const double dy = y - s.cy;
    const double c = std::cos(s.angle);
    const double sn = std::sin(s.angle);
    return {c * dx + sn * dy, -sn * dx + c * dy};
}

} // namespace

std::string_view to_string(Dimension d) noexcept {
    switch (d) {
    case Dimension::fog: return "fog";
    case Dimension::fov: return "fov";
    case Dimension::rain: return "rain";
    }
    return "unknown";
}

Dimension parse_dimension(std::string_view name) {
    if (name == "fog") return Dimension::fog;
    if (name == "fov") return Dimension::fov;
    if (name == "rain") return Dimension::rain;
    throw ConfigError("unknown domainness dimension '" + std::string(name) + "'");
}

bool identical(const SceneSample& a, const SceneSample& b) {
    return a.meta == b.meta && a.image.sizes() == b.image.sizes() && a.image.equal(b.image) &&
           a.depth.sizes() == b.depth.sizes() && a.depth.equal(b.depth) &&
           a.mask.sizes() == b.mask.sizes() && a.mask.equal(b.mask);
}

void SceneGenConfig::validate() const {
    if (height <= 0 || width <= 0) throw ConfigError("scene size must be positive");
    if (num_classes < 2 || num_classes > 6)
        throw ConfigError("num_classes must be in [2, 6] (background + up to 5 shape classes)");
    if (min_shapes < 0 || max_shapes < min_shapes) throw ConfigError("invalid shape count range");
    if (!(depth_min > 0.0) || !(depth_min < depth_max))
        throw ConfigError("depth range requires 0 < depth_min < depth_max");
    if (!(fov_x_deg > 0.0) || fov_x_deg >= 180.0) throw ConfigError("fov_x_deg must be in (0, 180)");
    if (noise_sigma < 0.0) throw ConfigError("noise_sigma must be non-negative");
}

bool covers(const Shape& s, double x, double y) {
    const double r = s.size;
    switch (s.kind) {
    case ShapeKind::circle: {
        const double dx = x - s.cx, dy = y - s.cy;
        return dx * dx + dy * dy <= r * r;
    }
    case ShapeKind::ring: {
        const double dx = x - s.cx, dy = y - s.cy;
        const double d2 = dx * dx + dy * dy;
        return d2 <= r * r && d2 >= kRingInner * kRingInner * r * r;
    }
    case ShapeKind::rectangle: {
        const auto [u, v] = to_local(s, x, y);
        return std::abs(u) <= r && std::abs(v) <= r * s.aspect;
    }
    case ShapeKind::cross: {
        const auto [u, v] = to_local(s, x, y);
        const double arm = kCrossArm * r;
        return (std::abs(u) <= r && std::abs(v) <= arm) || (std::abs(v) <= r && std::abs(u) <= arm);
    }
    case ShapeKind::triangle: {
        // Equilateral triangle inscribed in the circumcircle, edge-function test.
        std::array<double, 3> vx{}, vy{};
        for (int k = 0; k < 3; ++k) {
            const double a = s.angle + k * 2.0 * std::numbers::pi / 3.0;
            vx[k] = s.cx + r * std::cos(a);
            vy[k] = s.cy + r * std::sin(a);
        }
        bool has_neg = false, has_pos = false;
        for (int k = 0; k < 3; ++k) {
            const int j = (k + 1) % 3;
            const double e = (vx[j] - vx[k]) * (y - vy[k]) - (vy[j] - vy[k]) * (x - vx[k]);
            has_neg |= e < 0.0;
            has_pos |= e > 0.0;
        }
        return !(has_neg && has_pos);
    }
    }
    return false;
}

double backdrop_depth(int y, const SceneGenConfig& cfg) {
    const double s = cfg.height > 1 ? double(y) / double(cfg.height - 1) : 1.0;
    return cfg.depth_max * std::pow(cfg.depth_min / cfg.depth_max, s);
}

SceneLayout scene_layout(std::uint64_t seed, const SceneGenConfig& cfg) {
    cfg.validate();
    Rng rng = Rng::stream(seed, 0);
    SceneLayout layout;

    auto& bd = layout.backdrop;
    for (int c = 0; c < 3; ++c) {
        bd.top[c] = rng.uniform(0.3, 0.7);
        bd.bottom[c] = rng.uniform(0.15, 0.55);
    }
    bd.texture_amp = rng.uniform(0.02, 0.08);
    bd.texture_freq = rng.uniform(0.1, 0.5);
    bd.texture_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    const int n_kinds = cfg.num_classes - 1;
    const int n_shapes = static_cast<int>(rng.range(cfg.min_shapes, cfg.max_shapes));
    const double extent = std::min(cfg.height, cfg.width);
    const double log_lo = std::log(cfg.depth_min);
    const double log_hi = std::log(cfg.depth_max);
    layout.shapes.reserve(n_shapes);
    for (int i = 0; i < n_shapes; ++i) {
        Shape s;
        const int kind = static_cast<int>(rng.below(n_kinds));
        s.kind = static_cast<ShapeKind>(kind);
        s.class_id = kind + 1;
        s.cx = rng.uniform(0.0, cfg.width);
        s.cy = rng.uniform(0.0, cfg.height);
        s.size = rng.uniform(0.06, 0.2) * extent;
        s.aspect = rng.uniform(0.4, 1.0);
        s.angle = rng.uniform(0.0, std::numbers::pi);
        s.depth = std::exp(rng.uniform(log_lo, log_hi));
        for (int c = 0; c < 3; ++c)
            s.color[c] = clamp01(kClassColors[kind][c] + rng.uniform(-kColorJitter, kColorJitter));
        layout.shapes.push_back(s);
    }
    return layout;
}

SceneSample generate_scene(std::uint64_t seed, const SceneGenConfig& cfg) {
    const SceneLayout layout = scene_layout(seed, cfg);
    Rng noise = Rng::stream(seed, 1);
    const int H = cfg.height, W = cfg.width;

    auto image = torch::empty({3, H, W}, torch::kFloat32);
    auto depth = torch::empty({H, W}, torch::kFloat32);
    auto mask = torch::zeros({H, W}, torch::kUInt8);
    auto img = image.accessor<float, 3>();
    auto dep = depth.accessor<float, 2>();
    auto msk = mask.accessor<std::uint8_t, 2>();
    const Backdrop& bd = layout.backdrop;

    for (int y = 0; y < H; ++y) {
        const double s = H > 1 ? double(y) / double(H - 1) : 0.0;
        const double bg_depth = backdrop_depth(y, cfg);
        for (int x = 0; x < W; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            // z-buffer: the front-most covering shape wins; ties go to the lower index
            int front = -1;
            double front_depth = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < layout.shapes.size(); ++i) {
                const Shape& sh = layout.shapes[i];
                if (sh.depth < front_depth && covers(sh, px, py)) {
                    front = static_cast<int>(i);
                    front_depth = sh.depth;
                }
            }
            std::array<double, 3> rgb;
            if (front >= 0) {
                const Shape& sh = layout.shapes[front];
                rgb = sh.color;
                dep[y][x] = static_cast<float>(sh.depth);
                msk[y][x] = static_cast<std::uint8_t>(sh.class_id);
            } else {
                const double tex = bd.texture_amp * std::sin(bd.texture_freq * px + bd.texture_phase) *
                                   std::sin(0.7 * bd.texture_freq * py);
                for (int c = 0; c < 3; ++c) rgb[c] = bd.top[c] * (1.0 - s) + bd.bottom[c] * s + tex;
                dep[y][x] = static_cast<float>(bg_depth);
            }
            for (int c = 0; c < 3; ++c)
                img[c][y][x] = static_cast<float>(clamp01(rgb[c] + cfg.noise_sigma * noise.normal()));
        }
    }

    SceneSample out;
    out.image = image;
    out.depth = depth;
    out.mask = mask;
    out.meta.seed = seed;
    out.meta.fov_x_deg = cfg.fov_x_deg;
    return out;
}

} // namespace sad
