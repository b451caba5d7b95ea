#include "sad/domainness.hpp"

#include "sad/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sad {
namespace {

namespace F = torch::nn::functional;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

constexpr const char* kRainPointer =
    "rain rendering is not supported; see README section 'Domainness dimensions'";

} // namespace

void DcConfig::validate() const {
    if (!(lo < hi)) throw ConfigError("domainness range requires lo < hi");
    if (n_bins < 2) throw ConfigError("domainness creator needs at least 2 bins");
    for (double l : atmospheric_light)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("atmospheric light must lie in [0, 1]");
    if (!(native_fov_deg > 0.0 && native_fov_deg < 180.0))
        throw ConfigError("native FoV must lie in (0, 180) degrees");
    switch (dimension) {
    case Dimension::fog:
        if (lo < 0.0) throw ConfigError("fog attenuation range must be non-negative");
        break;
    case Dimension::fov:
        if (!(lo > 0.0) || hi > native_fov_deg)
            throw ConfigError("FoV range must lie in (0, native_fov_deg]");
        break;
    case Dimension::rain: throw UnsupportedError(kRainPointer);
    }
}

int bin_index(double value, const DcConfig& cfg) {
    const double pos = cfg.n_bins * (value - cfg.lo) / (cfg.hi - cfg.lo);
    if (!(pos >= 0.0)) return 0; // also catches NaN
    const double b = std::floor(pos);
    return b >= cfg.n_bins - 1 ? cfg.n_bins - 1 : static_cast<int>(b);
}

DomainnessSpec bin_domainness(double value, const DcConfig& cfg) {
    DomainnessSpec spec;
    spec.dimension = cfg.dimension;
    spec.value = value;
    spec.n_bins = cfg.n_bins;
    spec.bin = bin_index(value, cfg);
    spec.onehot.assign(cfg.n_bins, 0.0);
    spec.onehot[spec.bin] = 1.0;
    return spec;
}

SceneSample apply_fog(const SceneSample& sample, double beta,
                      const std::array<double, 3>& atmospheric_light) {
    if (!(beta >= 0.0)) throw DomainError("fog attenuation beta must be >= 0");
    SceneSample out = sample;
    if (beta == 0.0) { // t == 1 everywhere
        out.image = sample.image.clone();
        return out;
    }
    const auto opts = sample.image.options();
    auto light = torch::tensor({atmospheric_light[0], atmospheric_light[1], atmospheric_light[2]},
                               torch::TensorOptions().dtype(torch::kFloat64))
                     .to(opts)
                     .view({3, 1, 1});
    auto transmission = torch::exp(sample.depth.to(opts.dtype()) * (-beta)).unsqueeze(0);
    // L + (I - L) * t
    out.image = light + (sample.image - light) * transmission;
    return out;
}

std::int64_t fov_crop_extent(std::int64_t extent, double theta1_deg, double theta0_deg) {
    const double ratio = std::tan(deg2rad(theta1_deg) / 2.0) / std::tan(deg2rad(theta0_deg) / 2.0);
    const auto w = static_cast<std::int64_t>(std::llround(extent * ratio));
    return std::clamp<std::int64_t>(w, 1, extent);
}

SceneSample apply_fov(const SceneSample& sample, double theta1_deg, const DcConfig& cfg) {
    const double theta0 = cfg.native_fov_deg;
    if (!(theta1_deg > 0.0)) throw DomainError("target FoV must be positive");
    if (theta1_deg > theta0) throw DomainError("FoV transform only narrows the field of view");

    const std::int64_t H = sample.height(), W = sample.width();
    const std::int64_t w = fov_crop_extent(W, theta1_deg, theta0);
    const std::int64_t h = fov_crop_extent(H, theta1_deg, theta0);
    const std::int64_t x0 = (W - w) / 2, y0 = (H - h) / 2;

    SceneSample out = sample;
    out.meta.fov_x_deg = theta1_deg;
    out.image = sample.image.slice(1, y0, y0 + h).slice(2, x0, x0 + w).contiguous();
    out.depth = sample.depth.slice(0, y0, y0 + h).slice(1, x0, x0 + w).contiguous();
    out.mask = sample.mask.slice(0, y0, y0 + h).slice(1, x0, x0 + w).contiguous();
    if (!cfg.resize_after_crop || (w == W && h == H)) return out;

    const std::vector<std::int64_t> size{H, W};
    out.image = F::interpolate(out.image.unsqueeze(0), F::InterpolateFuncOptions()
                                                           .size(size)
                                                           .mode(torch::kBilinear)
                                                           .align_corners(false))
                    .squeeze(0);
    const auto nearest = F::InterpolateFuncOptions().size(size).mode(torch::kNearest);
    out.depth = F::interpolate(out.depth.unsqueeze(0).unsqueeze(0), nearest).squeeze(0).squeeze(0);
    out.mask = F::interpolate(out.mask.to(torch::kFloat32).unsqueeze(0).unsqueeze(0), nearest)
                   .squeeze(0)
                   .squeeze(0)
                   .to(torch::kUInt8);
    return out;
}

DomainnessSpec sample_domainness(Rng& rng, const DcConfig& cfg) {
    cfg.validate();
    return bin_domainness(rng.uniform(cfg.lo, cfg.hi), cfg);
}

std::pair<SceneSample, DomainnessSpec> diversify_at(const SceneSample& sample, double value,
                                                    const DcConfig& cfg) {
    DomainnessSpec spec = bin_domainness(value, cfg);
    SceneSample out;
    switch (cfg.dimension) {
    case Dimension::fog: out = apply_fog(sample, value, cfg.atmospheric_light); break;
    case Dimension::fov: out = apply_fov(sample, value, cfg); break;
    case Dimension::rain: throw UnsupportedError(kRainPointer);
    }
    out.meta.domainness = spec;
    return {std::move(out), std::move(spec)};
}

std::pair<SceneSample, DomainnessSpec> diversify(const SceneSample& sample, Rng& rng,
                                                 const DcConfig& cfg) {
    const DomainnessSpec drawn = sample_domainness(rng, cfg);
    return diversify_at(sample, drawn.value, cfg);
}

} // namespace sad
