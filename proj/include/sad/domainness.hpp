#pragma once

#include "sad/rng.hpp"
#include "sad/types.hpp"

#include <array>
#include <utility>
#include <vector>

namespace sad {

/// Free parameters of the domainness creator.
struct DcConfig {
    Dimension dimension = Dimension::fog;
    double lo = 0.0;   // sampling range of the domainness value
    double hi = 0.04;
    int n_bins = 4;
    std::array<double, 3> atmospheric_light{0.9, 0.9, 0.9};
    double native_fov_deg = 90.0; // theta_0 of the source camera
    bool resize_after_crop = true;

    void validate() const;
};

/// Equal-width bin of `value` over [cfg.lo, cfg.hi], clamped to [0, N-1].
int bin_index(double value, const DcConfig& cfg);

/// The full label for a known domainness value.
DomainnessSpec bin_domainness(double value, const DcConfig& cfg);

/// Homogeneous fog: out = img * t + L * (1 - t) with t = exp(-beta * depth).
/// Depth and mask pass through; `meta.domainness` is left for the caller.
SceneSample apply_fog(const SceneSample& sample, double beta,
                      const std::array<double, 3>& atmospheric_light = {0.9, 0.9, 0.9});

/// Width of the centre crop that narrows the horizontal FoV from theta_0 to
/// theta_1 under a pinhole model: round(W * tan(theta_1/2) / tan(theta_0/2)).
std::int64_t fov_crop_extent(std::int64_t extent, double theta1_deg, double theta0_deg);

/// Narrow the field of view to theta1 by centre cropping (aspect preserved),
/// optionally resampling back to the native size.
SceneSample apply_fov(const SceneSample& sample, double theta1_deg, const DcConfig& cfg);

/// Draw a value uniformly over [lo, hi] and label it.
DomainnessSpec sample_domainness(Rng& rng, const DcConfig& cfg);

/// Apply the configured transform at a known domainness value.
std::pair<SceneSample, DomainnessSpec> diversify_at(const SceneSample& sample, double value,
                                                    const DcConfig& cfg);

/// sample_domainness followed by the configured transform. The sample's
/// metadata records the emitted label.
std::pair<SceneSample, DomainnessSpec> diversify(const SceneSample& sample, Rng& rng,
                                                 const DcConfig& cfg);

} // namespace sad
