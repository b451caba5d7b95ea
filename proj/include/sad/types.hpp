#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sad {

/// The named dimension along which domainness varies.
enum class Dimension { fog, fov, rain };

std::string_view to_string(Dimension d) noexcept;
Dimension parse_dimension(std::string_view name);

/// One sampled domainness event: the continuous value and its discretised
/// label. `onehot` is the N-way supervision target for the regularizer.
struct DomainnessSpec {
    Dimension dimension = Dimension::fog;
    double value = 0.0;
    int bin = 0;
    int n_bins = 0;
    std::vector<double> onehot;

    bool operator==(const DomainnessSpec&) const = default;
};

struct SceneMeta {
    std::uint64_t seed = 0;
    std::optional<DomainnessSpec> domainness;
    double fov_x_deg = 90.0;

    bool operator==(const SceneMeta&) const = default;
};

/// RGB image with aligned metric depth and class mask.
///
/// Layouts: image [3,H,W] float32 in [0,1]; depth [H,W] float32 metres;
/// mask [H,W] uint8 class indices (255 = ignore).
struct SceneSample {
    torch::Tensor image;
    torch::Tensor depth;
    torch::Tensor mask;
    SceneMeta meta;

    std::int64_t height() const { return image.size(1); }
    std::int64_t width() const { return image.size(2); }
};

/// True when both samples hold bit-identical tensors and equal metadata.
bool identical(const SceneSample& a, const SceneSample& b);

inline constexpr std::uint8_t kIgnoreLabel = 255;

} // namespace sad
