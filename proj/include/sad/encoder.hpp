#pragma once

#include "sad/types.hpp"

#include "json.hpp"

#include <torch/torch.h>

#include <utility>
#include <vector>

namespace sad {

/// Which encoder produced a feature map. Heads check it to enforce wiring.
enum class FeatureTag { spf, inv };

std::string_view to_string(FeatureTag tag) noexcept;

/// Batched C x H' x W' activations, tagged with their producing encoder.
struct FeatureMap {
    torch::Tensor values; // [B, C, H', W']
    FeatureTag tag = FeatureTag::inv;

    std::int64_t channels() const { return values.size(1); }
};

/// Architecture descriptor shared by both encoders.
///
/// Each block is 3x3 conv -> batch norm -> relu with the given stride. The
/// default (strides 2-2-2-1) maps an H x W image to C x H/8 x W/8.
struct EncoderArch {
    int in_channels = 3;
    int height = 128;
    int width = 128;
    std::vector<int> widths{32, 64, 128, 64};
    std::vector<int> strides{2, 2, 2, 1};

    int out_channels() const { return widths.back(); }
    int downsample() const;
    void validate() const;

    nlohmann::json to_json() const;
    static EncoderArch from_json(const nlohmann::json& j);
    bool operator==(const EncoderArch&) const = default;
};

class EncoderImpl : public torch::nn::Module {
public:
    explicit EncoderImpl(EncoderArch arch);

    torch::Tensor forward(const torch::Tensor& images);

    const EncoderArch& arch() const { return arch_; }

private:
    EncoderArch arch_;
    std::vector<torch::nn::Conv2d> convs_;
    std::vector<torch::nn::BatchNorm2d> norms_;
};
TORCH_MODULE(Encoder);

/// Run `encoder` over a [B, 3, H, W] batch and tag the result.
FeatureMap encode(Encoder& encoder, const torch::Tensor& images, FeatureTag tag);

/// Two encoders with identical architecture and independently drawn
/// weights (streams 1 and 2 of `seed`). Returns {spf, inv}.
std::pair<Encoder, Encoder> init_encoders(std::uint64_t seed, const EncoderArch& arch);

} // namespace sad
