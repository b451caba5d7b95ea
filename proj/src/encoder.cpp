#include "sad/encoder.hpp"

#include "sad/error.hpp"
#include "sad/nn_util.hpp"
#include "sad/rng.hpp"

#include <sstream>

namespace sad {

std::string_view to_string(FeatureTag tag) noexcept { return tag == FeatureTag::spf ? "spf" : "inv"; }

int EncoderArch::downsample() const {
    int d = 1;
    for (int s : strides) d *= s;
    return d;
}

void EncoderArch::validate() const {
    if (in_channels <= 0) throw ConfigError("encoder input channels must be positive");
    if (widths.empty() || widths.size() != strides.size())
        throw ConfigError("encoder widths and strides must be non-empty and of equal length");
    for (int w : widths)
        if (w <= 0) throw ConfigError("encoder widths must be positive");
    for (int s : strides)
        if (s != 1 && s != 2) throw ConfigError("encoder strides must be 1 or 2");
    const int ds = downsample();
    if (height <= 0 || width <= 0 || height % ds != 0 || width % ds != 0)
        throw ConfigError("encoder input size must be a positive multiple of the total stride");
}

nlohmann::json EncoderArch::to_json() const {
    nlohmann::json layers = nlohmann::json::array();
    int in = in_channels;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        layers.push_back({{"type", "conv3x3-bn-relu"}, {"in", in}, {"out", widths[i]}, {"stride", strides[i]}});
        in = widths[i];
    }
    return {{"in_channels", in_channels}, {"input_size", {height, width}}, {"widths", widths},
            {"strides", strides}, {"layers", layers}};
}

EncoderArch EncoderArch::from_json(const nlohmann::json& j) {
    EncoderArch a;
    a.in_channels = j.value("in_channels", a.in_channels);
    if (j.contains("input_size")) {
        a.height = j["input_size"].at(0).get<int>();
        a.width = j["input_size"].at(1).get<int>();
    }
    a.widths = j.value("widths", a.widths);
    a.strides = j.value("strides", a.strides);
    return a;
}

EncoderImpl::EncoderImpl(EncoderArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    int in = arch_.in_channels;
    for (std::size_t i = 0; i < arch_.widths.size(); ++i) {
        const int out = arch_.widths[i];
        auto conv = torch::nn::Conv2d(
            torch::nn::Conv2dOptions(in, out, 3).stride(arch_.strides[i]).padding(1).bias(false));
        auto norm = torch::nn::BatchNorm2d(torch::nn::BatchNorm2dOptions(out));
        convs_.push_back(register_module("conv" + std::to_string(i + 1), conv));
        norms_.push_back(register_module("bn" + std::to_string(i + 1), norm));
        in = out;
    }
}

torch::Tensor EncoderImpl::forward(const torch::Tensor& images) {
    if (images.dim() != 4 || images.size(1) != arch_.in_channels || images.size(2) != arch_.height ||
        images.size(3) != arch_.width) {
        std::ostringstream os;
        os << "encoder expects [B, " << arch_.in_channels << ", " << arch_.height << ", " << arch_.width
           << "] input, got " << images.sizes();
        throw ShapeError(os.str());
    }
    torch::Tensor x = images;
    for (std::size_t i = 0; i < convs_.size(); ++i) x = torch::relu(norms_[i](convs_[i](x)));
    return x;
}

FeatureMap encode(Encoder& encoder, const torch::Tensor& images, FeatureTag tag) {
    return {encoder->forward(images), tag};
}

std::pair<Encoder, Encoder> init_encoders(std::uint64_t seed, const EncoderArch& arch) {
    Encoder spf(arch), inv(arch);
    Rng spf_stream = Rng::stream(seed, 1);
    Rng inv_stream = Rng::stream(seed, 2);
    init_he_uniform(*spf, spf_stream);
    init_he_uniform(*inv, inv_stream);
    return {spf, inv};
}

} // namespace sad
