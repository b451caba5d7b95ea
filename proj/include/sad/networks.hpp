#pragma once

#include "sad/config.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sad {

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// Every trainable module of a run. Parameter and buffer names carry the
/// module's checkpoint entry as a prefix (`encoder_inv.conv1.weight`).
struct Networks {
    Encoder encoder_spf{nullptr};
    Encoder encoder_inv{nullptr};
    SarHead sar{nullptr};
    Discriminator discriminator{nullptr};
    SegHead taskhead{nullptr};

    /// Seeded initialisation: encoders from streams 1 and 2, the regularizer
    /// head 3, the discriminator 4, the task head 5.
    static Networks create(const TrainerConfig& cfg);

    void train(bool on = true);
    void to(torch::Dtype dtype);

    NamedTensors named_parameters() const;
    NamedTensors named_buffers() const;
};

/// Parameters and buffers of one module with `prefix.` prepended.
NamedTensors prefixed_parameters(const torch::nn::Module& m, const std::string& prefix);
NamedTensors prefixed_buffers(const torch::nn::Module& m, const std::string& prefix);

/// Copy `arrays[prefix.name]` into every parameter and buffer of `m`.
/// Missing entries or shape mismatches raise a DataError.
void load_prefixed(torch::nn::Module& m, const std::string& prefix, const std::map<std::string, torch::Tensor>& arrays);

} // namespace sad
