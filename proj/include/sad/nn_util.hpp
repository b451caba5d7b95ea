#pragma once

#include "sad/rng.hpp"

#include <torch/torch.h>

#include <cstdint>
#include <string>
#include <vector>

namespace sad {

/// Fill `t` in place with U(-bound, bound) drawn from `rng` (row-major order).
void fill_uniform_(torch::Tensor t, Rng& rng, double bound);

/// He-uniform weights (bound sqrt(6 / fan_in)) and zero biases for every
/// conv / linear weight below `module`; normalisation layers reset to the
/// identity affine map.
void init_he_uniform(torch::nn::Module& module, Rng& rng);

/// Zero every parameter of `module`.
void zero_parameters(torch::nn::Module& module);

std::int64_t count_parameters(const torch::nn::Module& module);

/// All parameters flattened into a single 1-D double tensor, in registration order.
torch::Tensor flatten_parameters(const torch::nn::Module& module);

/// Custom autograd op: identity forward, gradient multiplied by -coeff.
torch::Tensor grad_reverse(const torch::Tensor& x, double coeff = 1.0);

} // namespace sad
