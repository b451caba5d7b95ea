#pragma once

#include <torch/torch.h>

#include <map>
#include <string>
#include <vector>

namespace sad {

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam over a named parameter set.
///
/// Parameters whose gradient is undefined after backward are skipped
/// entirely: neither the value nor the moment estimates move. Bias
/// correction uses a per-parameter step count for the same reason.
class Adam {
public:
    Adam(std::vector<std::pair<std::string, torch::Tensor>> params, AdamOptions opts = {});

    void zero_grad();
    void step(double lr);

    /// Moments and step counts as named tensors (`<param>.exp_avg`, ...).
    std::vector<std::pair<std::string, torch::Tensor>> state() const;
    void load_state(const std::map<std::string, torch::Tensor>& arrays);

private:
    struct Slot {
        std::string name;
        torch::Tensor param;
        torch::Tensor exp_avg;
        torch::Tensor exp_avg_sq;
        std::int64_t steps = 0;
    };
    std::vector<Slot> slots_;
    AdamOptions opts_;
};

} // namespace sad
