#include "sad/nn_util.hpp"

#include <cmath>

namespace sad {
namespace {

class GradReverse : public torch::autograd::Function<GradReverse> {
public:
    static torch::Tensor forward(torch::autograd::AutogradContext* ctx, const torch::Tensor& x,
                                 double coeff) {
        ctx->saved_data["coeff"] = coeff;
        return x.clone();
    }

    static torch::autograd::tensor_list backward(torch::autograd::AutogradContext* ctx,
                                                 torch::autograd::tensor_list grad_out) {
        const double coeff = ctx->saved_data["coeff"].toDouble();
        return {grad_out[0] * (-coeff), torch::Tensor()};
    }
};

} // namespace

void fill_uniform_(torch::Tensor t, Rng& rng, double bound) {
    torch::NoGradGuard no_grad;
    auto buf = torch::empty({t.numel()}, torch::kFloat64);
    auto* p = buf.data_ptr<double>();
    for (std::int64_t i = 0; i < buf.numel(); ++i) p[i] = rng.uniform(-bound, bound);
    t.copy_(buf.view(t.sizes()));
}

void init_he_uniform(torch::nn::Module& module, Rng& rng) {
    torch::NoGradGuard no_grad;
    for (auto& item : module.named_parameters(/*recurse=*/true)) {
        const std::string& name = item.key();
        torch::Tensor& p = item.value();
        const bool is_weight = name.size() >= 6 && name.compare(name.size() - 6, 6, "weight") == 0;
        if (is_weight && p.dim() >= 2) {
            const double fan_in = static_cast<double>(p.numel() / p.size(0));
            fill_uniform_(p, rng, std::sqrt(6.0 / fan_in));
        } else if (is_weight) { // 1-D weights belong to normalisation layers
            p.fill_(1.0);
        } else {
            p.zero_();
        }
    }
}

void zero_parameters(torch::nn::Module& module) {
    torch::NoGradGuard no_grad;
    for (auto& p : module.parameters()) p.zero_();
}

std::int64_t count_parameters(const torch::nn::Module& module) {
    std::int64_t n = 0;
    for (const auto& p : module.parameters()) n += p.numel();
    return n;
}

torch::Tensor flatten_parameters(const torch::nn::Module& module) {
    std::vector<torch::Tensor> parts;
    for (const auto& p : module.parameters()) parts.push_back(p.detach().to(torch::kFloat64).reshape(-1));
    if (parts.empty()) return torch::empty({0}, torch::kFloat64);
    return torch::cat(parts);
}

torch::Tensor grad_reverse(const torch::Tensor& x, double coeff) { return GradReverse::apply(x, coeff); }

} // namespace sad
