#include "sad/adam.hpp"

#include "sad/error.hpp"

#include <cmath>

namespace sad {

Adam::Adam(std::vector<std::pair<std::string, torch::Tensor>> params, AdamOptions opts) : opts_(opts) {
    slots_.reserve(params.size());
    for (auto& [name, p] : params) {
        Slot s;
        s.name = name;
        s.param = p;
        s.exp_avg = torch::zeros_like(p, torch::MemoryFormat::Contiguous).detach();
        s.exp_avg_sq = torch::zeros_like(p, torch::MemoryFormat::Contiguous).detach();
        slots_.push_back(std::move(s));
    }
}

void Adam::zero_grad() {
    for (auto& s : slots_) s.param.mutable_grad() = torch::Tensor();
}

void Adam::step(double lr) {
    torch::NoGradGuard no_grad;
    for (auto& s : slots_) {
        const auto& g = s.param.grad();
        if (!g.defined()) continue;
        ++s.steps;
        s.exp_avg.mul_(opts_.beta1).add_(g, 1.0 - opts_.beta1);
        s.exp_avg_sq.mul_(opts_.beta2).addcmul_(g, g, 1.0 - opts_.beta2);
        const double bc1 = 1.0 - std::pow(opts_.beta1, static_cast<double>(s.steps));
        const double bc2 = 1.0 - std::pow(opts_.beta2, static_cast<double>(s.steps));
        const auto denom = (s.exp_avg_sq / bc2).sqrt_().add_(opts_.eps);
        s.param.addcdiv_(s.exp_avg, denom, -lr / bc1);
    }
}

std::vector<std::pair<std::string, torch::Tensor>> Adam::state() const {
    std::vector<std::pair<std::string, torch::Tensor>> out;
    for (const auto& s : slots_) {
        out.emplace_back(s.name + ".exp_avg", s.exp_avg);
        out.emplace_back(s.name + ".exp_avg_sq", s.exp_avg_sq);
        out.emplace_back(s.name + ".steps", torch::tensor({s.steps}, torch::kInt64));
    }
    return out;
}

void Adam::load_state(const std::map<std::string, torch::Tensor>& arrays) {
    torch::NoGradGuard no_grad;
    auto fetch = [&](const std::string& key) -> const torch::Tensor& {
        auto it = arrays.find(key);
        if (it == arrays.end()) throw DataError("optimizer state missing '" + key + "'");
        return it->second;
    };
    for (auto& s : slots_) {
        const auto& m = fetch(s.name + ".exp_avg");
        const auto& v = fetch(s.name + ".exp_avg_sq");
        if (m.sizes() != s.exp_avg.sizes() || v.sizes() != s.exp_avg_sq.sizes())
            throw DataError("optimizer state shape mismatch for '" + s.name + "'");
        s.exp_avg.copy_(m);
        s.exp_avg_sq.copy_(v);
        s.steps = fetch(s.name + ".steps").item<std::int64_t>();
    }
}

} // namespace sad
