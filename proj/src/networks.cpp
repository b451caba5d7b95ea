#include "sad/networks.hpp"

#include "sad/error.hpp"
#include "sad/nn_util.hpp"

namespace sad {

Networks Networks::create(const TrainerConfig& cfg) {
    Networks n;
    std::tie(n.encoder_spf, n.encoder_inv) = init_encoders(cfg.seed, cfg.encoder);
    n.sar = SarHead(cfg.sar_arch());
    n.discriminator = Discriminator(cfg.disc_arch());
    n.taskhead = SegHead(cfg.head_arch());
    Rng sar_stream = Rng::stream(cfg.seed, 3);
    Rng disc_stream = Rng::stream(cfg.seed, 4);
    Rng head_stream = Rng::stream(cfg.seed, 5);
    init_he_uniform(*n.sar, sar_stream);
    init_he_uniform(*n.discriminator, disc_stream);
    init_he_uniform(*n.taskhead, head_stream);
    n.to(cfg.dtype());
    return n;
}

void Networks::train(bool on) {
    encoder_spf->train(on);
    encoder_inv->train(on);
    sar->train(on);
    discriminator->train(on);
    taskhead->train(on);
}

void Networks::to(torch::Dtype dtype) {
    encoder_spf->to(dtype);
    encoder_inv->to(dtype);
    sar->to(dtype);
    discriminator->to(dtype);
    taskhead->to(dtype);
}

NamedTensors prefixed_parameters(const torch::nn::Module& m, const std::string& prefix) {
    NamedTensors out;
    for (const auto& item : m.named_parameters(true)) out.emplace_back(prefix + "." + item.key(), item.value());
    return out;
}

NamedTensors prefixed_buffers(const torch::nn::Module& m, const std::string& prefix) {
    NamedTensors out;
    for (const auto& item : m.named_buffers(true)) out.emplace_back(prefix + "." + item.key(), item.value());
    return out;
}

namespace {

template <class F>
NamedTensors collect(const Networks& n, F f) {
    NamedTensors out;
    for (auto&& part : {f(*n.encoder_spf, "encoder_spf"), f(*n.encoder_inv, "encoder_inv"), f(*n.sar, "sar"),
                        f(*n.discriminator, "discriminator"), f(*n.taskhead, "taskhead")})
        out.insert(out.end(), part.begin(), part.end());
    return out;
}

} // namespace

NamedTensors Networks::named_parameters() const { return collect(*this, prefixed_parameters); }

NamedTensors Networks::named_buffers() const { return collect(*this, prefixed_buffers); }

void load_prefixed(torch::nn::Module& m, const std::string& prefix, const std::map<std::string, torch::Tensor>& arrays) {
    torch::NoGradGuard no_grad;
    auto load = [&](const NamedTensors& targets) {
        for (const auto& [name, t] : targets) {
            const auto it = arrays.find(name);
            if (it == arrays.end()) throw DataError("checkpoint is missing '" + name + "'");
            if (it->second.sizes() != t.sizes()) throw DataError("shape mismatch for '" + name + "'");
            t.copy_(it->second);
        }
    };
    load(prefixed_parameters(m, prefix));
    load(prefixed_buffers(m, prefix));
}

} // namespace sad
