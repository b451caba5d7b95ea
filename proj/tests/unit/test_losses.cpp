#include "doctest_torch.hpp"

#include "sad/discriminator.hpp"
#include "sad/error.hpp"
#include "sad/sar.hpp"
#include "sad/taskhead.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace sad;

namespace {

const auto f64 = torch::TensorOptions().dtype(torch::kFloat64);

torch::Tensor random_logits(Rng& rng, int b, int n, double scale = 3.0) {
    auto t = torch::empty({b, n}, f64);
    auto a = t.accessor<double, 2>();
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < n; ++j) a[i][j] = scale * rng.normal();
    return t;
}

std::vector<double> row(const torch::Tensor& t, int i) {
    std::vector<double> v;
    for (int j = 0; j < t.size(1); ++j) v.push_back(t[i][j].item<double>());
    return v;
}

} // namespace

TEST_CASE("spf loss matches the explicit sum on random inputs") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const auto logits = random_logits(rng, 1, 4);
        const int bin = static_cast<int>(rng.below(4));
        const auto pred = DomainnessPrediction::from_logits(logits);
        const double got = loss_spf(pred, torch::tensor({std::int64_t(bin)})).item<double>();
        const double want = testing::cross_entropy_ref(testing::softmax_ref(row(logits, 0)), bin);
        CHECK(std::abs(got - want) <= 1e-7);
    }
}

TEST_CASE("spf loss anchors: uniform gives log N, confident gives ~0") {
    const auto uniform = DomainnessPrediction::from_logits(torch::zeros({3, 4}, f64));
    CHECK(loss_spf(uniform, torch::tensor({0L, 2L, 3L})).item<double>() == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(std::log(4.0) == doctest::Approx(1.386294).epsilon(1e-6));
    auto logits = torch::zeros({1, 4}, f64);
    logits[0][2] = 20.0;
    CHECK(loss_spf(DomainnessPrediction::from_logits(logits), torch::tensor({2L})).item<double>() <= 1e-6);
}

TEST_CASE("spf loss rejects a bin count mismatch") {
    const auto pred = DomainnessPrediction::from_logits(torch::zeros({1, 4}, f64));
    DomainnessSpec spec;
    spec.n_bins = 5;
    spec.bin = 1;
    spec.onehot = {0, 1, 0, 0, 0};
    CHECK_THROWS_AS(loss_spf(pred, std::vector<DomainnessSpec>{spec}), ShapeError);
}

TEST_CASE("inv loss matches KL to uniform on random inputs") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const auto logits = random_logits(rng, 1, 4);
        const double got = loss_inv(DomainnessPrediction::from_logits(logits)).item<double>();
        const double want = testing::kl_uniform_ref(testing::softmax_ref(row(logits, 0)));
        CHECK(std::abs(got - want) <= 1e-7);
    }
}

TEST_CASE("inv loss anchors: uniform gives 0, one-hot gives log N") {
    CHECK(std::abs(loss_inv(DomainnessPrediction::from_logits(torch::zeros({2, 4}, f64))).item<double>()) <= 1e-7);
    auto logits = torch::zeros({1, 4}, f64);
    logits[0][1] = 30.0;
    CHECK(std::abs(loss_inv(DomainnessPrediction::from_logits(logits)).item<double>() - std::log(4.0)) <= 1e-4);
}

TEST_CASE("inv loss is non-negative and equals log N minus entropy") {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto logits = random_logits(rng, 1, 4, 5.0);
        const auto pred = DomainnessPrediction::from_logits(logits);
        const double kl = loss_inv(pred).item<double>();
        const auto p = testing::softmax_ref(row(logits, 0));
        double entropy = 0.0;
        for (double v : p) entropy -= v * std::log(v);
        REQUIRE(kl >= -1e-12);
        REQUIRE(std::abs(kl - (std::log(4.0) - entropy)) <= 1e-6);
    }
}

TEST_CASE("opposition: spf prefers mass on the true bin, inv prefers uniform") {
    // Two bins, probs (p, 1 - p) with true bin 0.
    double best_spf_p = 0.0, best_inv_p = 0.0;
    double best_spf = 1e9, best_inv = 1e9;
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        const auto logits = torch::tensor({{std::log(p), std::log(1.0 - p)}}, f64);
        const auto pred = DomainnessPrediction::from_logits(logits);
        const double s = loss_spf(pred, torch::tensor({0L})).item<double>();
        const double v = loss_inv(pred).item<double>();
        if (s < best_spf) best_spf = s, best_spf_p = p;
        if (v < best_inv) best_inv = v, best_inv_p = p;
    }
    CHECK(best_spf_p == doctest::Approx(0.999));
    CHECK(best_inv_p == doctest::Approx(0.5));
}

TEST_CASE("prediction probabilities lie on the simplex") {
    Rng rng(4);
    const auto pred = DomainnessPrediction::from_logits(random_logits(rng, 50, 4, 10.0));
    CHECK((pred.probs.sum(1) - 1.0).abs().max().item<double>() <= 1e-6);
    CHECK((pred.probs > 0).all().item<bool>());
}

TEST_CASE("adversarial loss matches brute-force BCE") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> ps, pt;
        for (int i = 0; i < 4; ++i) {
            ps.push_back(rng.uniform(0.01, 0.99));
            pt.push_back(rng.uniform(0.01, 0.99));
        }
        const auto r = loss_adv(torch::tensor(ps, f64), torch::tensor(pt, f64));
        CHECK(std::abs(r.loss.item<double>() - testing::bce_ref(ps, pt)) <= 1e-7);
        CHECK(r.clamped == 0);
    }
}

TEST_CASE("adversarial loss anchors") {
    const auto half = torch::full({3}, 0.5, f64);
    CHECK(std::abs(loss_adv(half, half).loss.item<double>() - 2.0 * std::log(2.0)) <= 1e-6);
    const auto r = loss_adv(torch::tensor({1.0 - 1e-9}, f64), torch::tensor({1e-9}, f64));
    CHECK(r.loss.item<double>() < 1e-5);
}

TEST_CASE("adversarial loss clamps saturated probabilities and counts them") {
    const auto r = loss_adv(torch::tensor({1.0, 0.5}, f64), torch::tensor({0.0, 1.0}, f64));
    CHECK(r.clamped == 3);
    CHECK(std::isfinite(r.loss.item<double>()));
    const double want = testing::bce_ref({1.0 - kAdvEpsilon, 0.5}, {kAdvEpsilon, 1.0 - kAdvEpsilon});
    CHECK(r.loss.item<double>() == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("task loss matches a per-pixel loop") {
    Rng rng(6);
    auto logits = torch::empty({2, 6, 4, 4}, f64);
    auto mask = torch::empty({2, 4, 4}, torch::kInt64);
    auto la = logits.accessor<double, 4>();
    auto ma = mask.accessor<std::int64_t, 3>();
    for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
                for (int k = 0; k < 6; ++k) la[b][k][y][x] = 2.0 * rng.normal();
                ma[b][y][x] = rng.below(7) == 6 ? 255 : static_cast<std::int64_t>(rng.below(6));
            }
    CHECK(std::abs(loss_task(logits, mask).item<double>() - testing::pixel_ce_ref(logits, mask)) <= 1e-6);
}

TEST_CASE("task loss anchors: uniform logits give log K, confident ~0") {
    const auto mask = torch::randint(0, 6, {1, 4, 4}, torch::kInt64);
    CHECK(loss_task(torch::zeros({1, 6, 4, 4}, f64), mask).item<double>() == doctest::Approx(std::log(6.0)).epsilon(1e-12));
    CHECK(std::log(6.0) == doctest::Approx(1.791759).epsilon(1e-6));
    const auto confident = torch::nn::functional::one_hot(mask, 6).permute({0, 3, 1, 2}).to(torch::kFloat64) * 30.0;
    CHECK(loss_task(confident, mask).item<double>() <= 1e-4);
}

TEST_CASE("task loss is invariant to a joint class permutation") {
    torch::manual_seed(7);
    const auto logits = torch::randn({2, 6, 5, 5}, f64);
    const auto mask = torch::randint(0, 6, {2, 5, 5}, torch::kInt64);
    const std::vector<std::int64_t> perm{3, 0, 5, 1, 4, 2};
    // Channel perm[k] of the permuted logits holds channel k; label k becomes perm[k].
    auto permuted_logits = torch::empty_like(logits);
    for (int k = 0; k < 6; ++k) permuted_logits.select(1, perm[k]).copy_(logits.select(1, k));
    const auto permuted_mask = torch::tensor(perm).index({mask});
    CHECK(loss_task(permuted_logits, permuted_mask).item<double>() ==
          doctest::Approx(loss_task(logits, mask).item<double>()).epsilon(1e-12));
}

TEST_CASE("task loss rejects labels outside the class range") {
    auto mask = torch::zeros({1, 2, 2}, torch::kInt64);
    mask[0][0][0] = 6;
    CHECK_THROWS_AS(loss_task(torch::zeros({1, 6, 2, 2}, f64), mask), DataError);
    mask[0][0][0] = 255;
    CHECK_NOTHROW(loss_task(torch::zeros({1, 6, 2, 2}, f64), mask));
}
