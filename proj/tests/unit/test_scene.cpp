#include "doctest_torch.hpp"

#include "sad/error.hpp"
#include "sad/scene.hpp"
#include "test_support.hpp"

using namespace sad;

namespace {

std::vector<std::int64_t> histogram(const torch::Tensor& mask, int k) {
    const auto h = torch::bincount(mask.to(torch::kInt64).reshape(-1), {}, k);
    return {h.data_ptr<std::int64_t>(), h.data_ptr<std::int64_t>() + k};
}

} // namespace

TEST_CASE("generate_scene is bit-identical for the same seed") {
    const SceneGenConfig cfg;
    CHECK(identical(generate_scene(0, cfg), generate_scene(0, cfg)));
    CHECK_FALSE(identical(generate_scene(0, cfg), generate_scene(1, cfg)));
}

TEST_CASE("an empty shape range yields an all-background mask") {
    SceneGenConfig cfg;
    cfg.min_shapes = cfg.max_shapes = 0;
    const auto s = generate_scene(3, cfg);
    CHECK(s.mask.eq(0).all().item<bool>());
}

TEST_CASE("seed 7 mask matches a back-to-front re-rasterization") {
    const SceneGenConfig cfg;
    const auto s = generate_scene(7, cfg);
    const auto oracle = testing::paint_back_to_front(scene_layout(7, cfg), cfg);
    CHECK(histogram(s.mask, cfg.num_classes) == histogram(oracle, cfg.num_classes));
    CHECK(s.mask.equal(oracle));
}

TEST_CASE("rasterizer agreement holds over many seeds and sizes") {
    SceneGenConfig cfg;
    cfg.height = 48;
    cfg.width = 64;
    for (std::uint64_t seed = 100; seed < 130; ++seed)
        CHECK(generate_scene(seed, cfg).mask.equal(testing::paint_back_to_front(scene_layout(seed, cfg), cfg)));
}

TEST_CASE("scene invariants: shared size, depth floor, class range, constant depth per shape") {
    const SceneGenConfig cfg;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = generate_scene(seed, cfg);
        CHECK(s.image.sizes() == torch::IntArrayRef({3, cfg.height, cfg.width}));
        CHECK(s.depth.sizes() == torch::IntArrayRef({cfg.height, cfg.width}));
        CHECK(s.mask.sizes() == torch::IntArrayRef({cfg.height, cfg.width}));
        CHECK(s.depth.isfinite().all().item<bool>());
        CHECK(s.depth.min().item<double>() >= cfg.depth_min - 1e-4);
        CHECK(s.mask.max().item<int>() < cfg.num_classes);
        CHECK(s.image.min().item<double>() >= 0.0);
        CHECK(s.image.max().item<double>() <= 1.0);

        // Every pixel owned by one shape instance carries that instance's depth.
        const auto layout = scene_layout(seed, cfg);
        auto d = s.depth.accessor<float, 2>();
        for (int y = 0; y < cfg.height; ++y)
            for (int x = 0; x < cfg.width; ++x) {
                int owner = -1;
                for (std::size_t i = 0; i < layout.shapes.size(); ++i)
                    if (covers(layout.shapes[i], x + 0.5, y + 0.5) &&
                        (owner < 0 || layout.shapes[i].depth < layout.shapes[owner].depth))
                        owner = static_cast<int>(i);
                if (owner >= 0) REQUIRE(d[y][x] == static_cast<float>(layout.shapes[owner].depth));
            }
    }
}

TEST_CASE("background depth runs far at the top to near at the bottom") {
    SceneGenConfig cfg;
    cfg.min_shapes = cfg.max_shapes = 0;
    const auto s = generate_scene(1, cfg);
    CHECK(s.depth[0][0].item<double>() == doctest::Approx(cfg.depth_max).epsilon(1e-6));
    CHECK(s.depth[cfg.height - 1][0].item<double>() == doctest::Approx(cfg.depth_min).epsilon(1e-6));
    CHECK((s.depth.slice(0, 1) < s.depth.slice(0, 0, -1)).all().item<bool>());
}

TEST_CASE("invalid scene configs are configuration errors") {
    SceneGenConfig cfg;
    cfg.height = 0;
    CHECK_THROWS_AS(generate_scene(0, cfg), ConfigError);
    cfg = {};
    cfg.depth_min = 100.0;
    cfg.depth_max = 100.0;
    CHECK_THROWS_AS(generate_scene(0, cfg), ConfigError);
    cfg = {};
    cfg.min_shapes = 5;
    cfg.max_shapes = 2;
    CHECK_THROWS_AS(generate_scene(0, cfg), ConfigError);
}
