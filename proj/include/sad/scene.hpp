#pragma once

#include "sad/types.hpp"

#include <array>
#include <vector>

namespace sad {

/// Parameters of the procedural scene generator.
struct SceneGenConfig {
    int height = 128;
    int width = 128;
    int num_classes = 6; // background + up to five shape classes
    int min_shapes = 3;
    int max_shapes = 8;
    double depth_min = 1.0;
    double depth_max = 100.0;
    double fov_x_deg = 90.0; // native horizontal field of view of the renders
    double noise_sigma = 0.02;

    void validate() const;
};

enum class ShapeKind { circle = 0, rectangle, triangle, cross, ring };

/// One primitive of a scene. Geometry is in pixel units; `size` is the
/// circumradius, `angle` a rotation in radians.
struct Shape {
    ShapeKind kind = ShapeKind::circle;
    int class_id = 1;
    double cx = 0.0;
    double cy = 0.0;
    double size = 1.0;
    double aspect = 1.0;
    double angle = 0.0;
    double depth = 1.0;
    std::array<double, 3> color{};
};

/// Background appearance parameters drawn alongside the shapes.
struct Backdrop {
    std::array<double, 3> top{};
    std::array<double, 3> bottom{};
    double texture_amp = 0.0;
    double texture_freq = 0.0;
    double texture_phase = 0.0;
};

struct SceneLayout {
    Backdrop backdrop;
    std::vector<Shape> shapes;
};

/// The shape list and backdrop that `generate_scene` renders for `seed`.
SceneLayout scene_layout(std::uint64_t seed, const SceneGenConfig& cfg);

/// Whether pixel-centre point (x, y) lies inside `shape`.
bool covers(const Shape& shape, double x, double y);

/// Depth of the background at row `y`: far at the top, near at the bottom,
/// geometric in between.
double backdrop_depth(int y, const SceneGenConfig& cfg);

/// Render a clear-weather scene. Deterministic in (seed, cfg).
SceneSample generate_scene(std::uint64_t seed, const SceneGenConfig& cfg);

} // namespace sad
