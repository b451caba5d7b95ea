#include "sad/cli.hpp"
#include "sad/domainness.hpp"
#include "sad/error.hpp"
#include "sad/metrics.hpp"
#include "sad/sar.hpp"
#include "sad/scene.hpp"
#include "sad/trainer.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace sad;

namespace {

template <typename T>
py::array_t<T> to_numpy(const torch::Tensor& t) {
    const auto c = t.contiguous();
    std::vector<py::ssize_t> shape(c.sizes().begin(), c.sizes().end());
    py::array_t<T> out(shape);
    std::memcpy(out.mutable_data(), c.data_ptr<T>(), sizeof(T) * static_cast<std::size_t>(c.numel()));
    return out;
}

template <typename T>
torch::Tensor from_numpy(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, torch::Dtype dtype) {
    std::vector<std::int64_t> shape(a.shape(), a.shape() + a.ndim());
    return torch::from_blob(const_cast<T*>(a.data()), shape, dtype).clone();
}

py::dict scene_to_dict(const SceneSample& s) {
    py::dict d;
    d["image"] = to_numpy<float>(s.image.permute({1, 2, 0}));
    d["depth"] = to_numpy<float>(s.depth);
    d["mask"] = to_numpy<std::uint8_t>(s.mask);
    d["seed"] = s.meta.seed;
    return d;
}

SceneSample scene_from_arrays(const py::array_t<float, py::array::c_style | py::array::forcecast>& image,
                              const py::array_t<float, py::array::c_style | py::array::forcecast>& depth) {
    if (image.ndim() != 3 || image.shape(2) != 3) throw ShapeError("image must be H x W x 3");
    if (depth.ndim() != 2 || depth.shape(0) != image.shape(0) || depth.shape(1) != image.shape(1))
        throw ShapeError("depth must be H x W and match the image");
    SceneSample s;
    s.image = from_numpy<float>(image, torch::kFloat32).permute({2, 0, 1}).contiguous();
    s.depth = from_numpy<float>(depth, torch::kFloat32);
    s.mask = torch::zeros({image.shape(0), image.shape(1)}, torch::kUInt8);
    return s;
}

DomainnessPrediction prediction(const py::array_t<double, py::array::c_style | py::array::forcecast>& logits) {
    if (logits.ndim() != 2) throw ShapeError("logits must be B x N");
    return DomainnessPrediction::from_logits(from_numpy<double>(logits, torch::kFloat64));
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Self-adversarial disentangling: scene synthesis, domainness creator, losses and inference";
    torch::set_num_threads(1);

    static py::exception<Error> base(m, "SadError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(base, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
        }
    });

    m.def(
        "generate_scene",
        [](std::uint64_t seed, int height, int width) {
            SceneGenConfig cfg;
            cfg.height = height;
            cfg.width = width;
            return scene_to_dict(generate_scene(seed, cfg));
        },
        py::arg("seed"), py::arg("height") = 128, py::arg("width") = 128,
        "Render one scene; returns image (H, W, 3), depth (H, W) and mask (H, W).");

    m.def(
        "apply_fog",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> image,
           py::array_t<float, py::array::c_style | py::array::forcecast> depth, double beta,
           std::array<double, 3> light) {
            return to_numpy<float>(apply_fog(scene_from_arrays(image, depth), beta, light).image.permute({1, 2, 0}));
        },
        py::arg("image"), py::arg("depth"), py::arg("beta"), py::arg("atmospheric_light") = std::array<double, 3>{0.9, 0.9, 0.9});

    m.def("fov_crop_extent", &fov_crop_extent, py::arg("extent"), py::arg("theta1_deg"), py::arg("theta0_deg"));

    m.def(
        "bin_index",
        [](double value, double lo, double hi, int n_bins) {
            DcConfig c;
            c.lo = lo;
            c.hi = hi;
            c.n_bins = n_bins;
            return bin_index(value, c);
        },
        py::arg("value"), py::arg("lo"), py::arg("hi"), py::arg("n_bins"));

    m.def(
        "loss_spf",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> logits, std::vector<std::int64_t> bins) {
            return loss_spf(prediction(logits), torch::tensor(bins, torch::kInt64)).item<double>();
        },
        py::arg("logits"), py::arg("bins"));
    m.def(
        "loss_inv",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> logits) {
            return loss_inv(prediction(logits)).item<double>();
        },
        py::arg("logits"));

    m.def(
        "miou",
        [](py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> pred,
           py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> gt, int num_classes) {
            return miou(from_numpy<std::int64_t>(pred, torch::kInt64), from_numpy<std::int64_t>(gt, torch::kInt64),
                        num_classes)
                .mean;
        },
        py::arg("pred"), py::arg("gt"), py::arg("num_classes"));

    py::class_<InferenceModel>(m, "InferenceModel")
        .def(py::init([](const std::string& path) { return load_inference(path); }), py::arg("path"))
        .def_property_readonly("parameter_count", &InferenceModel::parameter_count)
        .def(
            "predict",
            [](InferenceModel& self, py::array_t<float, py::array::c_style | py::array::forcecast> images) {
                if (images.ndim() != 4 || images.shape(3) != 3) throw ShapeError("images must be B x H x W x 3");
                const auto x = from_numpy<float>(images, torch::kFloat32).permute({0, 3, 1, 2}).contiguous();
                const auto dtype = self.encoder->parameters().front().scalar_type();
                return to_numpy<std::int64_t>(self.predict(x.to(dtype)));
            },
            py::arg("images"), "Class map (B, H, W) for a batch of (B, H, W, 3) images in [0, 1].");

    m.def(
        "run_cli", [](const std::vector<std::string>& args) { return run_cli(args); }, py::arg("args"),
        py::call_guard<py::gil_scoped_release>(),
        "Run the sad command line with the given arguments; returns the exit code.");
}
