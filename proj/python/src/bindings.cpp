#include "morphprof/clustering.hpp"
#include "morphprof/descriptors.hpp"
#include "morphprof/error.hpp"
#include "morphprof/funclust.hpp"
#include "morphprof/mask.hpp"
#include "morphprof/pipeline.hpp"
#include "morphprof/synth.hpp"
#include "morphprof/validity.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace morphprof;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

BinaryMask to_mask(const U8Array& a) {
    if (a.ndim() != 2) throw ConfigError("mask must be a 2-D array");
    BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
    const auto* p = a.data();
    for (std::size_t i = 0; i < m.foreground.size(); ++i) m.foreground[i] = p[i] != 0 ? 1 : 0;
    return m;
}

U8Array from_mask(const BinaryMask& m) {
    U8Array out({m.height, m.width});
    std::memcpy(out.mutable_data(), m.foreground.data(), m.foreground.size());
    return out;
}

DataMatrix to_matrix(const F64Array& a) {
    if (a.ndim() != 2) throw ConfigError("data must be a 2-D array");
    DataMatrix x(a.shape(0), a.shape(1));
    std::memcpy(x.data(), a.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
    return x;
}

// nlohmann::json to Python through its text form keeps the bindings free of a converter
py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json py_to_json(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

SyntheticSpec make_spec(const std::string& cls, std::uint64_t seed, double base_radius, double noise_amp,
                        int image_size, double rotation, double scale) {
    SyntheticSpec s;
    s.cls = parse_class(cls);
    s.seed = seed;
    s.base_radius = base_radius;
    s.noise_amp = noise_amp;
    s.image_size = image_size;
    s.rotation = rotation;
    s.scale = scale;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Particle morphology profiling";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    m.def(
        "generate_particle",
        [](const std::string& cls, std::uint64_t seed, double base_radius, double noise_amp, int image_size,
           double rotation, double scale) {
            return from_mask(generate_particle(make_spec(cls, seed, base_radius, noise_amp, image_size, rotation, scale)));
        },
        py::arg("cls"), py::arg("seed") = 0, py::arg("base_radius") = 24.0, py::arg("noise_amp") = 0.0,
        py::arg("image_size") = 128, py::arg("rotation") = 0.0, py::arg("scale") = 1.0);

    m.def(
        "generate_dataset",
        [](std::array<std::size_t, kParticleClassCount> counts, std::uint64_t seed) {
            DatasetConfig cfg;
            cfg.counts = counts;
            cfg.seed = seed;
            const auto data = generate_dataset(cfg);
            py::list masks;
            for (const auto& mk : render_all(data.specs)) masks.append(from_mask(mk));
            return py::make_tuple(masks, data.labels);
        },
        py::arg("counts"), py::arg("seed") = 0, "Rendered masks and integer class labels.");

    m.def("class_names", [] {
        std::vector<std::string> names;
        for (std::size_t c = 0; c < kParticleClassCount; ++c) names.emplace_back(class_name(static_cast<ParticleClass>(c)));
        return names;
    });

    m.def(
        "segment",
        [](const U8Array& gray) {
            if (gray.ndim() != 2) throw ConfigError("image must be a 2-D array");
            GrayImage img;
            img.width = static_cast<int>(gray.shape(1));
            img.height = static_cast<int>(gray.shape(0));
            img.pixels.assign(gray.data(), gray.data() + gray.size());
            return from_mask(segment_particle(img));
        },
        py::arg("image"), "Otsu threshold, then the largest 8-connected component.");

    m.def(
        "descriptor",
        [](const U8Array& mask, const std::string& kind) {
            return extract_descriptor(parse_descriptor(kind), to_mask(mask)).values;
        },
        py::arg("mask"), py::arg("kind") = "fd10", "cdf100 | fd10 | zm12");

    m.def(
        "radial_profile",
        [](const U8Array& mask, std::size_t n, bool normalize, bool align) {
            const auto mk = to_mask(mask);
            auto p = radial_profile(mk, centroid_of(mk), n);
            if (normalize) p = normalize_profile(p);
            if (align) p = align_profile(p);
            return p.samples;
        },
        py::arg("mask"), py::arg("n") = 100, py::arg("normalize") = true, py::arg("align") = true);

    m.def(
        "shape_metrics",
        [](const U8Array& mask) {
            const auto mk = to_mask(mask);
            const auto s = shape_metrics(mk, trace_contour(mk));
            py::dict d;
            d["area"] = s.area;
            d["perimeter"] = s.perimeter;
            d["circularity"] = s.circularity;
            d["aspect_ratio"] = s.aspect_ratio;
            d["feret_min"] = s.feret_min;
            d["feret_max"] = s.feret_max;
            return d;
        },
        py::arg("mask"));

    m.def(
        "kmeans",
        [](const F64Array& x, int k, std::uint64_t seed) { return kmeans_fit(to_matrix(x), k, seed).partition.labels; },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0);

    m.def(
        "gmm",
        [](const F64Array& x, int k, std::uint64_t seed) {
            const auto data = to_matrix(x);
            const auto fit = gmm_fit(data, k, seed);
            return py::make_tuple(gmm_assign(fit.model, data).labels, gmm_bic(fit.model, data.rows()));
        },
        py::arg("x"), py::arg("k"), py::arg("seed") = 0, "Labels and BIC of the fitted mixture.");

    m.def(
        "select_k_silhouette",
        [](const F64Array& x, int k_min, int k_max, std::uint64_t seed) {
            const auto s = select_k_silhouette(to_matrix(x), k_min, k_max, seed);
            return py::make_tuple(s.k, s.candidates, s.scores);
        },
        py::arg("x"), py::arg("k_min") = 2, py::arg("k_max") = 9, py::arg("seed") = 0);

    m.def(
        "select_k_bic",
        [](const F64Array& x, int k_min, int k_max, std::uint64_t seed) {
            const auto s = select_k_bic(to_matrix(x), k_min, k_max, seed);
            return py::make_tuple(s.k, s.candidates, s.bic);
        },
        py::arg("x"), py::arg("k_min") = 1, py::arg("k_max") = 9, py::arg("seed") = 0);

    m.def(
        "silhouette", [](const F64Array& x, const std::vector<int>& labels) { return silhouette_score(to_matrix(x), labels); },
        py::arg("x"), py::arg("labels"));
    m.def(
        "davies_bouldin", [](const F64Array& x, const std::vector<int>& labels) { return davies_bouldin(to_matrix(x), labels); },
        py::arg("x"), py::arg("labels"));
    m.def(
        "calinski_harabasz",
        [](const F64Array& x, const std::vector<int>& labels) { return calinski_harabasz(to_matrix(x), labels); },
        py::arg("x"), py::arg("labels"));
    m.def("adjusted_rand", &adjusted_rand, py::arg("a"), py::arg("b"));

    m.def(
        "gpmix",
        [](const F64Array& profiles, std::optional<int> k, std::uint64_t seed, bool force_sampling) {
            const auto x = to_matrix(profiles);
            std::vector<RadialProfile> ps(static_cast<std::size_t>(x.rows()));
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                ps[i].samples.assign(x.row(i).data(), x.row(i).data() + x.cols());
                ps[i].normalized = true;
                ps[i].aligned = true;
            }
            GpmixConfig cfg;
            cfg.k = k;
            cfg.seed = seed;
            cfg.force_sampling = force_sampling;
            const auto r = gpmix_pipeline(ps, cfg);
            py::dict d;
            d["labels"] = r.partition.labels;
            d["k"] = r.partition.k;
            d["sampled"] = r.sampled;
            d["consensus_items"] = r.consensus_items;
            d["silhouette"] = r.validity.silhouette;
            return d;
        },
        py::arg("profiles"), py::arg("k") = py::none(), py::arg("seed") = 0, py::arg("force_sampling") = false,
        "Functional mixture clustering of radial profiles, one per row.");

    m.def(
        "run_pipeline",
        [](const py::object& config, const std::string& base_dir) {
            const auto cfg = pipeline_config_from_json(py_to_json(config), base_dir);
            RunReport r;
            {
                py::gil_scoped_release release;
                r = run_pipeline(cfg);
            }
            return json_to_py(report_to_json(r, false));
        },
        py::arg("config"), py::arg("base_dir") = "", "Run from a config dict; returns the report as a dict.");
}
