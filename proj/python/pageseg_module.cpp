#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "pageseg/errors.hpp"
#include "pageseg/eval.hpp"
#include "pageseg/imaging.hpp"
#include "pageseg/json_io.hpp"
#include "pageseg/pairgen.hpp"
#include "pageseg/model.hpp"
#include "pageseg/pipeline.hpp"
#include "pageseg/segment.hpp"
#include "pageseg/synthdoc.hpp"

namespace py = pybind11;
using namespace pageseg;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T, typename A>
Grid<T> to_grid(const A& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-D array");
  Grid<T> g(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), g.data().begin());
  return g;
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> a({g.height(), g.width()});
  std::copy(g.data().begin(), g.data().end(), a.mutable_data());
  return a;
}

DocumentImage to_document(const FloatArray& a) { return {to_grid<float>(a), "array"}; }

// Options not in the serialized defaults are rejected so typos surface.
SynthConfig synth_config(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  const nlohmann::json known = SynthConfig{};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k) && k != "main_block" && k != "side_blocks")
      throw ConfigError("unknown synth option '" + k + "'");
  return j.get<SynthConfig>();
}

// Runs a pipeline command from a JSON config string; returns the command log.
std::string run_command(const std::string& name, const std::string& config_json) {
  PipelineConfig cfg = pipeline_config_from_json(nlohmann::json::parse(config_json));
  std::ostringstream log;
  if (name == "synth") cmd_synth(cfg, log);
  else if (name == "prepare-pairs") cmd_prepare_pairs(cfg, log);
  else if (name == "train") cmd_train(cfg, log);
  else if (name == "segment") cmd_segment(cfg, {}, log);
  else if (name == "visualize") cmd_visualize(cfg, {}, log);
  else if (name == "evaluate") cmd_evaluate(cfg, log);
  else throw ConfigError("unknown command '" + name + "'");
  return log.str();
}

}  // namespace

PYBIND11_MODULE(_pageseg, m) {
  m.doc() = "Unsupervised main-text / side-text page segmentation";

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<UndefinedStatisticError>(m, "UndefinedStatisticError", PyExc_ArithmeticError);

  py::class_<ComponentStats>(m, "ComponentStats")
      .def(py::init<>())
      .def_readwrite("avg_height", &ComponentStats::avg_height)
      .def_readwrite("avg_width", &ComponentStats::avg_width)
      .def_readwrite("component_count", &ComponentStats::component_count)
      .def_readwrite("foreground_count", &ComponentStats::foreground_count);

  m.def("otsu_threshold", [](const FloatArray& a) {
    return otsu_threshold(std::span<const float>(a.data(), static_cast<std::size_t>(a.size())));
  });
  m.def("binarize", [](const FloatArray& img) { return to_array(binarize(to_document(img))); },
        "Foreground mask (1 = ink) of a [0,1] grayscale page.");
  m.def(
      "component_stats",
      [](const ByteArray& bin, int x, int y, int size, int min_area) {
        return component_stats(to_grid<std::uint8_t>(bin), {x, y, size}, min_area);
      },
      py::arg("bin"), py::arg("x"), py::arg("y"), py::arg("size"), py::arg("min_area") = kDefaultMinArea);
  m.def("similarity_s1", &similarity_s1);
  m.def("similarity_s2", &similarity_s2);

  py::class_<PCAModel>(m, "PCAModel")
      .def_readonly("dim", &PCAModel::dim)
      .def_readonly("mean", &PCAModel::mean)
      .def_readonly("explained_variance", &PCAModel::explained_variance)
      .def_readonly("degenerate", &PCAModel::degenerate)
      .def_property_readonly("components",
                             [](const PCAModel& p) {
                               py::array_t<double> a({p.k(), p.dim});
                               std::copy(p.components.begin(), p.components.end(), a.mutable_data());
                               return a;
                             })
      .def("project", [](const PCAModel& p, int i, const FloatArray& v) {
        return p.project(i, std::span<const float>(v.data(), static_cast<std::size_t>(v.size())));
      });
  m.def(
      "fit_pca",
      [](const FloatArray& rows, int k) {
        if (rows.ndim() != 2) throw ShapeError("expected an n x dim array");
        return fit_pca(std::span<const float>(rows.data(), static_cast<std::size_t>(rows.size())),
                       static_cast<int>(rows.shape(0)), static_cast<int>(rows.shape(1)), k);
      },
      py::arg("rows"), py::arg("k") = 3);

  m.def("f_measure", [](long tp, long fp, long fn) {
    const Scores s = f_measure({tp, fp, fn});
    return py::make_tuple(s.precision, s.recall, s.f);
  });
  m.def("confusion", [](const ByteArray& pred, const ByteArray& gt, int cls) {
    const auto c = confusion(to_grid<std::uint8_t>(pred), to_grid<std::uint8_t>(gt), static_cast<TextClass>(cls));
    return py::make_tuple(c.tp, c.fp, c.fn);
  });

  m.def(
      "_generate_page",
      [](std::uint64_t seed, const std::string& options) {
        Rng rng(seed);
        const SynthPage p = generate_page(synth_config(options), rng);
        return py::make_tuple(to_array(p.image.pixels), to_array(p.labels));
      },
      py::arg("seed"), py::arg("options_json"));

  m.def(
      "segment_page",
      [](const std::filesystem::path& checkpoint, const FloatArray& img, int stride) {
        const Checkpoint ck = load_checkpoint(checkpoint);
        const FeatureExtractor ex = extract_branch(ck.model);
        const SlidingConfig sliding = resolve_sliding({0, stride, 64, true}, ex.input_size());
        return to_array(segment_page(ex, to_document(img), sliding, {}).segmentation);
      },
      py::arg("checkpoint"), py::arg("image"), py::arg("stride") = 0,
      "Labels 0/1/2 (background/main/side) for one page.");

  m.def("run_command", &run_command, py::arg("name"), py::arg("config_json"));
}
