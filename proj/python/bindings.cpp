#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hmpf/config.hpp"
#include "hmpf/evaluation.hpp"
#include "hmpf/feature_file.hpp"
#include "hmpf/gist.hpp"
#include "hmpf/hog.hpp"
#include "hmpf/scoring.hpp"
#include "hmpf/synthetic.hpp"

namespace py = pybind11;
using namespace hmpf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<FeatureVector>& vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  Array out({vectors.size(), dim});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) view(i, j) = vectors[i][j];
  }
  return out;
}

std::vector<FeatureVector> from_array(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array (count, dim)");
  auto view = a.unchecked<2>();
  std::vector<FeatureVector> out;
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    std::vector<double> v(static_cast<std::size_t>(view.shape(1)));
    for (py::ssize_t j = 0; j < view.shape(1); ++j) v[j] = view(i, j);
    out.emplace_back(std::move(v));
  }
  return out;
}

GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D gray image (height, width)");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(std::span<const double> values) {
  Array out(values.size());
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

template <typename Kind>
ScoreVector<Kind> indexed(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  std::vector<double> values(a.data(), a.data() + a.size());
  auto ids = CandidateSet::all(values.size());
  if constexpr (std::is_same_v<Kind, RawKind>) {
    return make_raw_distances(std::move(ids), std::move(values));
  } else {
    return ScoreVector<Kind>(std::move(ids), std::move(values));
  }
}

py::dict report_dict(const ExperimentReport& r) {
  py::dict d;
  d["label"] = r.label;
  d["schedule"] = r.schedule;
  d["query_count"] = r.query_count;
  py::list methods;
  for (const auto& m : r.method_recalls) {
    py::dict md;
    md["tier"] = m.tier;
    md["method"] = m.method;
    md["recall_at_1"] = m.recall_at_1;
    methods.append(md);
  }
  d["methods"] = methods;
  d["final_recall_at_1"] = r.final_recall_at_1;
  d["combined_recall_at_1"] =
      r.combined_recall_at_1 ? py::object(py::float_(*r.combined_recall_at_1)) : py::none();
  d["mean_seconds_per_query"] = r.mean_seconds_per_query;
  d["mean_tier_seconds"] = r.mean_tier_seconds;
  d["mean_tier_selected"] = r.mean_tier_selected;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hmpf_core, m) {
  m.doc() = "Hierarchical multi-process fusion core";

  static py::handle error_type =
      py::exception<Error>(m, "HmpfError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const std::string category(category_name(e.category()));
      py::object exc = error_type(category + ": " + e.what());
      exc.attr("category") = category;
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("load_features", [](const std::filesystem::path& p) {
    return to_array(load_feature_file(p));
  }, py::arg("path"), "Read an HMPF1 file into a (count, dim) float64 array.");
  m.def("save_features", [](const std::filesystem::path& p, const Array& a) {
    save_feature_file(p, from_array(a));
  }, py::arg("path"), py::arg("features"));

  m.def("compute_hog", [](const Array& image, int cell_px) {
    HogParams params;
    params.cell_px = cell_px;
    return to_array(compute_hog(to_image(image), params).values());
  }, py::arg("image"), py::arg("cell_px") = 30);
  m.def("compute_gist", [](const Array& image) {
    return to_array(compute_gist(to_image(image)).values());
  }, py::arg("image"));

  m.def("min_max_normalize", [](const Array& d) {
    return to_array(min_max_normalize(indexed<RawKind>(d)).values());
  }, py::arg("distances"));
  m.def("renormalize", [](const Array& s) {
    return to_array(renormalize_01(indexed<NormalizedKind>(s)).values());
  }, py::arg("scores"));
  m.def("standardize", [](const Array& s) {
    return to_array(standardize(indexed<FusedKind>(s)).values());
  }, py::arg("scores"));

  m.def("validate_config", [](const std::filesystem::path& p) {
    return schedule_to_string(load_config(p));
  }, py::arg("path"), "Load a pipeline config; returns its k schedule.");

  m.def("run_experiment", [](const std::filesystem::path& manifest,
                             const std::filesystem::path& config, std::size_t workers,
                             const std::string& label) {
    ExperimentOptions options;
    options.workers = workers;
    options.label = label;
    const Dataset ds = load_dataset(manifest);
    const PipelineConfig cfg = load_config(config);
    ExperimentReport report;
    {
      py::gil_scoped_release release;
      report = run_experiment(ds, cfg, options);
    }
    return report_dict(report);
  }, py::arg("manifest"), py::arg("config"), py::arg("workers") = 1,
     py::arg("label") = "experiment");

  m.def("write_synthetic", [](const std::filesystem::path& dir, std::uint64_t seed,
                              std::size_t refs, std::size_t queries, std::size_t methods,
                              std::size_t distractors) {
    SyntheticSpec spec{refs, queries, methods, distractors, seed};
    const auto bench = generate_synthetic_benchmark(spec);
    write_synthetic_benchmark(bench, dir);
    py::list cases;
    for (const QueryCase c : bench.cases) {
      cases.append(c == QueryCase::kClean     ? "clean"
                   : c == QueryCase::kAliased ? "aliased"
                                              : "hard");
    }
    return cases;
  }, py::arg("out_dir"), py::arg("seed") = 42, py::arg("refs") = 50, py::arg("queries") = 50,
     py::arg("methods") = 3, py::arg("distractors") = 5);
}
