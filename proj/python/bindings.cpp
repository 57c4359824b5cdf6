#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "utilenhance/calibration.hpp"
#include "utilenhance/corrections.hpp"
#include "utilenhance/error.hpp"
#include "utilenhance/features.hpp"
#include "utilenhance/selection.hpp"
#include "utilenhance/utility.hpp"

namespace py = pybind11;
using namespace utilenhance;

namespace {

using ImageArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

RasterImage to_raster(const ImageArray& array) {
  if (array.ndim() != 3 || array.shape(2) != 3) {
    throw py::value_error("expected a uint8 array of shape (height, width, 3)");
  }
  const auto h = static_cast<std::size_t>(array.shape(0));
  const auto w = static_cast<std::size_t>(array.shape(1));
  std::vector<Rgb> pixels(w * h);
  std::memcpy(pixels.data(), array.data(), pixels.size() * sizeof(Rgb));
  return RasterImage(w, h, std::move(pixels));
}

ImageArray to_array(const RasterImage& img) {
  ImageArray out({img.height(), img.width(), std::size_t{3}});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.size() * sizeof(Rgb));
  return out;
}

CorrectionKind kind_of(const std::string& name) {
  const auto kind = correction_from_string(name);
  if (!kind) throw Error(ErrorCode::InvalidParam, "unknown correction: " + name);
  return *kind;
}

GradientMode gradient_mode_of(const std::string& name) {
  if (name == "square_of_sum") return GradientMode::SquareOfSum;
  if (name == "sum_of_squares") return GradientMode::SumOfSquares;
  throw Error(ErrorCode::InvalidParam, "gradient mode must be square_of_sum or sum_of_squares");
}

SelectionPolicy policy_of(const std::string& name, double tau) {
  if (name == "strict") return SelectionPolicy::strict();
  if (name == "threshold") return SelectionPolicy::threshold(tau);
  throw Error(ErrorCode::InvalidParam, "policy must be strict or threshold");
}

py::dict per_correction(const PerCorrection<double>& values) {
  py::dict out;
  for (CorrectionKind k : kRankOrder) out[py::str(std::string(to_string(k)))] = values[index_of(k)];
  return out;
}

PerCorrection<double> from_per_correction(const std::map<std::string, double>& values) {
  PerCorrection<double> out{};
  PerCorrection<bool> seen{};
  for (const auto& [name, v] : values) {
    const CorrectionKind k = kind_of(name);
    out[index_of(k)] = v;
    seen[index_of(k)] = true;
  }
  for (CorrectionKind k : kRankOrder) {
    if (!seen[index_of(k)]) throw Error(ErrorCode::InvalidParam, "missing value for " + std::string(to_string(k)));
  }
  return out;
}

std::vector<std::string> names_of(const std::vector<CorrectionKind>& kinds) {
  std::vector<std::string> out;
  for (CorrectionKind k : kinds) out.emplace_back(to_string(k));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Detector-utility driven image enhancement";

  static py::handle error_type = py::exception<Error>(m, "UtilEnhanceError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(std::string(to_string(e.code())) + ": " + e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::class_<CorrectionParams>(m, "CorrectionParams")
      .def(py::init<>())
      .def_readwrite("gamma", &CorrectionParams::gamma)
      .def_readwrite("median_window", &CorrectionParams::median_window)
      .def_readwrite("clahe_clip", &CorrectionParams::clahe_clip)
      .def_readwrite("clahe_tiles", &CorrectionParams::clahe_tiles)
      .def_readwrite("wb_max_gain", &CorrectionParams::wb_max_gain)
      .def("validate", &CorrectionParams::validate);

  py::class_<FeatureVector>(m, "FeatureVector")
      .def(py::init<>())
      .def(py::init([](double g, double s, double e, double b) { return FeatureVector{g, s, e, b}; }),
           py::arg("gradient"), py::arg("saturation"), py::arg("entropy"), py::arg("brightness"))
      .def_readwrite("gradient", &FeatureVector::gradient)
      .def_readwrite("saturation", &FeatureVector::saturation)
      .def_readwrite("entropy", &FeatureVector::entropy)
      .def_readwrite("brightness", &FeatureVector::brightness)
      .def("__repr__", [](const FeatureVector& f) {
        return "FeatureVector(gradient=" + std::to_string(f.gradient) + ", saturation=" + std::to_string(f.saturation) +
               ", entropy=" + std::to_string(f.entropy) + ", brightness=" + std::to_string(f.brightness) + ")";
      });

  py::class_<Box>(m, "Box")
      .def(py::init([](double x0, double y0, double x1, double y1) { return Box{x0, y0, x1, y1}; }))
      .def_readwrite("x_min", &Box::x_min)
      .def_readwrite("y_min", &Box::y_min)
      .def_readwrite("x_max", &Box::x_max)
      .def_readwrite("y_max", &Box::y_max);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](Box b, std::string c, double conf) { return Detection{b, std::move(c), conf}; }),
           py::arg("box"), py::arg("class_id"), py::arg("confidence"))
      .def_readwrite("box", &Detection::box)
      .def_readwrite("class_id", &Detection::class_id)
      .def_readwrite("confidence", &Detection::confidence);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def(py::init([](Box b, std::string c) { return GroundTruth{b, std::move(c)}; }), py::arg("box"),
           py::arg("class_id"))
      .def_readwrite("box", &GroundTruth::box)
      .def_readwrite("class_id", &GroundTruth::class_id);

  py::class_<UtilityScore>(m, "UtilityScore")
      .def_readonly("q", &UtilityScore::q)
      .def_readonly("map", &UtilityScore::map)
      .def_readonly("miss_rate", &UtilityScore::miss_rate)
      .def_readonly("c_tp", &UtilityScore::c_tp)
      .def_readonly("c_fp", &UtilityScore::c_fp);

  py::class_<ContributionDictionary>(m, "ContributionDictionary")
      .def_readwrite("detector_id", &ContributionDictionary::detector_id)
      .def_readwrite("iou_threshold", &ContributionDictionary::iou_threshold)
      .def_property(
          "xi", [](const ContributionDictionary& d) { return per_correction(d.xi); },
          [](ContributionDictionary& d, const std::map<std::string, double>& v) { d.xi = from_per_correction(v); })
      .def_property(
          "time_cost", [](const ContributionDictionary& d) { return per_correction(d.time_cost); },
          [](ContributionDictionary& d, const std::map<std::string, double>& v) {
            d.time_cost = from_per_correction(v);
          })
      .def("validate", &ContributionDictionary::validate)
      .def("to_json", [](const ContributionDictionary& d) { return dictionary_to_json(d); })
      .def_static("from_json", &dictionary_from_json)
      .def_static("load", &load_dictionary)
      .def("save", [](const ContributionDictionary& d, const std::filesystem::path& p) { save_dictionary(d, p); })
      .def("__eq__", [](const ContributionDictionary& a, const ContributionDictionary& b) { return a == b; });

  m.def("yolox_dictionary", &yolox_dictionary);
  m.def("centernet_dictionary", &centernet_dictionary);

  // Images cross the boundary as (height, width, 3) uint8 arrays.
  m.def("gamma_transform", [](const ImageArray& a, double gamma) { return to_array(gamma_transform(to_raster(a), gamma)); },
        py::arg("image"), py::arg("gamma") = 0.5);
  m.def("white_balance", [](const ImageArray& a, double cap) { return to_array(white_balance(to_raster(a), cap)); },
        py::arg("image"), py::arg("max_gain") = 3.0);
  m.def("median_filter", [](const ImageArray& a, int window) { return to_array(median_filter(to_raster(a), window)); },
        py::arg("image"), py::arg("window") = 3);
  m.def("clahe", [](const ImageArray& a, double clip, int tiles) { return to_array(clahe(to_raster(a), clip, tiles)); },
        py::arg("image"), py::arg("clip") = 2.0, py::arg("tiles") = 8);
  m.def(
      "apply_cascade",
      [](const ImageArray& a, const std::vector<std::string>& kinds, const CorrectionParams& params) {
        CascadePlan plan;
        for (const auto& name : kinds) plan.steps.push_back({kind_of(name), params});
        return to_array(apply_cascade(to_raster(a), plan));
      },
      py::arg("image"), py::arg("corrections"), py::arg("params") = CorrectionParams{});
  m.def(
      "to_luma",
      [](const ImageArray& a) {
        const GrayImage g = to_luma(to_raster(a));
        py::array_t<std::uint8_t> out({g.height(), g.width()});
        std::memcpy(out.mutable_data(), g.pixels().data(), g.size());
        return out;
      },
      py::arg("image"));
  m.def(
      "extract_features",
      [](const ImageArray& a, const std::string& mode) { return extract_features(to_raster(a), gradient_mode_of(mode)); },
      py::arg("image"), py::arg("gradient_mode") = "square_of_sum");

  m.def("iou", &iou);
  m.def("utility_score", &utility_score, py::arg("detections"), py::arg("ground_truth"),
        py::arg("iou_threshold") = kDefaultIouThreshold);
  m.def(
      "plcc", [](const std::vector<double>& s, const std::vector<double>& p) { return plcc(s, p); }, py::arg("s"),
      py::arg("p"));

  m.def(
      "calibrate",
      [](const std::vector<FeatureVector>& features, const std::vector<double>& q, const std::string& detector_id,
         bool sum_to_one) {
        if (features.size() != q.size()) throw Error(ErrorCode::DegenerateInput, "features and q differ in length");
        std::vector<CalibrationSample> samples(features.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
          samples[i].image_id = std::to_string(i);
          samples[i].features = features[i];
          samples[i].utility.q = q[i];
        }
        CalibrationOptions options;
        options.detector_id = detector_id;
        options.sum_to_one = sum_to_one;
        return calibrate(samples, kReferenceTimeCost, ApplicabilityRanges{}, options);
      },
      py::arg("features"), py::arg("q"), py::arg("detector_id") = "custom", py::arg("sum_to_one") = false);

  m.def(
      "select_cascade",
      [](const FeatureVector& f, const ContributionDictionary& d, const std::string& policy, double tau) {
        return names_of(select_cascade(f, d, policy_of(policy, tau)).kinds());
      },
      py::arg("features"), py::arg("dictionary"), py::arg("policy") = "strict", py::arg("tau") = 0.5);
  m.def(
      "benefits",
      [](const FeatureVector& f, const ContributionDictionary& d) {
        PerCorrection<double> b{};
        for (const auto& s : score_corrections(f, d)) b[index_of(s.kind)] = s.benefit;
        return per_correction(b);
      },
      py::arg("features"), py::arg("dictionary"));
}
