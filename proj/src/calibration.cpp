#include "utilenhance/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "utilenhance/corrections.hpp"
#include "utilenhance/error.hpp"

namespace utilenhance {

using nlohmann::json;

void ContributionDictionary::validate() const {
  for (CorrectionKind k : kRankOrder) {
    const double x = xi_of(k);
    if (!(x >= 0.0 && x <= 1.0)) {
      throw Error(ErrorCode::InvalidParam, "xi(" + std::string(to_string(k)) + ") must be in [0, 1]");
    }
    if (!(time_of(k) > 0.0) || !std::isfinite(time_of(k))) {
      throw Error(ErrorCode::InvalidParam, "time cost of " + std::string(to_string(k)) + " must be > 0");
    }
  }
  ranges.validate();
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "iou_threshold must be in (0, 1]");
  }
}

ContributionDictionary yolox_dictionary() {
  ContributionDictionary d;
  d.detector_id = "yolox";
  d.xi = {0.4229, 0.3768, 0.1073, 0.3222};
  return d;
}

ContributionDictionary centernet_dictionary() {
  ContributionDictionary d;
  d.detector_id = "centernet";
  d.xi = {0.3707, 0.2808, 0.0933, 0.2810};
  return d;
}

std::string dictionary_to_json(const ContributionDictionary& dict) {
  json xi = json::object();
  json cost = json::object();
  for (CorrectionKind k : kRankOrder) {
    xi[std::string(to_string(k))] = dict.xi_of(k);
    cost[std::string(to_string(k))] = dict.time_of(k);
  }
  json ranges = json::object();
  for (Feature f : kAllFeatures) {
    ranges[std::string(to_string(f))] = {dict.ranges.of(f).lo, dict.ranges.of(f).hi};
  }
  const json doc{{"detector_id", dict.detector_id},
                 {"xi", std::move(xi)},
                 {"ranges", std::move(ranges)},
                 {"time_cost", std::move(cost)},
                 {"iou_threshold", dict.iou_threshold}};
  return doc.dump(2) + "\n";
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::SchemaError, "dictionary: " + what); }

double number_at(const json& obj, const std::string& key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) bad(where + "." + key + " must be a number");
  return it->get<double>();
}

const json& object_at(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_object()) bad(std::string(key) + " must be an object");
  return *it;
}

}  // namespace

ContributionDictionary dictionary_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("top level must be an object");

  ContributionDictionary dict;
  const auto id = doc.find("detector_id");
  if (id == doc.end() || !id->is_string()) bad("detector_id must be a string");
  dict.detector_id = id->get<std::string>();

  const json& xi = object_at(doc, "xi");
  const json& cost = object_at(doc, "time_cost");
  const json& ranges = object_at(doc, "ranges");
  if (xi.size() != 4 || cost.size() != 4 || ranges.size() != 4) bad("xi, time_cost and ranges need exactly four entries");
  for (CorrectionKind k : kRankOrder) {
    const std::string key(to_string(k));
    dict.xi[index_of(k)] = number_at(xi, key, "xi");
    dict.time_cost[index_of(k)] = number_at(cost, key, "time_cost");
  }
  for (Feature f : kAllFeatures) {
    const std::string key(to_string(f));
    const auto it = ranges.find(key);
    if (it == ranges.end() || !it->is_array() || it->size() != 2 || !(*it)[0].is_number() ||
        !(*it)[1].is_number()) {
      bad("ranges." + key + " must be [lo, hi]");
    }
    dict.ranges.of(f) = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  dict.iou_threshold = number_at(doc, "iou_threshold", "dictionary");
  try {
    dict.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return dict;
}

ContributionDictionary load_dictionary(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return dictionary_from_json(std::string(bytes.begin(), bytes.end()));
}

void save_dictionary(const ContributionDictionary& dict, const std::filesystem::path& path) {
  const std::string text = dictionary_to_json(dict);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

double plcc(std::span<const double> s, std::span<const double> p) {
  if (s.size() != p.size()) throw Error(ErrorCode::DegenerateInput, "PLCC inputs differ in length");
  if (s.size() < 3) throw Error(ErrorCode::DegenerateInput, "PLCC needs at least three samples");
  // Single-pass co-moment update (Welford).
  double mean_s = 0.0, mean_p = 0.0, m2_s = 0.0, m2_p = 0.0, co = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double ds = s[i] - mean_s;
    const double dp = p[i] - mean_p;
    mean_s += ds / n;
    mean_p += dp / n;
    m2_s += ds * (s[i] - mean_s);
    m2_p += dp * (p[i] - mean_p);
    co += ds * (p[i] - mean_p);
  }
  if (!(m2_s > 0.0) || !(m2_p > 0.0)) throw Error(ErrorCode::DegenerateInput, "PLCC input has zero variance");
  return std::clamp(co / std::sqrt(m2_s * m2_p), -1.0, 1.0);
}

PerCorrection<double> feature_correlations(std::span<const CalibrationSample> samples) {
  std::vector<double> q;
  q.reserve(samples.size());
  for (const auto& s : samples) q.push_back(s.utility.q);
  PerCorrection<double> out{};
  for (CorrectionKind k : kRankOrder) {
    std::vector<double> values;
    values.reserve(samples.size());
    for (const auto& s : samples) values.push_back(value_of(s.features, paired_feature(k)));
    try {
      out[index_of(k)] = plcc(q, values);
    } catch (const Error& e) {
      throw Error(ErrorCode::DegenerateInput, std::string(to_string(paired_feature(k))) + ": " + e.what());
    }
  }
  return out;
}

ContributionDictionary calibrate(std::span<const CalibrationSample> samples, const PerCorrection<double>& time_cost,
                                 const ApplicabilityRanges& ranges, const CalibrationOptions& options) {
  const auto r = feature_correlations(samples);
  ContributionDictionary dict;
  dict.detector_id = options.detector_id;
  dict.ranges = ranges;
  dict.time_cost = time_cost;
  dict.iou_threshold = options.iou_threshold;
  double total = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    dict.xi[i] = std::abs(r[i]);
    total += dict.xi[i];
  }
  if (options.sum_to_one && total > 0.0) {
    for (double& x : dict.xi) x /= total;
  }
  dict.validate();
  return dict;
}

PerCorrection<double> measure_time_cost(std::span<const RasterImage> images, const CorrectionParams& params,
                                        int reps) {
  if (images.empty()) throw Error(ErrorCode::InvalidParam, "time measurement needs at least one image");
  if (reps < 1) throw Error(ErrorCode::InvalidParam, "repetitions must be >= 1");
  params.validate();
  using clock = std::chrono::steady_clock;
  PerCorrection<double> out{};
  for (CorrectionKind k : kRankOrder) {
    std::vector<double> seconds;
    seconds.reserve(images.size() * static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
      for (const auto& img : images) {
        const auto start = clock::now();
        const RasterImage result = apply_correction(img, k, params);
        const auto stop = clock::now();
        // Keep the result observable so the call is not elided.
        if (result.size() == 0) throw Error(ErrorCode::InvalidParam, "empty correction output");
        seconds.push_back(std::chrono::duration<double>(stop - start).count());
      }
    }
    const auto mid = seconds.begin() + static_cast<std::ptrdiff_t>(seconds.size() / 2);
    std::nth_element(seconds.begin(), mid, seconds.end());
    // Clock granularity can report zero on tiny images; T must stay positive.
    out[index_of(k)] = std::max(*mid, 1e-9);
  }
  return out;
}

}  // namespace utilenhance
