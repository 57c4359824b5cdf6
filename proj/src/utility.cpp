#include "utilenhance/utility.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "utilenhance/error.hpp"
#include "utilenhance/imgio.hpp"

namespace utilenhance {

double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

std::vector<PrPoint> MatchReport::pr_points(const std::string& class_id) const {
  const auto it = per_class.find(class_id);
  if (it == per_class.end() || it->second.gt_count == 0) return {};
  const ClassMatch& cm = it->second;
  std::vector<PrPoint> points;
  points.reserve(cm.ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < cm.ranked.size(); ++i) {
    if (cm.ranked[i].tp) ++tp;
    points.push_back({static_cast<double>(tp) / static_cast<double>(cm.gt_count),
                      static_cast<double>(tp) / static_cast<double>(i + 1)});
  }
  return points;
}

MatchReport match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "IoU threshold must be in (0, 1]");
  }
  MatchReport report;
  std::map<std::string, std::vector<std::size_t>> gt_by_class;
  for (std::size_t i = 0; i < gts.size(); ++i) gt_by_class[gts[i].class_id].push_back(i);
  std::map<std::string, std::vector<std::size_t>> det_by_class;
  for (std::size_t i = 0; i < dets.size(); ++i) det_by_class[dets[i].class_id].push_back(i);

  for (const auto& [cls, idx] : gt_by_class) report.per_class[cls].gt_count = idx.size();
  report.gt_count = gts.size();

  for (auto& [cls, order] : det_by_class) {
    std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) {
      return dets[a].confidence > dets[b].confidence;
    });
    ClassMatch& cm = report.per_class[cls];
    const auto gt_it = gt_by_class.find(cls);
    const std::vector<std::size_t> no_gts;
    const auto& candidates = gt_it == gt_by_class.end() ? no_gts : gt_it->second;
    std::vector<bool> taken(candidates.size(), false);

    for (std::size_t d : order) {
      double best = -1.0;
      std::size_t best_k = candidates.size();
      for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (taken[k]) continue;
        const double overlap = iou(dets[d].box, gts[candidates[k]].box);
        if (overlap >= iou_threshold && overlap > best) {
          best = overlap;
          best_k = k;
        }
      }
      const bool tp = best_k < candidates.size();
      if (tp) {
        taken[best_k] = true;
        ++cm.tp_count;
        report.tp_confidences.push_back(dets[d].confidence);
      } else {
        report.fp_confidences.push_back(dets[d].confidence);
      }
      cm.ranked.push_back({dets[d].confidence, tp});
    }
  }
  for (const auto& [cls, cm] : report.per_class) report.fn_count += cm.gt_count - cm.tp_count;
  return report;
}

double average_precision(const std::vector<PrPoint>& points) {
  // Interpolated precision at point i is the max precision at any point j >= i.
  double ap = 0.0;
  double envelope = 0.0;
  std::vector<double> interp(points.size());
  for (std::size_t i = points.size(); i-- > 0;) {
    envelope = std::max(envelope, points[i].precision);
    interp[i] = envelope;
  }
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    ap += (points[i].recall - prev_recall) * interp[i];
    prev_recall = points[i].recall;
  }
  return std::clamp(ap, 0.0, 1.0);
}

double mean_average_precision(const MatchReport& report, const std::vector<std::string>& classes) {
  double sum = 0.0;
  std::size_t k = 0;
  for (const auto& cls : classes) {
    const auto it = report.per_class.find(cls);
    if (it == report.per_class.end() || it->second.gt_count == 0) continue;
    sum += average_precision(report.pr_points(cls));
    ++k;
  }
  if (k == 0) throw Error(ErrorCode::NoGroundTruth, "no class with ground truth");
  return sum / static_cast<double>(k);
}

double mean_average_precision(const MatchReport& report) {
  std::vector<std::string> classes;
  for (const auto& [cls, cm] : report.per_class) classes.push_back(cls);
  return mean_average_precision(report, classes);
}

UtilityScore utility_score(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                           double iou_threshold) {
  if (gts.empty()) throw Error(ErrorCode::NoGroundTruth, "utility score undefined without ground truth");
  const MatchReport report = match_detections(dets, gts, iou_threshold);
  UtilityScore s;
  s.map = mean_average_precision(report);
  s.miss_rate = static_cast<double>(report.fn_count) / static_cast<double>(report.gt_count);
  s.c_tp = report.tp_confidences.empty() ? 0.0 : std::ranges::min(report.tp_confidences);
  s.c_fp = report.fp_confidences.empty() ? 0.0 : std::ranges::max(report.fp_confidences);
  s.q = s.map - s.miss_rate + s.c_tp - s.c_fp;
  return s;
}

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::SchemaError, where + ": " + what);
}

Box parse_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) schema_error(where, "bbox must be [x_min, y_min, x_max, y_max]");
  for (const auto& v : j) {
    if (!v.is_number()) schema_error(where, "bbox entries must be numbers");
  }
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) schema_error(where, "bbox requires x_min < x_max and y_min < y_max");
  return b;
}

std::string parse_class(const json& j, const std::string& where) {
  const auto it = j.find("class");
  if (it == j.end() || !it->is_string()) schema_error(where, "missing string \"class\"");
  return it->get<std::string>();
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) schema_error(where, std::string("missing array \"") + key + "\"");
  return *it;
}

}  // namespace

std::vector<ImageAnnotations> parse_annotations(const std::string& json_text, AnnotationKind kind) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) schema_error("document", "top level must be an object");
  const json& images = require_array(doc, "images", "document");

  std::vector<ImageAnnotations> out;
  out.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const json& img = images[i];
    const std::string where = "images[" + std::to_string(i) + "]";
    if (!img.is_object()) schema_error(where, "must be an object");
    const auto id = img.find("id");
    if (id == img.end() || !id->is_string()) schema_error(where, "missing string \"id\"");
    ImageAnnotations ann{id->get<std::string>(), {}, {}};

    const bool has_dets = img.contains("detections");
    const bool has_gts = img.contains("ground_truth");
    if (kind == AnnotationKind::Detections && !has_dets) schema_error(where, "missing \"detections\"");
    if (kind == AnnotationKind::GroundTruth && !has_gts) schema_error(where, "missing \"ground_truth\"");
    if (kind == AnnotationKind::Either && !has_dets && !has_gts) {
      schema_error(where, "needs \"detections\" or \"ground_truth\"");
    }

    if (has_dets) {
      const json& dets = require_array(img, "detections", where);
      for (std::size_t k = 0; k < dets.size(); ++k) {
        const std::string at = where + ".detections[" + std::to_string(k) + "]";
        if (!dets[k].is_object()) schema_error(at, "must be an object");
        const auto conf = dets[k].find("confidence");
        if (conf == dets[k].end() || !conf->is_number()) schema_error(at, "missing numeric \"confidence\"");
        const double c = conf->get<double>();
        if (!(c >= 0.0 && c <= 1.0)) schema_error(at, "confidence must be in [0, 1]");
        ann.detections.push_back({parse_box(dets[k].value("bbox", json()), at), parse_class(dets[k], at), c});
      }
    }
    if (has_gts) {
      const json& gts = require_array(img, "ground_truth", where);
      for (std::size_t k = 0; k < gts.size(); ++k) {
        const std::string at = where + ".ground_truth[" + std::to_string(k) + "]";
        if (!gts[k].is_object()) schema_error(at, "must be an object");
        if (gts[k].contains("confidence")) schema_error(at, "ground truth must not carry \"confidence\"");
        ann.ground_truth.push_back({parse_box(gts[k].value("bbox", json()), at), parse_class(gts[k], at)});
      }
    }
    out.push_back(std::move(ann));
  }
  return out;
}

std::vector<ImageAnnotations> load_annotations(const std::filesystem::path& path, AnnotationKind kind) {
  const auto bytes = read_file(path);
  return parse_annotations(std::string(bytes.begin(), bytes.end()), kind);
}

std::string dump_annotations(const std::vector<ImageAnnotations>& images) {
  json arr = json::array();
  for (const auto& img : images) {
    json j{{"id", img.id}};
    json dets = json::array();
    for (const auto& d : img.detections) {
      dets.push_back({{"bbox", {d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max}},
                      {"class", d.class_id},
                      {"confidence", d.confidence}});
    }
    json gts = json::array();
    for (const auto& g : img.ground_truth) {
      gts.push_back({{"bbox", {g.box.x_min, g.box.y_min, g.box.x_max, g.box.y_max}}, {"class", g.class_id}});
    }
    if (!img.detections.empty() || img.ground_truth.empty()) j["detections"] = std::move(dets);
    if (!img.ground_truth.empty()) j["ground_truth"] = std::move(gts);
    arr.push_back(std::move(j));
  }
  return json{{"images", std::move(arr)}}.dump(2);
}

}  // namespace utilenhance
