#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace utilenhance {

struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool valid() const { return x_min < x_max && y_min < y_max; }
  double area() const { return (x_max - x_min) * (y_max - y_min); }
  friend bool operator==(const Box&, const Box&) = default;
};

struct Detection {
  Box box;
  std::string class_id;
  double confidence = 0.0;
};

struct GroundTruth {
  Box box;
  std::string class_id;
};

/// A ranked detection: confidence plus whether it matched a ground truth.
struct RankedHit {
  double confidence = 0.0;
  bool tp = false;
};

struct ClassMatch {
  std::vector<RankedHit> ranked;  // confidence-descending, ties in input order
  std::size_t gt_count = 0;
  std::size_t tp_count = 0;
};

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

struct MatchReport {
  std::vector<double> tp_confidences;
  std::vector<double> fp_confidences;
  std::size_t fn_count = 0;
  std::size_t gt_count = 0;
  std::map<std::string, ClassMatch> per_class;

  /// Precision/recall after each ranked detection of one class.
  std::vector<PrPoint> pr_points(const std::string& class_id) const;
};

struct UtilityScore {
  double q = 0.0;
  double map = 0.0;
  double miss_rate = 0.0;
  double c_tp = 0.0;
  double c_fp = 0.0;
};

inline constexpr double kDefaultIouThreshold = 0.5;

double iou(const Box& a, const Box& b);

/// Greedy matching per class: detections in descending confidence (stable),
/// each claims the unmatched same-class ground truth with the highest IoU at
/// or above the threshold.
MatchReport match_detections(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                             double iou_threshold = kDefaultIouThreshold);

/// All-point interpolated AP over a recall-sorted PR curve. Recall starts at 0.
double average_precision(const std::vector<PrPoint>& points);

/// Unweighted mean of per-class AP over the listed classes that have ground
/// truth. Throws NoGroundTruth if none do.
double mean_average_precision(const MatchReport& report, const std::vector<std::string>& classes);
/// Same, over every class in the report.
double mean_average_precision(const MatchReport& report);

/// Q = mAP - FN/GT + C_TP - C_FP, where C_TP is the smallest TP confidence
/// and C_FP the largest FP confidence (each 0 when its list is empty).
UtilityScore utility_score(const std::vector<Detection>& dets, const std::vector<GroundTruth>& gts,
                           double iou_threshold = kDefaultIouThreshold);

/// Per-image record of the detections/ground-truth JSON documents.
struct ImageAnnotations {
  std::string id;
  std::vector<Detection> detections;
  std::vector<GroundTruth> ground_truth;
};

/// Which arrays a document must (or must not) carry.
enum class AnnotationKind { Detections, GroundTruth, Either };

/// {"images":[{"id", "detections":[{"bbox","class","confidence"}], "ground_truth":[{"bbox","class"}]}]}
/// Throws SchemaError on any violation, including confidence inside ground truth.
std::vector<ImageAnnotations> parse_annotations(const std::string& json_text, AnnotationKind kind);
std::vector<ImageAnnotations> load_annotations(const std::filesystem::path& path, AnnotationKind kind);
std::string dump_annotations(const std::vector<ImageAnnotations>& images);

}  // namespace utilenhance
