#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "utilenhance/calibration.hpp"
#include "utilenhance/cascade.hpp"
#include "utilenhance/features.hpp"
#include "utilenhance/selection.hpp"

namespace utilenhance {

namespace fs = std::filesystem;

/// Settings shared by every subcommand. Loaded from a JSON config file and
/// then overridden field by field by command-line flags.
struct PipelineConfig {
  std::optional<fs::path> dict_path;
  CorrectionParams params;
  SelectionPolicy policy;
  std::optional<double> iou_threshold;  // falls back to the dictionary's value
  GradientMode gradient_mode = GradientMode::SquareOfSum;
  fs::path in_dir;
  fs::path out_path;  // output directory (enhance) or file (calibrate, bench dictionary)
  std::optional<fs::path> report_path;
  int workers = 1;

  // calibrate / evaluate inputs
  std::optional<fs::path> detections_path;
  std::optional<fs::path> ground_truth_path;
  std::optional<fs::path> baseline_detections_path;
  std::string detector_id = "custom";
  bool sum_to_one = false;

  // bench
  int bench_reps = 5;
  int bench_width = 640;
  int bench_height = 480;

  /// Parameter ranges, worker count and tau. Throws InvalidParam.
  void validate() const;
};

/// Fields absent from the document keep their current value in `base`.
/// Relative paths are resolved against `base_dir` when it is non-empty.
/// Throws SchemaError on unknown keys or ill-typed values.
PipelineConfig merge_config_json(const std::string& text, PipelineConfig base = {}, const fs::path& base_dir = {});
/// Relative paths inside the file resolve against the file's directory.
PipelineConfig load_config(const fs::path& path, PipelineConfig base = {});

/// Image files (.png, .ppm) directly under `dir`, sorted lexicographically.
std::vector<fs::path> list_images(const fs::path& dir);

/// Runs job(i) for i in [0, count) on `workers` threads. Each index is
/// claimed by exactly one worker; callers write results into per-index slots.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

/// Resolve the dictionary named by the config, or the reference YOLOX one.
ContributionDictionary resolve_dictionary(const PipelineConfig& config);

// Each command returns the process exit code: 0 iff nothing failed.
int cmd_features(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_select(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_enhance(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_calibrate(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_evaluate(const PipelineConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const PipelineConfig& config, std::ostream& out, std::ostream& err);

/// Dataset-level evaluation: detections pooled per class across images
/// (matching is still per image), plus per-image utility scores.
struct DatasetEvaluation {
  double map = 0.0;
  std::map<std::string, double> class_ap;
  struct ImageRow {
    std::string id;
    UtilityScore score;
  };
  std::vector<ImageRow> images;  // images without ground truth are skipped
};

DatasetEvaluation evaluate_dataset(const std::vector<ImageAnnotations>& detections,
                                   const std::vector<ImageAnnotations>& ground_truth, double iou_threshold);

/// The per-image selection record written by `select` and `enhance`.
std::string selection_record_json(const std::string& image_id, const FeatureVector& features,
                                  const CascadePlan& plan);

}  // namespace utilenhance
