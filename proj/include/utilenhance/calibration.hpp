#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "utilenhance/cascade.hpp"
#include "utilenhance/features.hpp"
#include "utilenhance/imgio.hpp"
#include "utilenhance/utility.hpp"

namespace utilenhance {

/// Per-correction time cost in seconds, from the reference measurements.
inline constexpr PerCorrection<double> kReferenceTimeCost = {0.027, 0.033, 0.021, 0.024};

/// Per-detector contribution weights, applicability ranges and time costs.
struct ContributionDictionary {
  std::string detector_id;
  PerCorrection<double> xi{};
  ApplicabilityRanges ranges{};
  PerCorrection<double> time_cost = kReferenceTimeCost;
  double iou_threshold = kDefaultIouThreshold;

  double xi_of(CorrectionKind k) const { return xi[index_of(k)]; }
  double time_of(CorrectionKind k) const { return time_cost[index_of(k)]; }

  /// Throws InvalidParam if any xi leaves [0,1], any T <= 0, or a range is malformed.
  void validate() const;

  friend bool operator==(const ContributionDictionary&, const ContributionDictionary&) = default;
};

/// Published dictionaries for the two reference detectors.
ContributionDictionary yolox_dictionary();
ContributionDictionary centernet_dictionary();

std::string dictionary_to_json(const ContributionDictionary& dict);
/// Throws SchemaError on missing or ill-typed fields.
ContributionDictionary dictionary_from_json(const std::string& text);
ContributionDictionary load_dictionary(const std::filesystem::path& path);
void save_dictionary(const ContributionDictionary& dict, const std::filesystem::path& path);

/// Pearson linear correlation. Throws DegenerateInput for fewer than three
/// samples, mismatched lengths, or a constant input.
double plcc(std::span<const double> s, std::span<const double> p);

struct CalibrationSample {
  std::string image_id;
  FeatureVector features;
  UtilityScore utility;
};

struct CalibrationOptions {
  std::string detector_id = "custom";
  double iou_threshold = kDefaultIouThreshold;
  bool sum_to_one = false;
};

/// Signed PLCC between utility q and each correction's paired feature.
PerCorrection<double> feature_correlations(std::span<const CalibrationSample> samples);

/// xi(correction) = |PLCC(q, paired feature)|, optionally rescaled to sum to one.
ContributionDictionary calibrate(std::span<const CalibrationSample> samples, const PerCorrection<double>& time_cost,
                                 const ApplicabilityRanges& ranges, const CalibrationOptions& options = {});

/// Median wall-clock seconds per image for each correction over `reps`
/// repetitions of every image.
PerCorrection<double> measure_time_cost(std::span<const RasterImage> images, const CorrectionParams& params,
                                        int reps = 5);

}  // namespace utilenhance
