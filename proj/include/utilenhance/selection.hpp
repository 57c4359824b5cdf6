#pragma once

#include <string>
#include <vector>

#include "utilenhance/calibration.hpp"
#include "utilenhance/cascade.hpp"
#include "utilenhance/features.hpp"

namespace utilenhance {

struct SelectionPolicy {
  enum class Kind {
    StrictImproving,  // benchmark starts at B(contrast); a later correction joins only if it beats it
    Threshold,        // every applicable correction with B >= tau * max B joins
  };

  Kind kind = Kind::StrictImproving;
  double tau = 0.5;

  static SelectionPolicy strict() { return {Kind::StrictImproving, 0.5}; }
  static SelectionPolicy threshold(double tau) { return {Kind::Threshold, tau}; }

  /// "strict" or "threshold(<tau>)".
  std::string id() const;
  /// Throws InvalidParam when tau is outside (0, 1].
  void validate() const;
};

/// 1 iff the correction's paired feature lies inside its closed range.
PerCorrection<int> omega(const FeatureVector& features, const ApplicabilityRanges& ranges);

/// Gain I = omega * xi and benefit B = I / T for each correction, in rank order.
std::vector<CorrectionScore> score_corrections(const FeatureVector& features, const ContributionDictionary& dict);

/// Builds the per-image cascade. Steps always follow the rank order
/// contrast, color, clarity, brightness and carry `params`.
CascadePlan select_cascade(const FeatureVector& features, const ContributionDictionary& dict,
                           const SelectionPolicy& policy = SelectionPolicy::strict(),
                           const CorrectionParams& params = {});

}  // namespace utilenhance
