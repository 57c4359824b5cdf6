#include "utilenhance/selection.hpp"

#include <algorithm>
#include <sstream>

#include "utilenhance/error.hpp"

namespace utilenhance {

std::string SelectionPolicy::id() const {
  if (kind == Kind::StrictImproving) return "strict";
  std::ostringstream os;
  os << "threshold(" << tau << ")";
  return os.str();
}

void SelectionPolicy::validate() const {
  if (kind == Kind::Threshold && !(tau > 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "tau must be in (0, 1]");
  }
}

PerCorrection<int> omega(const FeatureVector& features, const ApplicabilityRanges& ranges) {
  PerCorrection<int> out{};
  for (CorrectionKind k : kRankOrder) {
    const Feature f = paired_feature(k);
    out[index_of(k)] = ranges.of(f).contains(value_of(features, f)) ? 1 : 0;
  }
  return out;
}

std::vector<CorrectionScore> score_corrections(const FeatureVector& features, const ContributionDictionary& dict) {
  const auto labels = omega(features, dict.ranges);
  std::vector<CorrectionScore> scores;
  scores.reserve(4);
  for (CorrectionKind k : kRankOrder) {
    CorrectionScore s;
    s.kind = k;
    s.omega = labels[index_of(k)];
    s.gain = s.omega * dict.xi_of(k);
    s.benefit = s.gain / dict.time_of(k);
    scores.push_back(s);
  }
  return scores;
}

CascadePlan select_cascade(const FeatureVector& features, const ContributionDictionary& dict,
                           const SelectionPolicy& policy, const CorrectionParams& params) {
  policy.validate();
  CascadePlan plan;
  plan.policy_id = policy.id();
  plan.scores = score_corrections(features, dict);
  const auto& scores = plan.scores;

  PerCorrection<bool> chosen{};
  if (policy.kind == SelectionPolicy::Kind::StrictImproving) {
    // With contrast inapplicable its B is 0, so the benchmark starts at 0.
    const CorrectionScore& contrast = scores[index_of(CorrectionKind::Contrast)];
    double benchmark = contrast.benefit;
    chosen[index_of(CorrectionKind::Contrast)] = contrast.omega == 1;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i].omega == 1 && scores[i].benefit > benchmark) {
        chosen[i] = true;
        benchmark = scores[i].benefit;
      }
    }
  } else {
    double best = 0.0;
    for (const auto& s : scores) {
      if (s.omega == 1) best = std::max(best, s.benefit);
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
      chosen[i] = scores[i].omega == 1 && scores[i].benefit > 0.0 && scores[i].benefit >= policy.tau * best;
    }
  }
  for (CorrectionKind k : kRankOrder) {
    if (chosen[index_of(k)]) plan.steps.push_back({k, params});
  }
  return plan;
}

}  // namespace utilenhance
