#include "utilenhance/cascade.hpp"

#include "utilenhance/error.hpp"

namespace utilenhance {

std::string_view to_string(CorrectionKind kind) {
  switch (kind) {
    case CorrectionKind::Contrast: return "contrast";
    case CorrectionKind::Color: return "color";
    case CorrectionKind::Clarity: return "clarity";
    case CorrectionKind::Brightness: return "brightness";
  }
  return "unknown";
}

std::optional<CorrectionKind> correction_from_string(std::string_view name) {
  for (CorrectionKind kind : kRankOrder) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void CorrectionParams::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidParam, "gamma must be > 0");
  if (median_window < 3 || median_window % 2 == 0) {
    throw Error(ErrorCode::InvalidParam, "median window must be odd and >= 3");
  }
  if (!(clahe_clip >= 1.0)) throw Error(ErrorCode::InvalidParam, "clahe clip must be >= 1");
  if (clahe_tiles < 1) throw Error(ErrorCode::InvalidParam, "clahe tiles must be >= 1");
  if (!(wb_max_gain >= 1.0)) throw Error(ErrorCode::InvalidParam, "white-balance gain cap must be >= 1");
}

std::vector<CorrectionKind> CascadePlan::kinds() const {
  std::vector<CorrectionKind> out;
  out.reserve(steps.size());
  for (const auto& step : steps) out.push_back(step.kind);
  return out;
}

}  // namespace utilenhance
