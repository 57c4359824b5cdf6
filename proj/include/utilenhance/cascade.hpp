#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace utilenhance {

/// The four low-level corrections. Enumerator order is the contribution
/// rank order used to sequence every cascade.
enum class CorrectionKind { Contrast = 0, Color = 1, Clarity = 2, Brightness = 3 };

inline constexpr std::array<CorrectionKind, 4> kRankOrder = {
    CorrectionKind::Contrast, CorrectionKind::Color, CorrectionKind::Clarity, CorrectionKind::Brightness};

inline constexpr std::size_t index_of(CorrectionKind kind) { return static_cast<std::size_t>(kind); }

/// Lower-case key used in JSON and CLI output ("contrast", "color", ...).
std::string_view to_string(CorrectionKind kind);
std::optional<CorrectionKind> correction_from_string(std::string_view name);

/// Per-correction lookup table with one slot per CorrectionKind.
template <typename T>
using PerCorrection = std::array<T, 4>;

struct CorrectionParams {
  double gamma = 0.5;
  int median_window = 3;
  double clahe_clip = 2.0;
  int clahe_tiles = 8;
  double wb_max_gain = 3.0;

  /// Throws InvalidParam on the first violated constraint.
  void validate() const;

  friend bool operator==(const CorrectionParams&, const CorrectionParams&) = default;
};

struct CorrectionScore {
  CorrectionKind kind{};
  int omega = 0;         // applicability label, 0 or 1
  double gain = 0.0;     // omega * xi
  double benefit = 0.0;  // gain / time cost
};

struct CascadeStep {
  CorrectionKind kind{};
  CorrectionParams params{};

  friend bool operator==(const CascadeStep&, const CascadeStep&) = default;
};

struct CascadePlan {
  std::vector<CascadeStep> steps;
  std::string policy_id;
  std::vector<CorrectionScore> scores;

  std::vector<CorrectionKind> kinds() const;
};

}  // namespace utilenhance
