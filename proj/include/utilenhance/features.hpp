#pragma once

#include <array>
#include <string_view>

#include "utilenhance/cascade.hpp"
#include "utilenhance/imgio.hpp"

namespace utilenhance {

/// The four normalized image features, each in [0, 1].
struct FeatureVector {
  double gradient = 0.0;
  double saturation = 0.0;
  double entropy = 0.0;
  double brightness = 0.0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

enum class Feature { Gradient = 0, Saturation = 1, Entropy = 2, Brightness = 3 };

inline constexpr std::array<Feature, 4> kAllFeatures = {Feature::Gradient, Feature::Saturation, Feature::Entropy,
                                                        Feature::Brightness};

std::string_view to_string(Feature feature);

double value_of(const FeatureVector& features, Feature feature);

/// Feature that each correction acts on: contrast->gradient, color->saturation,
/// clarity->entropy, brightness->brightness.
constexpr Feature paired_feature(CorrectionKind kind) {
  switch (kind) {
    case CorrectionKind::Contrast: return Feature::Gradient;
    case CorrectionKind::Color: return Feature::Saturation;
    case CorrectionKind::Clarity: return Feature::Entropy;
    case CorrectionKind::Brightness: return Feature::Brightness;
  }
  return Feature::Gradient;
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double v) const { return lo <= v && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Closed per-feature intervals in which a correction is considered applicable.
struct ApplicabilityRanges {
  Interval gradient{0.0, 0.9};
  Interval saturation{0.3, 0.5};
  Interval entropy{0.0, 0.9};
  Interval brightness{0.4, 0.6};

  const Interval& of(Feature feature) const;
  Interval& of(Feature feature);
  /// Throws InvalidParam unless 0 <= lo <= hi <= 1 everywhere.
  void validate() const;

  friend bool operator==(const ApplicabilityRanges&, const ApplicabilityRanges&) = default;
};

enum class GradientMode {
  SquareOfSum,   // (|gx| + |gy|)^2 / 64
  SumOfSquares,  // (gx^2 + gy^2) / 32
};

double brightness(const RasterImage& img);
double saturation(const RasterImage& img);
double entropy(const RasterImage& img);
/// Tenengrad on luma/255 over interior pixels. Throws ImageTooSmall below 3x3.
double gradient(const RasterImage& img, GradientMode mode = GradientMode::SquareOfSum);

FeatureVector extract_features(const RasterImage& img, GradientMode mode = GradientMode::SquareOfSum);

}  // namespace utilenhance
