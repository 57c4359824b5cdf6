#include "utilenhance/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "utilenhance/error.hpp"

namespace utilenhance {

std::string_view to_string(Feature feature) {
  switch (feature) {
    case Feature::Gradient: return "gradient";
    case Feature::Saturation: return "saturation";
    case Feature::Entropy: return "entropy";
    case Feature::Brightness: return "brightness";
  }
  return "unknown";
}

double value_of(const FeatureVector& f, Feature feature) {
  switch (feature) {
    case Feature::Gradient: return f.gradient;
    case Feature::Saturation: return f.saturation;
    case Feature::Entropy: return f.entropy;
    case Feature::Brightness: return f.brightness;
  }
  return 0.0;
}

const Interval& ApplicabilityRanges::of(Feature feature) const {
  switch (feature) {
    case Feature::Gradient: return gradient;
    case Feature::Saturation: return saturation;
    case Feature::Entropy: return entropy;
    case Feature::Brightness: return brightness;
  }
  return gradient;
}

Interval& ApplicabilityRanges::of(Feature feature) {
  return const_cast<Interval&>(std::as_const(*this).of(feature));
}

void ApplicabilityRanges::validate() const {
  for (Feature f : kAllFeatures) {
    const Interval& r = of(f);
    if (!(0.0 <= r.lo && r.lo <= r.hi && r.hi <= 1.0)) {
      throw Error(ErrorCode::InvalidParam, "range for " + std::string(to_string(f)) + " must satisfy 0<=lo<=hi<=1");
    }
  }
}

double brightness(const RasterImage& img) {
  std::uint64_t r = 0, g = 0, b = 0;
  for (const Rgb& p : img.pixels()) {
    r += p.r;
    g += p.g;
    b += p.b;
  }
  // Integer weights keep the sum exact, so a constant image maps to its luma.
  const std::uint64_t weighted = 299 * r + 587 * g + 114 * b;
  const double mean = static_cast<double>(weighted) / 1000.0 / static_cast<double>(img.size());
  return std::clamp(mean / 255.0, 0.0, 1.0);
}

double saturation(const RasterImage& img) {
  // (max - min) / max only depends on the (max, min) pair, so accumulate
  // integer counts and sum each ratio once.
  std::vector<std::uint64_t> counts(256 * 256, 0);
  for (const Rgb& p : img.pixels()) {
    const std::uint8_t hi = std::max({p.r, p.g, p.b});
    const std::uint8_t lo = std::min({p.r, p.g, p.b});
    ++counts[hi * 256 + lo];
  }
  double total = 0.0;
  for (std::size_t hi = 1; hi < 256; ++hi) {
    for (std::size_t lo = 0; lo < hi; ++lo) {
      const auto c = counts[hi * 256 + lo];
      if (c != 0) total += static_cast<double>(c) * (static_cast<double>(hi - lo) / static_cast<double>(hi));
    }
  }
  return total / static_cast<double>(img.size());
}

double entropy(const RasterImage& img) {
  std::array<std::uint64_t, 256> hist{};
  for (const Rgb& p : img.pixels()) ++hist[luma(p)];
  const double n = static_cast<double>(img.size());
  double bits = 0.0;
  for (std::uint64_t c : hist) {
    if (c == 0) continue;
    const double prob = static_cast<double>(c) / n;
    bits -= prob * std::log2(prob);
  }
  return std::clamp(bits / 8.0, 0.0, 1.0);
}

double gradient(const RasterImage& img, GradientMode mode) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  if (w < 3 || h < 3) throw Error(ErrorCode::ImageTooSmall, "gradient needs at least 3x3 pixels");
  const GrayImage gray = to_luma(img);

  // Integer Sobel responses on 8-bit luma; dividing by 255 afterwards gives
  // the response on [0,1]-normalized luma.
  double total = 0.0;
  for (std::size_t y = 1; y + 1 < h; ++y) {
    for (std::size_t x = 1; x + 1 < w; ++x) {
      const int a = gray.at(x - 1, y - 1), b = gray.at(x, y - 1), c = gray.at(x + 1, y - 1);
      const int d = gray.at(x - 1, y), f = gray.at(x + 1, y);
      const int g = gray.at(x - 1, y + 1), k = gray.at(x, y + 1), l = gray.at(x + 1, y + 1);
      const int gx = (c + 2 * f + l) - (a + 2 * d + g);
      const int gy = (g + 2 * k + l) - (a + 2 * b + c);
      if (mode == GradientMode::SquareOfSum) {
        const double s = std::abs(gx) + std::abs(gy);
        total += s * s;
      } else {
        total += static_cast<double>(gx) * gx + static_cast<double>(gy) * gy;
      }
    }
  }
  const double interior = static_cast<double>((w - 2) * (h - 2));
  const double norm = mode == GradientMode::SquareOfSum ? 64.0 : 32.0;
  return std::clamp(total / interior / (255.0 * 255.0) / norm, 0.0, 1.0);
}

FeatureVector extract_features(const RasterImage& img, GradientMode mode) {
  return {gradient(img, mode), saturation(img), entropy(img), brightness(img)};
}

}  // namespace utilenhance
