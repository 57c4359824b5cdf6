#pragma once
// Test-only fixtures and independent oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "utilenhance/calibration.hpp"
#include "utilenhance/imgio.hpp"
#include "utilenhance/utility.hpp"

namespace testing_support {

using utilenhance::RasterImage;
using utilenhance::Rgb;

inline RasterImage random_image(std::size_t w, std::size_t h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  RasterImage img(w, h);
  for (Rgb& p : img.pixels()) {
    p = {static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng)), static_cast<std::uint8_t>(d(rng))};
  }
  return img;
}

inline RasterImage uniform(std::size_t w, std::size_t h, Rgb c) { return RasterImage(w, h, c); }

inline RasterImage gray_ramp(std::size_t w, std::size_t h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  RasterImage img(w, h);
  for (Rgb& p : img.pixels()) {
    const auto v = static_cast<std::uint8_t>(d(rng));
    p = {v, v, v};
  }
  return img;
}

/// Low-contrast fixture: values squeezed into [lo, hi] with a smooth pattern.
inline RasterImage low_contrast(std::size_t w, std::size_t h, int lo, int hi, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(-3, 3);
  RasterImage img(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double t = 0.5 + 0.5 * std::sin(0.15 * x) * std::cos(0.11 * y);
      const int v = std::clamp(static_cast<int>(lo + t * (hi - lo)) + noise(rng), lo, hi);
      img.at(x, y) = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(std::min(255, v + 20)),
                      static_cast<std::uint8_t>(std::min(255, v + 35))};
    }
  }
  return img;
}

/// Luma as the exact rational weighted sum, rounded half to even.
inline int oracle_luma(Rgb p) {
  const long thousandths = 299L * p.r + 587L * p.g + 114L * p.b;
  const auto [q, r] = std::ldiv(thousandths, 1000L);
  return static_cast<int>(r * 2 > 1000 || (r * 2 == 1000 && q % 2 == 1) ? q + 1 : q);
}

/// Brute-force 3x3 Sobel correlation over interior pixels on luma/255.
inline double oracle_tenengrad(const RasterImage& img, bool square_of_sum) {
  static constexpr int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t y = 1; y + 1 < img.height(); ++y) {
    for (std::size_t x = 1; x + 1 < img.width(); ++x) {
      double gx = 0.0, gy = 0.0;
      for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 3; ++i) {
          const double v = oracle_luma(img.at(x + i - 1, y + j - 1)) / 255.0;
          gx += kx[j][i] * v;
          gy += ky[j][i] * v;
        }
      }
      total += square_of_sum ? (std::abs(gx) + std::abs(gy)) * (std::abs(gx) + std::abs(gy)) : gx * gx + gy * gy;
      ++n;
    }
  }
  return std::clamp(total / n / (square_of_sum ? 64.0 : 32.0), 0.0, 1.0);
}

/// Global histogram equalization of luma (round(255 * cdf)), with the RGB
/// triple rescaled by the exact ratio new/old luma as the contrast correction does.
inline RasterImage oracle_global_equalization(const RasterImage& img) {
  std::array<double, 256> hist{};
  for (const Rgb& p : img.pixels()) hist[oracle_luma(p)] += 1.0;
  std::array<int, 256> map{};
  double cum = 0.0;
  int occupied = 0;
  for (int v = 0; v < 256; ++v) {
    occupied += hist[v] > 0 ? 1 : 0;
    cum += hist[v];
    map[v] = static_cast<int>(std::nearbyint(255.0 * cum / img.size()));
  }
  if (occupied <= 1) {
    for (int v = 0; v < 256; ++v) map[v] = v;
  }
  RasterImage out = img;
  for (Rgb& p : out.pixels()) {
    const int old = oracle_luma(p);
    const int fresh = map[old];
    auto scale = [&](std::uint8_t c) {
      const auto [q, r] = std::ldiv(long(c) * fresh, long(old));
      const long rounded = 2 * r > old || (2 * r == old && q % 2 == 1) ? q + 1 : q;
      return static_cast<std::uint8_t>(std::min(rounded, 255L));
    };
    if (old == 0) {
      p = {static_cast<std::uint8_t>(fresh), static_cast<std::uint8_t>(fresh), static_cast<std::uint8_t>(fresh)};
    } else {
      p = {scale(p.r), scale(p.g), scale(p.b)};
    }
  }
  return out;
}

/// Two-pass Pearson correlation, evaluated term by term.
inline double oracle_plcc(const std::vector<double>& s, const std::vector<double>& p) {
  const double n = static_cast<double>(s.size());
  double ms = 0.0, mp = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ms += s[i];
    mp += p[i];
  }
  ms /= n;
  mp /= n;
  double num = 0.0, ss = 0.0, pp = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    num += (s[i] - ms) * (p[i] - mp);
    ss += (s[i] - ms) * (s[i] - ms);
    pp += (p[i] - mp) * (p[i] - mp);
  }
  return num / std::sqrt(ss * pp);
}

/// Ranked hits of one class -> AP by midpoint Riemann sum of the interpolated
/// precision curve P(r) = max precision among points with recall >= r. The
/// grid step divides 1/gt_count for every gt_count <= 5, so recall jumps sit
/// on cell boundaries and the sum is exact up to rounding.
inline double oracle_ap_riemann(const std::vector<bool>& ranked_tp, std::size_t gt_count) {
  std::vector<std::pair<double, double>> pts;  // (recall, precision)
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked_tp.size(); ++i) {
    if (ranked_tp[i]) ++tp;
    pts.emplace_back(double(tp) / gt_count, double(tp) / (i + 1));
  }
  constexpr std::size_t cells = 60 * 2000;
  double area = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    const double r = (c + 0.5) / cells;
    double best = 0.0;
    for (const auto& [rec, prec] : pts) {
      if (rec >= r) best = std::max(best, prec);
    }
    area += best / cells;
  }
  return area;
}

/// Samples whose utility q has population correlation `rho` with the
/// gradient feature; the other features are independent uniform noise.
inline std::vector<utilenhance::CalibrationSample> planted_samples(std::size_t n, double rho, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sd_uniform = std::sqrt(1.0 / 12.0);
  std::vector<utilenhance::CalibrationSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    utilenhance::CalibrationSample s;
    s.image_id = "img" + std::to_string(i);
    s.features = {u(rng), u(rng), u(rng), u(rng)};
    const double z = (s.features.gradient - 0.5) / sd_uniform;
    const double standardized = rho * z + std::sqrt(1.0 - rho * rho) * noise(rng);
    s.utility.q = 0.2 + 0.3 * standardized;  // positive affine map keeps the correlation
    out.push_back(s);
  }
  return out;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("utilenhance_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  utilenhance::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text(const std::filesystem::path& path) {
  const auto bytes = utilenhance::read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace testing_support
