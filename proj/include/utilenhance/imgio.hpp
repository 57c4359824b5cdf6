#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace utilenhance {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major. Dimensions are always >= 1.
class RasterImage {
 public:
  RasterImage(std::size_t width, std::size_t height, Rgb fill = {});
  RasterImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  const Rgb& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  Rgb& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const Rgb> pixels() const noexcept { return pixels_; }
  std::span<Rgb> pixels() noexcept { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Rgb> pixels_;
};

/// 8-bit single-channel raster with the same shape rules as RasterImage.
class GrayImage {
 public:
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

enum class ImageFormat { Png, Ppm };

// Round half to even, then clamp into the 8-bit range. Every module that
// converts a real value back to a sample goes through here.
inline std::uint8_t to_sample(double v) {
  if (!(v > 0.0)) return 0;  // also catches NaN
  if (v >= 255.0) return 255;
  // Adding 2^52 leaves no fraction bits, so the FPU rounds half to even
  // (same as nearbyint in the default mode, without the libm call).
  constexpr double kShift = 4503599627370496.0;
  return static_cast<std::uint8_t>((v + kShift) - kShift);
}

inline double normalized(std::uint8_t v) { return static_cast<double>(v) / 255.0; }

RasterImage decode(std::span<const std::uint8_t> bytes, ImageFormat format);
std::vector<std::uint8_t> encode(const RasterImage& img, ImageFormat format);

/// Format inferred from magic bytes.
RasterImage read_image(const std::filesystem::path& path);
void write_image(const RasterImage& img, const std::filesystem::path& path, ImageFormat format);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// round(0.299R + 0.587G + 0.114B), half to even.
std::uint8_t luma(Rgb p);
GrayImage to_luma(const RasterImage& img);

}  // namespace utilenhance
