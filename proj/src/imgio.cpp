#include "utilenhance/imgio.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "utilenhance/error.hpp"

namespace utilenhance {

namespace {

void check_shape(std::size_t width, std::size_t height, std::size_t count) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::InvalidParam, "image dimensions must be >= 1");
  }
  if (count != width * height) {
    throw Error(ErrorCode::InvalidParam, "pixel count does not match width*height");
  }
}

// Netpbm header token reader: skips whitespace and '#' comments.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  unsigned long next_number() {
    skip_blank();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedFile, "PPM header: expected a number");
    }
    unsigned long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000UL) throw Error(ErrorCode::MalformedFile, "PPM header: value too large");
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::MalformedFile, "PPM header: missing separator before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_blank() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;  // past the magic
};

RasterImage decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw Error(ErrorCode::MalformedFile, "not a binary PPM (P6)");
  }
  PnmHeader header(bytes);
  const auto width = header.next_number();
  const auto height = header.next_number();
  const auto maxval = header.next_number();
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedFile, "PPM has zero dimension");
  if (maxval != 255) {
    throw Error(ErrorCode::UnsupportedDepth, "PPM maxval " + std::to_string(maxval) + " (only 255 supported)");
  }
  const std::size_t offset = header.raster_offset();
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - offset < count * 3) throw Error(ErrorCode::MalformedFile, "PPM raster truncated");

  std::vector<Rgb> pixels(count);
  const auto* src = bytes.data() + offset;
  for (std::size_t i = 0; i < count; ++i) {
    pixels[i] = {src[3 * i], src[3 * i + 1], src[3 * i + 2]};
  }
  return RasterImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_ppm(const RasterImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size() * 3);
  for (const Rgb& p : img.pixels()) {
    out.push_back(p.r);
    out.push_back(p.g);
    out.push_back(p.b);
  }
  return out;
}

struct PngImageGuard {
  png_image image{};
  PngImageGuard() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
};

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::MalformedFile, "bad PNG signature");
  }
  PngImageGuard guard;
  png_image& image = guard.image;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::MalformedFile, std::string("PNG header: ") + image.message);
  }
  // The simplified API flags 16-bit sources as linear.
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    throw Error(ErrorCode::UnsupportedDepth, "16-bit PNG not supported");
  }
  image.format = PNG_FORMAT_RGB;
  const std::size_t width = image.width;
  const std::size_t height = image.height;
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedFile, "PNG has zero dimension");
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorCode::MalformedFile, std::string("PNG data: ") + image.message);
  }
  std::vector<Rgb> pixels(width * height);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  }
  return RasterImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  PngImageGuard guard;
  png_image& image = guard.image;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;

  const auto* raw = reinterpret_cast<const std::uint8_t*>(img.pixels().data());
  static_assert(sizeof(Rgb) == 3);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw, 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("PNG encode: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw, 0, nullptr)) {
    throw Error(ErrorCode::IoError, std::string("PNG encode: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace

RasterImage::RasterImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
  check_shape(width, height, pixels_.size());
}

RasterImage::RasterImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_shape(width, height, pixels_.size());
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
  check_shape(width, height, pixels_.size());
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_shape(width, height, pixels_.size());
}

RasterImage decode(std::span<const std::uint8_t> bytes, ImageFormat format) {
  return format == ImageFormat::Png ? decode_png(bytes) : decode_ppm(bytes);
}

std::vector<std::uint8_t> encode(const RasterImage& img, ImageFormat format) {
  return format == ImageFormat::Png ? encode_png(img) : encode_ppm(img);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open for writing " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

RasterImage read_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode(bytes, ImageFormat::Ppm);
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode(bytes, ImageFormat::Png);
  throw Error(ErrorCode::MalformedFile, "unrecognized image format: " + path.string());
}

void write_image(const RasterImage& img, const std::filesystem::path& path, ImageFormat format) {
  write_file(path, encode(img, format));
}

std::uint8_t luma(Rgb p) {
  // Exact: (299R + 587G + 114B) / 1000, rounded half to even.
  const std::uint32_t t = 299u * p.r + 587u * p.g + 114u * p.b;
  std::uint32_t q = t / 1000;
  const std::uint32_t rem = t - q * 1000;
  q += static_cast<std::uint32_t>(rem > 500) | (static_cast<std::uint32_t>(rem == 500) & q & 1);
  return static_cast<std::uint8_t>(q);
}

GrayImage to_luma(const RasterImage& img) {
  std::vector<std::uint8_t> out(img.size());
  std::ranges::transform(img.pixels(), out.begin(), [](Rgb p) { return luma(p); });
  return GrayImage(img.width(), img.height(), std::move(out));
}

}  // namespace utilenhance
