#include "utilenhance/corrections.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "utilenhance/error.hpp"

namespace utilenhance {

namespace {

using Lut = std::array<std::uint8_t, 256>;

RasterImage apply_luts(const RasterImage& img, const Lut& r, const Lut& g, const Lut& b) {
  RasterImage out = img;
  for (Rgb& p : out.pixels()) {
    p = {r[p.r], g[p.g], b[p.b]};
  }
  return out;
}

// Sorting network for the median of nine values.
inline void sort2(std::uint8_t& a, std::uint8_t& b) {
  const std::uint8_t lo = std::min(a, b);
  b = std::max(a, b);
  a = lo;
}

inline std::uint8_t median9(std::array<std::uint8_t, 9> p) {
  sort2(p[1], p[2]); sort2(p[4], p[5]); sort2(p[7], p[8]);
  sort2(p[0], p[1]); sort2(p[3], p[4]); sort2(p[6], p[7]);
  sort2(p[1], p[2]); sort2(p[4], p[5]); sort2(p[7], p[8]);
  sort2(p[0], p[3]); sort2(p[5], p[8]); sort2(p[4], p[7]);
  sort2(p[3], p[6]); sort2(p[1], p[4]); sort2(p[2], p[5]);
  sort2(p[4], p[7]); sort2(p[4], p[2]); sort2(p[6], p[4]);
  sort2(p[4], p[2]);
  return p[4];
}

// One channel padded by `radius` on every side with edge replication.
struct PaddedPlane {
  std::size_t stride;
  std::vector<std::uint8_t> data;
};

PaddedPlane pad_channel(const RasterImage& img, int channel, std::size_t radius) {
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  PaddedPlane plane{w + 2 * radius, {}};
  plane.data.resize(plane.stride * (h + 2 * radius));
  for (std::size_t py = 0; py < h + 2 * radius; ++py) {
    const std::size_t y = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(py) - radius, 0, h - 1);
    for (std::size_t px = 0; px < w + 2 * radius; ++px) {
      const std::size_t x = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(px) - radius, 0, w - 1);
      const Rgb& p = img.at(x, y);
      plane.data[py * plane.stride + px] = channel == 0 ? p.r : channel == 1 ? p.g : p.b;
    }
  }
  return plane;
}

// Tile index pair and blend weight num/den along one axis. Tile centres lie
// on half-pixel positions, so weights are exact in half-pixel units.
struct AxisBlend {
  std::uint32_t lo;
  std::uint32_t hi;
  std::int64_t num;
  std::int64_t den;
};

// num/den for non-negative num, rounded half to even.
std::uint8_t round_ratio(std::int64_t num, std::int64_t den) {
  // The double quotient is within one of the true floor; fix it up exactly
  // (much cheaper than a 64-bit integer divide).
  auto q = static_cast<std::int64_t>(static_cast<double>(num) / static_cast<double>(den));
  std::int64_t rem = num - q * den;
  const std::int64_t below = rem < 0;
  const std::int64_t above = rem >= den;
  q += above - below;
  rem += (below - above) * den;
  const std::int64_t twice_rem = 2 * rem;
  q += (twice_rem > den) | ((twice_rem == den) & q & 1);
  return static_cast<std::uint8_t>(std::min<std::int64_t>(q, 255));
}

// n / d rounded half to even, for integers 0 <= n < 2^24 and 1 <= d held in
// floats. Products and differences of such values are exact in float, so only
// the quotient needs fixing up. Branch-free so callers vectorize.
inline float round_div(float n, float d) {
  float q = static_cast<float>(static_cast<std::int32_t>(n / d));
  float rem = n - q * d;
  const float up = rem >= d ? 1.0f : 0.0f;
  const float down = rem < 0.0f ? 1.0f : 0.0f;
  q += up - down;
  rem += (down - up) * d;
  const float odd = q - 2.0f * static_cast<float>(static_cast<std::int32_t>(q * 0.5f));
  const float twice = 2.0f * rem;
  return q + (twice > d ? 1.0f : (twice == d ? odd : 0.0f));
}

// out[i] = c[i] * fresh[i] / old[i] rounded half to even and clamped; a zero
// old luma yields fresh.
void rescale_row(const std::uint8_t* c, const std::uint8_t* old, const std::uint8_t* fresh, std::uint8_t* out,
                 std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const float f = fresh[i];
    const float o = std::max(static_cast<float>(old[i]), 1.0f);
    const float q = std::min(round_div(static_cast<float>(c[i]) * f, o), 255.0f);
    const float result = old[i] == 0 ? f : q;
    out[i] = static_cast<std::uint8_t>(static_cast<std::int32_t>(result));
  }
}

// Bilinear blend of the four gathered tile mappings for one row, in float.
// Only valid while 255 * den_x * den_y < 2^24.
void blend_row(const std::uint8_t* tl, const std::uint8_t* tr, const std::uint8_t* bl, const std::uint8_t* br,
               const float* wl, const float* wr, const float* den_x, float wt, float wb, float den_y,
               std::uint8_t* out, std::size_t count) {
  for (std::size_t x = 0; x < count; ++x) {
    const float upper = wl[x] * static_cast<float>(tl[x]) + wr[x] * static_cast<float>(tr[x]);
    const float lower = wl[x] * static_cast<float>(bl[x]) + wr[x] * static_cast<float>(br[x]);
    const float q = round_div(wt * upper + wb * lower, den_x[x] * den_y);
    out[x] = static_cast<std::uint8_t>(static_cast<std::int32_t>(std::min(q, 255.0f)));
  }
}

std::vector<AxisBlend> axis_blend(std::size_t length, std::size_t tiles) {
  std::vector<std::int64_t> centres2(tiles);  // twice the centre coordinate
  for (std::size_t i = 0; i < tiles; ++i) {
    const std::size_t begin = i * length / tiles;
    const std::size_t end = (i + 1) * length / tiles;
    centres2[i] = static_cast<std::int64_t>(begin + end) - 1;
  }
  std::vector<AxisBlend> out(length);
  std::size_t t = 0;
  for (std::size_t x = 0; x < length; ++x) {
    const auto pos2 = 2 * static_cast<std::int64_t>(x);
    if (pos2 <= centres2.front()) {
      out[x] = {0, 0, 0, 1};
    } else if (pos2 >= centres2.back()) {
      const auto last = static_cast<std::uint32_t>(tiles - 1);
      out[x] = {last, last, 0, 1};
    } else {
      while (centres2[t + 1] <= pos2) ++t;
      out[x] = {static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t + 1), pos2 - centres2[t],
                centres2[t + 1] - centres2[t]};
    }
  }
  return out;
}

Lut tile_mapping(const std::array<std::uint32_t, 256>& hist, std::size_t count, double clip) {
  Lut lut{};
  const auto occupied = std::ranges::count_if(hist, [](std::uint32_t c) { return c != 0; });
  if (occupied <= 1) {
    std::iota(lut.begin(), lut.end(), std::uint8_t{0});
    return lut;
  }
  const double limit = clip * static_cast<double>(count) / 256.0;
  double excess = 0.0;
  for (std::uint32_t c : hist) excess += std::max(0.0, c - limit);

  if (excess == 0.0) {
    // No bin reaches the limit: integer cdf, exact.
    std::uint64_t cum = 0;
    for (std::size_t v = 0; v < 256; ++v) {
      cum += hist[v];
      lut[v] = to_sample(255.0 * static_cast<double>(cum) / static_cast<double>(count));
    }
    return lut;
  }
  const double spread = excess / 256.0;
  std::array<double, 256> clipped{};
  double total = 0.0;
  for (std::size_t v = 0; v < 256; ++v) {
    clipped[v] = std::min<double>(hist[v], limit) + spread;
    total += clipped[v];
  }
  double cum = 0.0;
  for (std::size_t v = 0; v < 256; ++v) {
    cum += clipped[v];
    lut[v] = to_sample(255.0 * cum / total);
  }
  return lut;
}

}  // namespace

RasterImage gamma_transform(const RasterImage& img, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidParam, "gamma must be > 0");
  Lut lut{};
  for (std::size_t v = 0; v < 256; ++v) {
    lut[v] = to_sample(255.0 * std::pow(static_cast<double>(v) / 255.0, gamma));
  }
  return apply_luts(img, lut, lut, lut);
}

RasterImage white_balance(const RasterImage& img, double max_gain) {
  if (!(max_gain >= 1.0)) throw Error(ErrorCode::InvalidParam, "white-balance gain cap must be >= 1");
  std::array<std::uint64_t, 3> sums{};
  for (const Rgb& p : img.pixels()) {
    sums[0] += p.r;
    sums[1] += p.g;
    sums[2] += p.b;
  }
  const double n = static_cast<double>(img.size());
  std::array<double, 3> means{};
  for (std::size_t c = 0; c < 3; ++c) means[c] = static_cast<double>(sums[c]) / n;
  const double mean = (means[0] + means[1] + means[2]) / 3.0;

  std::array<Lut, 3> luts{};
  for (std::size_t c = 0; c < 3; ++c) {
    // Equal channel means give a gain of exactly one.
    double gain = max_gain;
    if (sums[c] == sums[0] && sums[c] == sums[1] && sums[c] == sums[2]) {
      gain = 1.0;
    } else if (means[c] > 0.0) {
      gain = std::min(mean / means[c], max_gain);
    }
    for (std::size_t v = 0; v < 256; ++v) luts[c][v] = to_sample(static_cast<double>(v) * gain);
  }
  return apply_luts(img, luts[0], luts[1], luts[2]);
}

RasterImage median_filter(const RasterImage& img, int window) {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorCode::InvalidParam, "median window must be odd and >= 3");
  }
  const std::size_t radius = static_cast<std::size_t>(window / 2);
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  RasterImage out(w, h);
  std::vector<std::uint8_t> buffer(static_cast<std::size_t>(window) * window);
  const std::size_t mid = buffer.size() / 2;

  std::vector<std::uint8_t> row_out(w);
  for (int channel = 0; channel < 3; ++channel) {
    const PaddedPlane plane = pad_channel(img, channel, radius);
    for (std::size_t y = 0; y < h; ++y) {
      if (window == 3) {
        // Planar rows let the min/max network vectorize.
        const std::uint8_t* r0 = &plane.data[y * plane.stride];
        const std::uint8_t* r1 = r0 + plane.stride;
        const std::uint8_t* r2 = r1 + plane.stride;
        for (std::size_t x = 0; x < w; ++x) {
          row_out[x] = median9({r0[x], r0[x + 1], r0[x + 2], r1[x], r1[x + 1], r1[x + 2], r2[x], r2[x + 1], r2[x + 2]});
        }
      } else {
        for (std::size_t x = 0; x < w; ++x) {
          std::size_t k = 0;
          for (std::size_t dy = 0; dy < 2 * radius + 1; ++dy) {
            const std::uint8_t* row = &plane.data[(y + dy) * plane.stride + x];
            for (std::size_t dx = 0; dx < 2 * radius + 1; ++dx) buffer[k++] = row[dx];
          }
          std::nth_element(buffer.begin(), buffer.begin() + mid, buffer.end());
          row_out[x] = buffer[mid];
        }
      }
      for (std::size_t x = 0; x < w; ++x) {
        Rgb& p = out.at(x, y);
        (channel == 0 ? p.r : channel == 1 ? p.g : p.b) = row_out[x];
      }
    }
  }
  return out;
}

RasterImage clahe(const RasterImage& img, double clip, int tiles) {
  if (tiles < 1) throw Error(ErrorCode::InvalidParam, "clahe tiles must be >= 1");
  if (!(clip >= 1.0)) throw Error(ErrorCode::InvalidParam, "clahe clip must be >= 1");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t tiles_x = std::min<std::size_t>(tiles, w);
  const std::size_t tiles_y = std::min<std::size_t>(tiles, h);
  const GrayImage gray = to_luma(img);

  std::vector<Lut> luts(tiles_x * tiles_y);
  for (std::size_t ty = 0; ty < tiles_y; ++ty) {
    const std::size_t y0 = ty * h / tiles_y;
    const std::size_t y1 = (ty + 1) * h / tiles_y;
    for (std::size_t tx = 0; tx < tiles_x; ++tx) {
      const std::size_t x0 = tx * w / tiles_x;
      const std::size_t x1 = (tx + 1) * w / tiles_x;
      std::array<std::uint32_t, 256> hist{};
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) ++hist[gray.at(x, y)];
      }
      luts[ty * tiles_x + tx] = tile_mapping(hist, (y1 - y0) * (x1 - x0), clip);
    }
  }

  const auto col_blend = axis_blend(w, tiles_x);
  const auto row_blend = axis_blend(h, tiles_y);
  RasterImage out(w, h);
  static_assert(sizeof(Rgb) == 3);

  std::int64_t max_den_x = 1, max_den_y = 1;
  for (const AxisBlend& cb : col_blend) max_den_x = std::max(max_den_x, cb.den);
  for (const AxisBlend& rb : row_blend) max_den_y = std::max(max_den_y, rb.den);
  const bool float_blend = 255 * max_den_x * max_den_y < (std::int64_t{1} << 24);
  std::vector<float> wl(w), wr(w), den_x(w);
  for (std::size_t x = 0; x < w; ++x) {
    wl[x] = static_cast<float>(col_blend[x].den - col_blend[x].num);
    wr[x] = static_cast<float>(col_blend[x].num);
    den_x[x] = static_cast<float>(col_blend[x].den);
  }

  std::vector<std::uint8_t> tl(w), tr(w), bl(w), br(w), fresh(w), old3(3 * w), fresh3(3 * w);
  for (std::size_t y = 0; y < h; ++y) {
    const AxisBlend& rb = row_blend[y];
    const Lut* top = &luts[rb.lo * tiles_x];
    const Lut* bottom = &luts[rb.hi * tiles_x];
    const std::uint8_t* row = gray.pixels().data() + y * w;
    if (float_blend) {
      for (std::size_t x = 0; x < w; ++x) {
        const AxisBlend& cb = col_blend[x];
        tl[x] = top[cb.lo][row[x]];
        tr[x] = top[cb.hi][row[x]];
        bl[x] = bottom[cb.lo][row[x]];
        br[x] = bottom[cb.hi][row[x]];
      }
      blend_row(tl.data(), tr.data(), bl.data(), br.data(), wl.data(), wr.data(), den_x.data(),
                static_cast<float>(rb.den - rb.num), static_cast<float>(rb.num), static_cast<float>(rb.den),
                fresh.data(), w);
    } else {
      for (std::size_t x = 0; x < w; ++x) {
        const AxisBlend& cb = col_blend[x];
        const std::uint8_t old = row[x];
        const std::int64_t upper = (cb.den - cb.num) * top[cb.lo][old] + cb.num * top[cb.hi][old];
        const std::int64_t lower = (cb.den - cb.num) * bottom[cb.lo][old] + cb.num * bottom[cb.hi][old];
        fresh[x] = round_ratio((rb.den - rb.num) * upper + rb.num * lower, rb.den * cb.den);
      }
    }
    for (std::size_t x = 0; x < w; ++x) {
      old3[3 * x] = old3[3 * x + 1] = old3[3 * x + 2] = row[x];
      fresh3[3 * x] = fresh3[3 * x + 1] = fresh3[3 * x + 2] = fresh[x];
    }
    rescale_row(reinterpret_cast<const std::uint8_t*>(&img.at(0, y)), old3.data(), fresh3.data(),
                reinterpret_cast<std::uint8_t*>(&out.at(0, y)), 3 * w);
  }
  return out;
}

RasterImage apply_correction(const RasterImage& img, CorrectionKind kind, const CorrectionParams& params) {
  switch (kind) {
    case CorrectionKind::Contrast: return clahe(img, params.clahe_clip, params.clahe_tiles);
    case CorrectionKind::Color: return white_balance(img, params.wb_max_gain);
    case CorrectionKind::Clarity: return median_filter(img, params.median_window);
    case CorrectionKind::Brightness: return gamma_transform(img, params.gamma);
  }
  throw Error(ErrorCode::InvalidParam, "unknown correction kind");
}

RasterImage apply_cascade(const RasterImage& img, const CascadePlan& plan) {
  PerCorrection<bool> seen{};
  for (const auto& step : plan.steps) {
    if (seen[index_of(step.kind)]) {
      throw Error(ErrorCode::DuplicateCorrection, std::string(to_string(step.kind)) + " appears twice");
    }
    seen[index_of(step.kind)] = true;
  }
  if (plan.steps.empty()) return img;
  RasterImage current = apply_correction(img, plan.steps.front().kind, plan.steps.front().params);
  for (std::size_t i = 1; i < plan.steps.size(); ++i) {
    current = apply_correction(current, plan.steps[i].kind, plan.steps[i].params);
  }
  return current;
}

}  // namespace utilenhance
