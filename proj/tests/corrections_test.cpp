#include <gtest/gtest.h>

#include <map>

#include "support.hpp"
#include "utilenhance/corrections.hpp"
#include "utilenhance/error.hpp"

using namespace utilenhance;
using namespace testing_support;

namespace {

ErrorCode code_of(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::IoError;
}

RasterImage transposed(const RasterImage& img) {
  RasterImage out(img.height(), img.width());
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) out.at(y, x) = img.at(x, y);
  }
  return out;
}

}  // namespace

TEST(Gamma, IdentityExponent) {
  const RasterImage img = random_image(16, 9, 1);
  EXPECT_EQ(gamma_transform(img, 1.0), img);
}

TEST(Gamma, HalfExponentSamples) {
  RasterImage img(3, 1);
  img.at(0, 0) = {64, 0, 255};
  img.at(1, 0) = {0, 0, 0};
  img.at(2, 0) = {255, 255, 255};
  const RasterImage out = gamma_transform(img, 0.5);
  EXPECT_EQ(out.at(0, 0), (Rgb{128, 0, 255}));  // 127.75 -> 128
  EXPECT_EQ(out.at(1, 0), (Rgb{0, 0, 0}));
  EXPECT_EQ(out.at(2, 0), (Rgb{255, 255, 255}));
}

TEST(Gamma, MonotoneAndBrightening) {
  RasterImage ramp(256, 1);
  for (int v = 0; v < 256; ++v) {
    const auto s = static_cast<std::uint8_t>(v);
    ramp.at(v, 0) = {s, s, s};
  }
  const RasterImage out = gamma_transform(ramp, 0.5);
  for (int v = 1; v < 256; ++v) {
    EXPECT_GE(out.at(v, 0).r, out.at(v - 1, 0).r);
    EXPECT_GE(out.at(v, 0).r, v);
  }
}

TEST(Gamma, RejectsNonPositive) {
  const RasterImage img(2, 2);
  EXPECT_EQ(code_of([&] { gamma_transform(img, 0.0); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([&] { gamma_transform(img, -1.0); }), ErrorCode::InvalidParam);
}

TEST(WhiteBalance, GrayImageUnchanged) {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    const RasterImage img = gray_ramp(13, 7, seed);
    EXPECT_EQ(white_balance(img, 3.0), img);
  }
}

TEST(WhiteBalance, UniformGreenHeavy) {
  // m = 133.33, gains (1.333, 0.667, 1.333)
  const RasterImage out = white_balance(uniform(4, 3, {100, 200, 100}), 3.0);
  for (const Rgb& p : out.pixels()) EXPECT_EQ(p, (Rgb{133, 133, 133}));
}

TEST(WhiteBalance, GainCapEngages) {
  // m = 90; red gain min(9, 3) = 3 -> 30
  const RasterImage out = white_balance(uniform(2, 2, {10, 10, 250}), 3.0);
  EXPECT_EQ(out.at(0, 0).r, 30);
  EXPECT_EQ(out.at(0, 0).g, 30);
  EXPECT_EQ(out.at(0, 0).b, 90);
}

TEST(WhiteBalance, ZeroChannelGetsCap) {
  const RasterImage out = white_balance(uniform(2, 2, {0, 100, 100}), 3.0);
  EXPECT_EQ(out.at(0, 0).r, 0);
  // remaining gains: m = 66.67, 100 -> 67
  EXPECT_EQ(out.at(0, 0).g, 67);
}

TEST(WhiteBalance, GainNeverExceedsCap) {
  const RasterImage img = random_image(20, 20, 5);
  for (double cap : {1.0, 1.5, 3.0}) {
    const RasterImage out = white_balance(img, cap);
    for (std::size_t i = 0; i < img.size(); ++i) {
      const Rgb a = img.pixels()[i];
      const Rgb b = out.pixels()[i];
      EXPECT_LE(b.r, std::nearbyint(a.r * cap) + 0.0);
      EXPECT_LE(b.g, std::nearbyint(a.g * cap) + 0.0);
      EXPECT_LE(b.b, std::nearbyint(a.b * cap) + 0.0);
    }
  }
}

TEST(Median, ConstantImageUnchanged) {
  const RasterImage img = uniform(10, 8, {17, 99, 230});
  EXPECT_EQ(median_filter(img, 3), img);
  EXPECT_EQ(median_filter(img, 5), img);
}

TEST(Median, IsolatedSpikeRemoved) {
  RasterImage img(3, 3, {0, 0, 0});
  img.at(1, 1) = {255, 255, 255};
  EXPECT_EQ(median_filter(img, 3), RasterImage(3, 3, {0, 0, 0}));
}

TEST(Median, SaltAndPepperRestored) {
  const Rgb base{120, 80, 160};
  RasterImage img = uniform(64, 64, base);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Rgb& p : img.pixels()) {
    const double r = u(rng);
    if (r < 0.025) {
      p = {0, 0, 0};
    } else if (r < 0.05) {
      p = {255, 255, 255};
    }
  }
  const RasterImage out = median_filter(img, 3);
  std::size_t restored = 0;
  for (const Rgb& p : out.pixels()) restored += p == base ? 1 : 0;
  EXPECT_GE(static_cast<double>(restored) / out.size(), 0.99);
}

TEST(Median, OutputDrawnFromWindowMultiset) {
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const RasterImage img = random_image(12, 9, seed);
    for (int window : {3, 5}) {
      const RasterImage out = median_filter(img, window);
      const int r = window / 2;
      for (std::size_t y = 0; y < img.height(); ++y) {
        for (std::size_t x = 0; x < img.width(); ++x) {
          // Brute-force median over the edge-replicated window.
          std::vector<int> red;
          for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
              const auto xx = std::clamp<long>(long(x) + dx, 0, long(img.width()) - 1);
              const auto yy = std::clamp<long>(long(y) + dy, 0, long(img.height()) - 1);
              red.push_back(img.at(xx, yy).r);
            }
          }
          std::sort(red.begin(), red.end());
          ASSERT_EQ(out.at(x, y).r, red[red.size() / 2]);
        }
      }
    }
  }
}

TEST(Median, RejectsBadWindow) {
  const RasterImage img(4, 4);
  EXPECT_EQ(code_of([&] { median_filter(img, 4); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([&] { median_filter(img, 1); }), ErrorCode::InvalidParam);
}

TEST(Clahe, ConstantImageUnchanged) {
  const RasterImage img = uniform(40, 30, {90, 110, 70});
  EXPECT_EQ(clahe(img, 2.0, 8), img);
  EXPECT_EQ(clahe(img, 2.0, 1), img);
}

TEST(Clahe, SingleTileUnboundedClipIsGlobalEqualization) {
  for (std::uint32_t seed = 1; seed <= 10; ++seed) {
    const RasterImage img = low_contrast(37, 23, 40, 140, seed);
    const RasterImage got = clahe(img, 1e9, 1);
    const RasterImage want = oracle_global_equalization(img);
    for (std::size_t i = 0; i < img.size(); ++i) {
      const Rgb a = got.pixels()[i];
      const Rgb b = want.pixels()[i];
      ASSERT_LE(std::abs(a.r - b.r), 1);
      ASSERT_LE(std::abs(a.g - b.g), 1);
      ASSERT_LE(std::abs(a.b - b.b), 1);
    }
  }
}

TEST(Clahe, TwoLevelImage) {
  // 25% at luma 50, 75% at luma 200: cdf 0.25 and 1.0 -> 64 and 255.
  RasterImage img(4, 4, {200, 200, 200});
  for (std::size_t x = 0; x < 4; ++x) img.at(x, 0) = {50, 50, 50};
  const RasterImage out = clahe(img, 1e9, 1);
  EXPECT_EQ(out.at(0, 0), (Rgb{64, 64, 64}));
  EXPECT_EQ(out.at(0, 3), (Rgb{255, 255, 255}));
}

TEST(Clahe, ClippingLimitsStretch) {
  const RasterImage img = low_contrast(64, 64, 90, 120, 3);
  auto spread = [](const RasterImage& im) {
    int lo = 255, hi = 0;
    for (const Rgb& p : im.pixels()) {
      lo = std::min<int>(lo, luma(p));
      hi = std::max<int>(hi, luma(p));
    }
    return hi - lo;
  };
  const int raw = spread(img);
  const int clipped = spread(clahe(img, 2.0, 1));
  const int unclipped = spread(clahe(img, 1e9, 1));
  EXPECT_GT(clipped, raw);
  EXPECT_LE(clipped, unclipped);
}

TEST(Clahe, TransposeEquivariantOnSquareTiles) {
  const RasterImage img = low_contrast(48, 48, 30, 160, 8);
  EXPECT_EQ(clahe(transposed(img), 2.0, 4), transposed(clahe(img, 2.0, 4)));
  // Widely spaced tile centres take the wide-integer blend path.
  const RasterImage big = random_image(600, 600, 9);
  EXPECT_EQ(clahe(transposed(big), 2.0, 2), transposed(clahe(big, 2.0, 2)));
}

TEST(Clahe, MoreTilesThanPixels) {
  const RasterImage img = random_image(5, 3, 6);
  const RasterImage out = clahe(img, 2.0, 8);
  EXPECT_EQ(out.width(), 5u);
  EXPECT_EQ(out.height(), 3u);
}

TEST(Clahe, RejectsBadParams) {
  const RasterImage img(4, 4);
  EXPECT_EQ(code_of([&] { clahe(img, 0.5, 8); }), ErrorCode::InvalidParam);
  EXPECT_EQ(code_of([&] { clahe(img, 2.0, 0); }), ErrorCode::InvalidParam);
}

TEST(Corrections, PreserveDimensionsAndDeterministic) {
  const RasterImage img = random_image(33, 17, 12);
  const CorrectionParams params;
  for (CorrectionKind k : kRankOrder) {
    const RasterImage a = apply_correction(img, k, params);
    EXPECT_EQ(a.width(), img.width());
    EXPECT_EQ(a.height(), img.height());
    EXPECT_EQ(a, apply_correction(img, k, params));
  }
}

TEST(Cascade, EmptyPlanIsIdentity) {
  const RasterImage img = random_image(8, 8, 2);
  EXPECT_EQ(apply_cascade(img, CascadePlan{}), img);
}

TEST(Cascade, SingleContrastStepEqualsClahe) {
  const RasterImage img = low_contrast(50, 40, 60, 130, 1);
  CascadePlan plan;
  plan.steps.push_back({CorrectionKind::Contrast, {}});
  EXPECT_EQ(apply_cascade(img, plan), clahe(img, 2.0, 8));
}

TEST(Cascade, ComposesInPlanOrder) {
  const RasterImage img = low_contrast(50, 40, 60, 130, 2);
  CascadePlan plan;
  plan.steps.push_back({CorrectionKind::Contrast, {}});
  plan.steps.push_back({CorrectionKind::Color, {}});
  EXPECT_EQ(apply_cascade(img, plan), white_balance(clahe(img, 2.0, 8), 3.0));
}

TEST(Cascade, DuplicateRejected) {
  CascadePlan plan;
  plan.steps.push_back({CorrectionKind::Clarity, {}});
  plan.steps.push_back({CorrectionKind::Clarity, {}});
  EXPECT_EQ(code_of([&] { apply_cascade(RasterImage(4, 4), plan); }), ErrorCode::DuplicateCorrection);
}

TEST(CorrectionParams, Validation) {
  EXPECT_NO_THROW(CorrectionParams{}.validate());
  CorrectionParams p;
  p.median_window = 4;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidParam);
  p = {};
  p.wb_max_gain = 0.9;
  EXPECT_EQ(code_of([&] { p.validate(); }), ErrorCode::InvalidParam);
}

TEST(CorrectionKindNames, RoundTrip) {
  for (CorrectionKind k : kRankOrder) EXPECT_EQ(correction_from_string(to_string(k)), k);
  EXPECT_FALSE(correction_from_string("sharpen"));
}
