// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
// hard criterion fails; throughput is reported but never fails the run.
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include "support.hpp"
#include "utilenhance/calibration.hpp"
#include "utilenhance/corrections.hpp"
#include "utilenhance/features.hpp"
#include "utilenhance/pipeline.hpp"
#include "utilenhance/selection.hpp"
#include "utilenhance/utility.hpp"

using namespace utilenhance;
using namespace testing_support;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int hard_failures = 0;

void report(const std::string& name, bool soft, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const char* verdict = o.pass ? "PASS" : (soft ? "FAIL (soft)" : "FAIL");
  std::printf("%-12s %-28s %s\n", verdict, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass && !soft) ++hard_failures;
}

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

const FeatureVector kAllApplicable{0.5, 0.4, 0.5, 0.5};

Box unit_at(double x, double y) { return {x, y, x + 1.0, y + 1.0}; }

Outcome selection_fixtures() {
  const auto yolox = yolox_dictionary();
  const auto centernet = centernet_dictionary();
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = select_cascade(kAllApplicable, yolox, SelectionPolicy::strict()).kinds();
  const auto b = select_cascade(kAllApplicable, centernet, SelectionPolicy::threshold(0.5)).kinds();
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const bool ok_a = a == std::vector<CorrectionKind>{CorrectionKind::Contrast};
  const bool ok_b =
      b == std::vector<CorrectionKind>{CorrectionKind::Contrast, CorrectionKind::Color, CorrectionKind::Brightness};
  return {ok_a && ok_b && ms < 1.0, "yolox/strict " + std::string(ok_a ? "ok" : "wrong") + ", centernet/threshold(0.5) " +
                                        (ok_b ? "ok" : "wrong") + ", " + num(ms, 3) + " ms"};
}

Outcome benefit_arithmetic() {
  double worst = 0.0;
  for (const auto& dict : {yolox_dictionary(), centernet_dictionary()}) {
    for (const auto& s : score_corrections(kAllApplicable, dict)) {
      const double hand = dict.xi_of(s.kind) / dict.time_of(s.kind);
      worst = std::max(worst, std::abs(s.benefit - hand));
    }
  }
  const double contrast = score_corrections(kAllApplicable, yolox_dictionary())[0].benefit;
  const bool ok = worst <= 1e-9 && std::abs(contrast - 15.663) < 5e-4;
  return {ok, "B(contrast, yolox) = " + num(contrast) + ", max deviation " + num(worst, 3)};
}

Outcome ap_oracle() {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> nd(0, 10), ng(1, 5), nc(0, 2);
  std::uniform_real_distribution<double> pos(0.0, 20.0), jitter(-1.5, 1.5), conf(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<GroundTruth> gts;
    std::vector<Detection> dets;
    const int g = ng(rng), d = nd(rng);
    for (int i = 0; i < g; ++i) {
      const double x = pos(rng), y = pos(rng);
      gts.push_back({{x, y, x + 4.0, y + 4.0}, "c" + std::to_string(nc(rng))});
    }
    for (int i = 0; i < d; ++i) {
      const Box& t = gts[rng() % gts.size()].box;
      Box b{t.x_min + jitter(rng), t.y_min + jitter(rng), t.x_max + jitter(rng), t.y_max + jitter(rng)};
      if (rng() % 3 == 0) {
        const double x = pos(rng), y = pos(rng);
        b = {x, y, x + 4.0, y + 4.0};
      }
      dets.push_back({b, "c" + std::to_string(nc(rng)), conf(rng)});
    }
    const auto r = match_detections(dets, gts);
    for (const auto& [cls, cm] : r.per_class) {
      if (cm.gt_count == 0) continue;
      std::vector<bool> ranked;
      for (const auto& h : cm.ranked) ranked.push_back(h.tp);
      worst = std::max(worst, std::abs(average_precision(r.pr_points(cls)) - oracle_ap_riemann(ranked, cm.gt_count)));
    }
  }
  const std::vector<GroundTruth> gts = {{unit_at(0, 0), "a"}, {unit_at(5, 5), "a"}};
  const auto stair = match_detections({{unit_at(0, 0), "a", 0.9}, {unit_at(9, 9), "a", 0.7}, {unit_at(5, 5), "a", 0.6}}, gts);
  const double staircase = average_precision(stair.pr_points("a"));
  return {worst <= 1e-6 && std::abs(staircase - 0.8333) <= 1e-4,
          "max deviation " + num(worst, 3) + ", staircase " + num(staircase)};
}

Outcome utility_examples() {
  const double q1 = utility_score({{unit_at(0, 0), "a", 0.9}}, {{unit_at(0, 0), "a"}}).q;
  const double q2 = utility_score({}, {{unit_at(0, 0), "a"}, {unit_at(4, 4), "a"}}).q;
  const auto s3 = utility_score({{unit_at(0, 0), "a", 0.9}, {unit_at(9, 9), "a", 0.7}, {unit_at(5, 5), "a", 0.6}},
                                {{unit_at(0, 0), "a"}, {unit_at(5, 5), "a"}});
  const double want3 = s3.map - s3.miss_rate + 0.6 - 0.7;
  const bool ok = std::abs(q1 - 1.9) < 1e-12 && q2 == -1.0 && std::abs(s3.map - 5.0 / 6.0) < 1e-12 &&
                  s3.miss_rate == 0.0 && s3.c_tp == 0.6 && s3.c_fp == 0.7 && s3.q == want3;
  return {ok, "q = " + num(q1) + ", " + num(q2) + ", " + num(s3.q)};
}

Outcome plcc_oracle() {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> len(3, 200);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> a(0.1, 10.0), b(-50.0, 50.0);
  double worst = 0.0, worst_affine = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = len(rng);
    std::vector<double> s(m), p(m);
    const double mix = n(rng);
    for (int i = 0; i < m; ++i) {
      s[i] = n(rng);
      p[i] = mix * s[i] + n(rng);
    }
    const double r = plcc(s, p);
    worst = std::max(worst, std::abs(r - oracle_plcc(s, p)));
    const double sa = a(rng), sb = b(rng);
    std::vector<double> t(m);
    for (int i = 0; i < m; ++i) t[i] = sa * p[i] + sb;
    worst_affine = std::max(worst_affine, std::abs(plcc(s, t) - r));
  }
  return {worst <= 1e-10 && worst_affine <= 1e-10,
          "oracle deviation " + num(worst, 3) + ", affine deviation " + num(worst_affine, 3)};
}

Outcome correction_invariants() {
  std::string failed;
  const RasterImage img = random_image(37, 23, 5);
  if (gamma_transform(img, 1.0) != img) failed += " gamma";

  RasterImage gray(31, 17);
  std::mt19937 rng(6);
  for (Rgb& p : gray.pixels()) {
    const auto v = static_cast<std::uint8_t>(rng() % 256);
    p = {v, v, v};
  }
  if (white_balance(gray, 3.0) != gray) failed += " white_balance";

  for (int trial = 0; trial < 100; ++trial) {
    const RasterImage w = random_image(3 + trial % 5, 3 + trial % 4, 1000 + trial);
    const RasterImage out = median_filter(w, 3);
    const auto channel = [](const Rgb& p, int c) { return c == 0 ? p.r : (c == 1 ? p.g : p.b); };
    for (std::size_t y = 0; y < w.height(); ++y) {
      for (std::size_t x = 0; x < w.width(); ++x) {
        for (int c = 0; c < 3; ++c) {
          std::vector<int> window;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              const auto cx = static_cast<std::size_t>(std::clamp<long>(long(x) + dx, 0, long(w.width()) - 1));
              const auto cy = static_cast<std::size_t>(std::clamp<long>(long(y) + dy, 0, long(w.height()) - 1));
              window.push_back(channel(w.at(cx, cy), c));
            }
          }
          if (std::find(window.begin(), window.end(), channel(out.at(x, y), c)) == window.end()) {
            failed += " median";
            goto median_done;
          }
        }
      }
    }
  }
median_done:

  int worst = 0;
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    const RasterImage g = gray_ramp(48, 40, seed);
    const RasterImage a = clahe(g, 1e9, 1);
    const RasterImage b = oracle_global_equalization(g);
    for (std::size_t i = 0; i < a.size(); ++i) {
      const Rgb pa = a.pixels()[i], pb = b.pixels()[i];
      worst = std::max({worst, std::abs(pa.r - pb.r), std::abs(pa.g - pb.g), std::abs(pa.b - pb.b)});
    }
  }
  if (worst > 1) failed += " clahe";
  return {failed.empty(), failed.empty() ? "clahe vs global equalization max diff " + std::to_string(worst)
                                         : "violated:" + failed};
}

Outcome feature_extremes() {
  std::string failed;
  const auto f = extract_features(uniform(16, 16, {128, 128, 128}));
  if (f.gradient != 0.0 || f.saturation != 0.0 || f.entropy != 0.0 || f.brightness != 128.0 / 255.0) {
    failed += " constant";
  }
  const auto colored = extract_features(uniform(16, 16, {200, 100, 50}));
  if (colored.gradient != 0.0 || colored.entropy != 0.0) failed += " constant-colored";
  RasterImage levels(256, 4);
  for (std::size_t y = 0; y < 4; ++y) {
    for (std::size_t x = 0; x < 256; ++x) {
      const auto v = static_cast<std::uint8_t>(x);
      levels.at(x, y) = {v, v, v};
    }
  }
  if (entropy(levels) != 1.0) failed += " entropy";
  if (saturation(levels) != 0.0 || saturation(gray_ramp(20, 20, 3)) != 0.0) failed += " saturation";
  return {failed.empty(), failed.empty() ? "exact" : "violated:" + failed};
}

Outcome calibration_recovery() {
  const auto samples = planted_samples(200, 0.9, 4242);
  const auto dict = calibrate(samples, kReferenceTimeCost, ApplicabilityRanges{});
  const double xc = dict.xi_of(CorrectionKind::Contrast);
  bool dominant = true;
  for (CorrectionKind k : {CorrectionKind::Color, CorrectionKind::Clarity, CorrectionKind::Brightness}) {
    dominant = dominant && xc > dict.xi_of(k);
  }
  std::string detail = "xi =";
  for (CorrectionKind k : kRankOrder) detail += " " + num(dict.xi_of(k), 4);
  return {xc >= 0.8 && xc <= 1.0 && dominant, detail};
}

Outcome determinism() {
  const auto in = fresh_dir("acceptance_det_in");
  for (std::uint32_t i = 0; i < 20; ++i) {
    const RasterImage img = i % 2 ? low_contrast(96, 72, 30 + 3 * i, 110 + 4 * i, i) : random_image(96, 72, 500 + i);
    char name[32];
    std::snprintf(name, sizeof name, "frame%02u.png", i);
    write_image(img, in / name, ImageFormat::Png);
  }
  std::vector<fs::path> outs;
  for (int workers : {1, 8}) {
    PipelineConfig c;
    c.in_dir = in;
    c.out_path = fresh_dir("acceptance_det_out" + std::to_string(workers));
    c.workers = workers;
    c.policy = SelectionPolicy::threshold(0.5);
    c.dict_path = fs::path(UTILENHANCE_SOURCE_DIR) / "fixtures" / "dictionaries" / "centernet.json";
    std::ostringstream out, err;
    if (cmd_enhance(c, out, err) != 0) return {false, "enhance failed: " + err.str()};
    outs.push_back(c.out_path);
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(outs[0])) {
    const auto name = entry.path().filename();
    if (read_file(outs[0] / name) != read_file(outs[1] / name)) return {false, "differs: " + name.string()};
    ++compared;
  }
  return {compared == 21, std::to_string(compared) + " files identical"};
}

Outcome throughput() {
  std::vector<RasterImage> images;
  for (std::uint32_t i = 0; i < 4; ++i) images.push_back(random_image(640, 480, 7000 + i));
  CascadePlan plan;
  for (CorrectionKind k : kRankOrder) plan.steps.push_back({k, CorrectionParams{}});
  apply_cascade(images[0], plan);  // warm-up
  // Median over several rounds; single rounds are noisy on shared machines.
  std::vector<double> rates;
  for (int round = 0; round < 7; ++round) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < 3; ++r) {
      for (const auto& img : images) apply_cascade(img, plan);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rates.push_back(3.0 * images.size() / secs);
  }
  std::nth_element(rates.begin(), rates.begin() + 3, rates.end());
  const double rate = rates[3];
  return {rate >= 100.0, num(rate, 4) + " images/sec at 640x480, single thread (median of 7 rounds)"};
}

}  // namespace

int main() {
  report("selection-fixtures", false, selection_fixtures);
  report("benefit-arithmetic", false, benefit_arithmetic);
  report("ap-oracle", false, ap_oracle);
  report("utility-examples", false, utility_examples);
  report("plcc-oracle", false, plcc_oracle);
  report("correction-invariants", false, correction_invariants);
  report("feature-extremes", false, feature_extremes);
  report("calibration-recovery", false, calibration_recovery);
  report("determinism", false, determinism);
  report("throughput", true, throughput);
  std::printf("%d hard failure(s)\n", hard_failures);
  return hard_failures == 0 ? 0 : 1;
}
