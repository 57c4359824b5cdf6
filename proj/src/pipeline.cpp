#include "utilenhance/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "utilenhance/corrections.hpp"
#include "utilenhance/error.hpp"
#include "utilenhance/imgio.hpp"
#include "utilenhance/utility.hpp"

namespace utilenhance {

using nlohmann::json;

namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel log_level_from_env() {
  const char* raw = std::getenv("UTILENHANCE_LOG");
  if (raw == nullptr) return LogLevel::Warn;
  const std::string v(raw);
  if (v == "error") return LogLevel::Error;
  if (v == "info") return LogLevel::Info;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Warn;
}

class Log {
 public:
  explicit Log(std::ostream& sink) : sink_(sink), level_(log_level_from_env()) {}

  void error(const std::string& msg) { write(LogLevel::Error, "error", msg); }
  void warn(const std::string& msg) { write(LogLevel::Warn, "warn", msg); }
  void info(const std::string& msg) { write(LogLevel::Info, "info", msg); }

 private:
  void write(LogLevel level, const char* tag, const std::string& msg) {
    if (level > level_) return;
    sink_ << "[" << tag << "] " << msg << "\n";
  }

  std::ostream& sink_;
  LogLevel level_;
};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string lower_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

bool is_png_bytes(const std::vector<std::uint8_t>& bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(sig, sig + 8, bytes.begin());
}

RasterImage decode_any(const std::vector<std::uint8_t>& bytes, const fs::path& path) {
  if (is_png_bytes(bytes)) return decode(bytes, ImageFormat::Png);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode(bytes, ImageFormat::Ppm);
  throw Error(ErrorCode::MalformedFile, "unrecognized image format: " + path.string());
}

void require_dir(const fs::path& dir, const char* flag) {
  if (dir.empty()) throw Error(ErrorCode::InvalidParam, std::string(flag) + " is required");
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, std::string(flag) + " is not a directory: " + dir.string());
}

void require_file(const std::optional<fs::path>& file, const char* flag) {
  if (!file) throw Error(ErrorCode::InvalidParam, std::string(flag) + " is required");
  if (!fs::is_regular_file(*file)) throw Error(ErrorCode::IoError, std::string(flag) + " not found: " + file->string());
}

double effective_iou(const PipelineConfig& config, const ContributionDictionary* dict) {
  if (config.iou_threshold) return *config.iou_threshold;
  return dict != nullptr ? dict->iou_threshold : kDefaultIouThreshold;
}

json features_json(const FeatureVector& f) {
  return {{"gradient", f.gradient}, {"saturation", f.saturation}, {"entropy", f.entropy},
          {"brightness", f.brightness}};
}

json selection_record(const std::string& image_id, const FeatureVector& features, const CascadePlan& plan) {
  json omega = json::object();
  json benefit = json::object();
  for (const auto& s : plan.scores) {
    omega[std::string(to_string(s.kind))] = s.omega;
    benefit[std::string(to_string(s.kind))] = s.benefit;
  }
  json steps = json::array();
  for (CorrectionKind k : plan.kinds()) steps.push_back(std::string(to_string(k)));
  return {{"image_id", image_id}, {"features", features_json(features)}, {"omega", std::move(omega)},
          {"benefit", std::move(benefit)}, {"plan", std::move(steps)}, {"policy", plan.policy_id}};
}

// Runs `job` over every image of the input directory and reports failures
// in input order. Returns the number of failed files.
template <typename Job>
std::size_t for_each_image(const std::vector<fs::path>& files, int workers, Log& log, Job job) {
  std::vector<std::string> failures(files.size());
  parallel_for(files.size(), workers, [&](std::size_t i) {
    try {
      job(i);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  std::size_t failed = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (failures[i].empty()) continue;
    ++failed;
    log.error(files[i].string() + ": " + failures[i]);
  }
  return failed;
}

template <typename Fn>
int guarded(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    Log(err).error(e.what());
    return 1;
  }
}

fs::path resolve_image(const fs::path& dir, const std::string& id) {
  const fs::path direct = dir / id;
  if (fs::is_regular_file(direct)) return direct;
  for (const char* ext : {".png", ".ppm"}) {
    fs::path candidate = dir / (id + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  throw Error(ErrorCode::IoError, "no image file for id \"" + id + "\" in " + dir.string());
}

std::map<std::string, const ImageAnnotations*> index_by_id(const std::vector<ImageAnnotations>& images) {
  std::map<std::string, const ImageAnnotations*> out;
  for (const auto& img : images) {
    if (!out.emplace(img.id, &img).second) throw Error(ErrorCode::SchemaError, "duplicate image id: " + img.id);
  }
  return out;
}

RasterImage synthetic_scene(std::size_t width, std::size_t height, std::uint32_t seed) {
  // Dim, blue-green cast scene with blobs and sensor noise.
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 6.0);
  RasterImage img(width, height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = static_cast<double>(x) / width;
      const double fy = static_cast<double>(y) / height;
      const double blob = 60.0 * std::exp(-40.0 * ((fx - 0.4) * (fx - 0.4) + (fy - 0.6) * (fy - 0.6)));
      const double base = 30.0 + 40.0 * fy + blob;
      img.at(x, y) = {to_sample(0.4 * base + noise(rng)), to_sample(1.1 * base + noise(rng)),
                      to_sample(1.3 * base + noise(rng))};
    }
  }
  return img;
}

}  // namespace

void PipelineConfig::validate() const {
  params.validate();
  policy.validate();
  if (workers < 1) throw Error(ErrorCode::InvalidParam, "workers must be >= 1");
  if (iou_threshold && !(*iou_threshold > 0.0 && *iou_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidParam, "iou must be in (0, 1]");
  }
  if (bench_reps < 1 || bench_width < 3 || bench_height < 3) {
    throw Error(ErrorCode::InvalidParam, "bench needs reps >= 1 and at least 3x3 images");
  }
}

PipelineConfig merge_config_json(const std::string& text, PipelineConfig c, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "config: top level must be an object");

  auto fail = [](const std::string& key) -> void {
    throw Error(ErrorCode::SchemaError, "config: bad value for \"" + key + "\"");
  };
  auto as_path = [&](const json& v, const std::string& key) {
    if (!v.is_string()) fail(key);
    fs::path path(v.get<std::string>());
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  auto as_number = [&](const json& v, const std::string& key) {
    if (!v.is_number()) fail(key);
    return v.get<double>();
  };
  auto as_int = [&](const json& v, const std::string& key) {
    if (!v.is_number_integer()) fail(key);
    return v.get<int>();
  };

  for (const auto& [key, v] : doc.items()) {
    if (key == "dict") {
      c.dict_path = as_path(v, key);
    } else if (key == "policy") {
      if (!v.is_string()) fail(key);
      const auto name = v.get<std::string>();
      if (name == "strict") {
        c.policy.kind = SelectionPolicy::Kind::StrictImproving;
      } else if (name == "threshold") {
        c.policy.kind = SelectionPolicy::Kind::Threshold;
      } else {
        fail(key);
      }
    } else if (key == "tau") {
      c.policy.tau = as_number(v, key);
    } else if (key == "iou") {
      c.iou_threshold = as_number(v, key);
    } else if (key == "gradient_mode") {
      if (v == "square_of_sum") {
        c.gradient_mode = GradientMode::SquareOfSum;
      } else if (v == "sum_of_squares") {
        c.gradient_mode = GradientMode::SumOfSquares;
      } else {
        fail(key);
      }
    } else if (key == "in") {
      c.in_dir = as_path(v, key);
    } else if (key == "out") {
      c.out_path = as_path(v, key);
    } else if (key == "report") {
      c.report_path = as_path(v, key);
    } else if (key == "workers") {
      c.workers = as_int(v, key);
    } else if (key == "detections") {
      c.detections_path = as_path(v, key);
    } else if (key == "ground_truth") {
      c.ground_truth_path = as_path(v, key);
    } else if (key == "baseline") {
      c.baseline_detections_path = as_path(v, key);
    } else if (key == "detector_id") {
      if (!v.is_string()) fail(key);
      c.detector_id = v.get<std::string>();
    } else if (key == "sum_to_one") {
      if (!v.is_boolean()) fail(key);
      c.sum_to_one = v.get<bool>();
    } else if (key == "params") {
      if (!v.is_object()) fail(key);
      for (const auto& [pk, pv] : v.items()) {
        const std::string full = "params." + pk;
        if (pk == "gamma") {
          c.params.gamma = as_number(pv, full);
        } else if (pk == "median_window") {
          c.params.median_window = as_int(pv, full);
        } else if (pk == "clahe_clip") {
          c.params.clahe_clip = as_number(pv, full);
        } else if (pk == "clahe_tiles") {
          c.params.clahe_tiles = as_int(pv, full);
        } else if (pk == "wb_max_gain") {
          c.params.wb_max_gain = as_number(pv, full);
        } else {
          throw Error(ErrorCode::SchemaError, "config: unknown key \"" + full + "\"");
        }
      }
    } else if (key == "bench") {
      if (!v.is_object()) fail(key);
      for (const auto& [bk, bv] : v.items()) {
        const std::string full = "bench." + bk;
        if (bk == "reps") {
          c.bench_reps = as_int(bv, full);
        } else if (bk == "width") {
          c.bench_width = as_int(bv, full);
        } else if (bk == "height") {
          c.bench_height = as_int(bv, full);
        } else {
          throw Error(ErrorCode::SchemaError, "config: unknown key \"" + full + "\"");
        }
      }
    } else {
      throw Error(ErrorCode::SchemaError, "config: unknown key \"" + key + "\"");
    }
  }
  return c;
}

PipelineConfig load_config(const fs::path& path, PipelineConfig base) {
  const auto bytes = read_file(path);
  return merge_config_json(std::string(bytes.begin(), bytes.end()), std::move(base), path.parent_path());
}

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower_extension(entry.path());
    if (ext == ".png" || ext == ".ppm") out.push_back(entry.path());
  }
  std::ranges::sort(out);
  return out;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) job(i);
    });
  }
}

ContributionDictionary resolve_dictionary(const PipelineConfig& config) {
  if (config.dict_path) return load_dictionary(*config.dict_path);
  return yolox_dictionary();
}

std::string selection_record_json(const std::string& image_id, const FeatureVector& features,
                                  const CascadePlan& plan) {
  return selection_record(image_id, features, plan).dump();
}

int cmd_features(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_dir(config.in_dir, "--in");
    Log log(err);
    const auto files = list_images(config.in_dir);
    std::vector<std::string> rows(files.size());
    const auto failed = for_each_image(files, config.workers, log, [&](std::size_t i) {
      const FeatureVector f = extract_features(read_image(files[i]), config.gradient_mode);
      rows[i] = files[i].filename().string() + "," + fixed6(f.gradient) + "," + fixed6(f.saturation) + "," +
                fixed6(f.entropy) + "," + fixed6(f.brightness);
    });
    std::ostringstream csv;
    csv << "path,gradient,saturation,entropy,brightness\n";
    for (const auto& row : rows) {
      if (!row.empty()) csv << row << "\n";
    }
    if (config.report_path) {
      const std::string text = csv.str();
      write_file(*config.report_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    } else {
      out << csv.str();
    }
    log.info("features: " + std::to_string(files.size() - failed) + " ok, " + std::to_string(failed) + " failed");
    return failed == 0 ? 0 : 1;
  });
}

int cmd_select(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_dir(config.in_dir, "--in");
    Log log(err);
    const ContributionDictionary dict = resolve_dictionary(config);
    const auto files = list_images(config.in_dir);
    std::vector<std::string> lines(files.size());
    const auto failed = for_each_image(files, config.workers, log, [&](std::size_t i) {
      const FeatureVector f = extract_features(read_image(files[i]), config.gradient_mode);
      const CascadePlan plan = select_cascade(f, dict, config.policy, config.params);
      lines[i] = selection_record_json(files[i].filename().string(), f, plan);
    });
    for (const auto& line : lines) {
      if (!line.empty()) out << line << "\n";
    }
    return failed == 0 ? 0 : 1;
  });
}

int cmd_enhance(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_dir(config.in_dir, "--in");
    if (config.out_path.empty()) throw Error(ErrorCode::InvalidParam, "--out is required");
    Log log(err);
    const ContributionDictionary dict = resolve_dictionary(config);
    fs::create_directories(config.out_path);

    const auto files = list_images(config.in_dir);
    // Output names are <stem>.png; two inputs sharing a stem would collide.
    std::map<std::string, std::size_t> stems;
    std::vector<bool> collides(files.size(), false);
    for (std::size_t i = 0; i < files.size(); ++i) {
      if (!stems.emplace(files[i].stem().string(), i).second) collides[i] = true;
    }

    std::vector<json> records(files.size());
    const auto failed = for_each_image(files, config.workers, log, [&](std::size_t i) {
      if (collides[i]) throw Error(ErrorCode::IoError, "output name collides with another input of the same stem");
      const auto bytes = read_file(files[i]);
      const RasterImage img = decode_any(bytes, files[i]);
      const FeatureVector f = extract_features(img, config.gradient_mode);
      const CascadePlan plan = select_cascade(f, dict, config.policy, config.params);
      const fs::path target = config.out_path / (files[i].stem().string() + ".png");
      if (plan.steps.empty() && is_png_bytes(bytes)) {
        write_file(target, bytes);
      } else {
        write_image(apply_cascade(img, plan), target, ImageFormat::Png);
      }
      records[i] = selection_record(files[i].filename().string(), f, plan);
    });

    json log_doc = json::array();
    for (auto& r : records) {
      if (!r.is_null()) log_doc.push_back(std::move(r));
    }
    const std::string text = log_doc.dump(2) + "\n";
    write_file(config.out_path / "plans.json",
               std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    out << "enhanced " << (files.size() - failed) << " of " << files.size() << " images into "
        << config.out_path.string() << "\n";
    return failed == 0 ? 0 : 1;
  });
}

int cmd_calibrate(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_dir(config.in_dir, "--in");
    require_file(config.detections_path, "--dets");
    require_file(config.ground_truth_path, "--gt");
    if (config.out_path.empty()) throw Error(ErrorCode::InvalidParam, "--out is required");
    Log log(err);

    std::optional<ContributionDictionary> base;
    if (config.dict_path) base = load_dictionary(*config.dict_path);
    const double iou_threshold = effective_iou(config, base ? &*base : nullptr);

    const auto gts = load_annotations(*config.ground_truth_path, AnnotationKind::GroundTruth);
    const auto dets = load_annotations(*config.detections_path, AnnotationKind::Detections);
    const auto det_index = index_by_id(dets);
    index_by_id(gts);

    std::vector<std::optional<CalibrationSample>> slots(gts.size());
    std::vector<fs::path> labels;
    for (const auto& g : gts) labels.emplace_back(g.id);
    const auto failed = for_each_image(labels, config.workers, log, [&](std::size_t i) {
      const ImageAnnotations& gt = gts[i];
      if (gt.ground_truth.empty()) return;  // Q undefined without ground truth
      const auto it = det_index.find(gt.id);
      const std::vector<Detection> none;
      const auto& image_dets = it == det_index.end() ? none : it->second->detections;
      const RasterImage img = read_image(resolve_image(config.in_dir, gt.id));
      slots[i] = CalibrationSample{gt.id, extract_features(img, config.gradient_mode),
                                   utility_score(image_dets, gt.ground_truth, iou_threshold)};
    });

    std::vector<CalibrationSample> samples;
    for (auto& s : slots) {
      if (s) samples.push_back(std::move(*s));
    }
    log.info("calibrate: " + std::to_string(samples.size()) + " usable samples");

    const PerCorrection<double> correlations = feature_correlations(samples);
    CalibrationOptions options{config.detector_id, iou_threshold, config.sum_to_one};
    const ContributionDictionary dict =
        calibrate(samples, base ? base->time_cost : kReferenceTimeCost, base ? base->ranges : ApplicabilityRanges{},
                  options);
    save_dictionary(dict, config.out_path);

    out << "feature     correction  plcc       xi\n";
    for (CorrectionKind k : kRankOrder) {
      char line[128];
      std::snprintf(line, sizeof line, "%-11s %-11s %+.6f  %.6f\n", std::string(to_string(paired_feature(k))).c_str(),
                    std::string(to_string(k)).c_str(), correlations[index_of(k)], dict.xi_of(k));
      out << line;
    }
    out << "samples: " << samples.size() << "\n";
    return failed == 0 ? 0 : 1;
  });
}

DatasetEvaluation evaluate_dataset(const std::vector<ImageAnnotations>& detections,
                                   const std::vector<ImageAnnotations>& ground_truth, double iou_threshold) {
  const auto det_index = index_by_id(detections);
  index_by_id(ground_truth);

  struct Pooled {
    std::vector<RankedHit> hits;
    std::size_t gt_count = 0;
  };
  std::map<std::string, Pooled> pooled;
  DatasetEvaluation result;
  const std::vector<Detection> none;

  for (const auto& gt : ground_truth) {
    const auto it = det_index.find(gt.id);
    const auto& dets = it == det_index.end() ? none : it->second->detections;
    const MatchReport report = match_detections(dets, gt.ground_truth, iou_threshold);
    for (const auto& [cls, cm] : report.per_class) {
      Pooled& p = pooled[cls];
      p.gt_count += cm.gt_count;
      p.hits.insert(p.hits.end(), cm.ranked.begin(), cm.ranked.end());
    }
    if (!gt.ground_truth.empty()) result.images.push_back({gt.id, utility_score(dets, gt.ground_truth, iou_threshold)});
  }

  double sum = 0.0;
  for (auto& [cls, p] : pooled) {
    if (p.gt_count == 0) continue;
    std::ranges::stable_sort(p.hits, [](const RankedHit& a, const RankedHit& b) { return a.confidence > b.confidence; });
    std::vector<PrPoint> points;
    std::size_t tp = 0;
    for (std::size_t i = 0; i < p.hits.size(); ++i) {
      if (p.hits[i].tp) ++tp;
      points.push_back({static_cast<double>(tp) / static_cast<double>(p.gt_count),
                        static_cast<double>(tp) / static_cast<double>(i + 1)});
    }
    const double ap = average_precision(points);
    result.class_ap[cls] = ap;
    sum += ap;
  }
  if (result.class_ap.empty()) throw Error(ErrorCode::NoGroundTruth, "no ground truth in the dataset");
  result.map = sum / static_cast<double>(result.class_ap.size());
  return result;
}

int cmd_evaluate(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    require_file(config.detections_path, "--dets");
    require_file(config.ground_truth_path, "--gt");
    Log log(err);
    std::optional<ContributionDictionary> dict;
    if (config.dict_path) dict = load_dictionary(*config.dict_path);
    const double iou_threshold = effective_iou(config, dict ? &*dict : nullptr);

    const auto gts = load_annotations(*config.ground_truth_path, AnnotationKind::GroundTruth);
    const auto after = evaluate_dataset(load_annotations(*config.detections_path, AnnotationKind::Detections), gts,
                                        iou_threshold);
    std::optional<DatasetEvaluation> before;
    if (config.baseline_detections_path) {
      require_file(config.baseline_detections_path, "--before");
      before = evaluate_dataset(load_annotations(*config.baseline_detections_path, AnnotationKind::Detections), gts,
                                iou_threshold);
    }

    out << "dataset mAP: " << fixed6(after.map);
    if (before) out << "  before: " << fixed6(before->map) << "  delta_mAP: " << fixed6(after.map - before->map);
    out << "\n";
    out << (before ? "class,AP,AP_before,delta_AP\n" : "class,AP\n");
    for (const auto& [cls, ap] : after.class_ap) {
      out << cls << "," << fixed6(ap);
      if (before) {
        const auto it = before->class_ap.find(cls);
        const double b = it == before->class_ap.end() ? 0.0 : it->second;
        out << "," << fixed6(b) << "," << fixed6(ap - b);
      }
      out << "\n";
    }

    std::vector<double> qs;
    for (const auto& row : after.images) qs.push_back(row.score.q);
    if (!qs.empty()) {
      double mean = 0.0;
      for (double q : qs) mean += q;
      mean /= static_cast<double>(qs.size());
      std::vector<double> sorted = qs;
      std::ranges::sort(sorted);
      const std::size_t n = sorted.size();
      const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      out << "images: " << n << "  mean Q: " << fixed6(mean) << "  median Q: " << fixed6(median) << "\n";
    }

    std::optional<fs::path> csv_path = config.report_path;
    if (!csv_path && !config.out_path.empty()) csv_path = config.out_path;
    if (csv_path) {
      std::map<std::string, const DatasetEvaluation::ImageRow*> before_rows;
      if (before) {
        for (const auto& row : before->images) before_rows[row.id] = &row;
      }
      std::ostringstream csv;
      csv << "id,map,miss_rate,c_tp,c_fp,q";
      if (before) csv << ",map_before,q_before,delta_map,delta_q";
      csv << "\n";
      for (const auto& row : after.images) {
        const UtilityScore& s = row.score;
        csv << row.id << "," << fixed6(s.map) << "," << fixed6(s.miss_rate) << "," << fixed6(s.c_tp) << ","
            << fixed6(s.c_fp) << "," << fixed6(s.q);
        if (before) {
          const auto* b = before_rows.at(row.id);
          csv << "," << fixed6(b->score.map) << "," << fixed6(b->score.q) << "," << fixed6(s.map - b->score.map)
              << "," << fixed6(s.q - b->score.q);
        }
        csv << "\n";
      }
      const std::string text = csv.str();
      write_file(*csv_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    }
    return 0;
  });
}

int cmd_bench(const PipelineConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config.validate();
    Log log(err);
    std::vector<RasterImage> images;
    if (!config.in_dir.empty()) {
      require_dir(config.in_dir, "--in");
      for (const auto& path : list_images(config.in_dir)) images.push_back(read_image(path));
    }
    if (images.empty()) {
      for (std::uint32_t seed = 1; seed <= 4; ++seed) {
        images.push_back(synthetic_scene(config.bench_width, config.bench_height, seed));
      }
    }
    const PerCorrection<double> seconds = measure_time_cost(images, config.params, config.bench_reps);

    CascadePlan full;
    for (CorrectionKind k : kRankOrder) full.steps.push_back({k, config.params});
    using clock = std::chrono::steady_clock;
    std::vector<double> rates;
    for (int r = 0; r < config.bench_reps; ++r) {
      const auto start = clock::now();
      std::size_t checksum = 0;
      for (const auto& img : images) checksum += apply_cascade(img, full).size();
      const double elapsed = std::chrono::duration<double>(clock::now() - start).count();
      if (checksum == 0) throw Error(ErrorCode::InvalidParam, "empty cascade output");
      rates.push_back(static_cast<double>(images.size()) / std::max(elapsed, 1e-12));
    }
    std::ranges::sort(rates);
    const double rate = rates[rates.size() / 2];

    out << "images: " << images.size() << " at " << images.front().width() << "x" << images.front().height() << "\n";
    out << "correction,seconds\n";
    for (CorrectionKind k : kRankOrder) out << to_string(k) << "," << fixed6(seconds[index_of(k)]) << "\n";
    char line[96];
    std::snprintf(line, sizeof line, "full_cascade_images_per_sec,%.1f\n", rate);
    out << line;

    if (!config.out_path.empty()) {
      ContributionDictionary dict = resolve_dictionary(config);
      dict.time_cost = seconds;
      dict.validate();
      save_dictionary(dict, config.out_path);
      log.info("wrote measured-time dictionary to " + config.out_path.string());
    }
    return 0;
  });
}

}  // namespace utilenhance
