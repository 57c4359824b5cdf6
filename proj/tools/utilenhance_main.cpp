// utilenhance: detection-oriented image enhancement pipeline.
//
//   utilenhance features  --in DIR [--report CSV]
//   utilenhance select    --in DIR --dict JSON [--policy strict|threshold --tau T]
//   utilenhance enhance   --in DIR --out DIR --dict JSON [--workers N]
//   utilenhance calibrate --in DIR --dets JSON --gt JSON --out DICT.json
//   utilenhance evaluate  --dets JSON --gt JSON [--before JSON] [--report CSV]
//   utilenhance bench     [--in DIR] [--out DICT.json]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "utilenhance/error.hpp"
#include "utilenhance/pipeline.hpp"

using namespace utilenhance;

namespace {

// Values as parsed from flags; applied on top of the config file so that
// flags always win.
struct FlagValues {
  std::string config;
  std::string dict, policy, in, out, report, dets, gt, before, detector_id, gradient_mode;
  double tau = 0, iou = 0, gamma = 0, clahe_clip = 0, wb_max_gain = 0;
  int workers = 0, median_window = 0, clahe_tiles = 0, reps = 0;
  bool sum_to_one = false;
};

struct Options {
  CLI::Option* dict = nullptr;
  CLI::Option* policy = nullptr;
  CLI::Option* tau = nullptr;
  CLI::Option* iou = nullptr;
  CLI::Option* in = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* workers = nullptr;
  CLI::Option* report = nullptr;
  CLI::Option* dets = nullptr;
  CLI::Option* gt = nullptr;
  CLI::Option* before = nullptr;
  CLI::Option* detector_id = nullptr;
  CLI::Option* sum_to_one = nullptr;
  CLI::Option* gradient_mode = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* median_window = nullptr;
  CLI::Option* clahe_clip = nullptr;
  CLI::Option* clahe_tiles = nullptr;
  CLI::Option* wb_max_gain = nullptr;
  CLI::Option* reps = nullptr;
};

void add_common(CLI::App* cmd, FlagValues& v, Options& o) {
  cmd->add_option("--config", v.config, "JSON config file; flags override its fields")->check(CLI::ExistingFile);
  o.dict = cmd->add_option("--dict", v.dict, "contribution dictionary JSON");
  o.policy = cmd->add_option("--policy", v.policy, "selection policy")->check(CLI::IsMember({"strict", "threshold"}));
  o.tau = cmd->add_option("--tau", v.tau, "threshold policy fraction of the best benefit, in (0,1]");
  o.iou = cmd->add_option("--iou", v.iou, "IoU threshold for TP matching");
  o.in = cmd->add_option("--in", v.in, "input image directory");
  o.out = cmd->add_option("--out", v.out, "output directory or file");
  o.workers = cmd->add_option("--workers", v.workers, "worker threads");
  o.report = cmd->add_option("--report", v.report, "report file (CSV)");
  o.gradient_mode = cmd->add_option("--gradient-mode", v.gradient_mode, "Tenengrad composition")
                        ->check(CLI::IsMember({"square_of_sum", "sum_of_squares"}));
  o.gamma = cmd->add_option("--gamma", v.gamma, "gamma exponent");
  o.median_window = cmd->add_option("--median-window", v.median_window, "median window (odd)");
  o.clahe_clip = cmd->add_option("--clahe-clip", v.clahe_clip, "CLAHE clip multiplier");
  o.clahe_tiles = cmd->add_option("--clahe-tiles", v.clahe_tiles, "CLAHE tiles per axis");
  o.wb_max_gain = cmd->add_option("--wb-max-gain", v.wb_max_gain, "white-balance gain cap");
}

PipelineConfig build_config(const FlagValues& v, const Options& o) {
  PipelineConfig c;
  if (!v.config.empty()) c = load_config(v.config, c);
  auto given = [](const CLI::Option* opt) { return opt != nullptr && opt->count() > 0; };
  if (given(o.dict)) c.dict_path = v.dict;
  if (given(o.policy)) {
    c.policy.kind = v.policy == "strict" ? SelectionPolicy::Kind::StrictImproving : SelectionPolicy::Kind::Threshold;
  }
  if (given(o.tau)) c.policy.tau = v.tau;
  if (given(o.iou)) c.iou_threshold = v.iou;
  if (given(o.in)) c.in_dir = v.in;
  if (given(o.out)) c.out_path = v.out;
  if (given(o.workers)) c.workers = v.workers;
  if (given(o.report)) c.report_path = v.report;
  if (given(o.dets)) c.detections_path = v.dets;
  if (given(o.gt)) c.ground_truth_path = v.gt;
  if (given(o.before)) c.baseline_detections_path = v.before;
  if (given(o.detector_id)) c.detector_id = v.detector_id;
  if (given(o.sum_to_one)) c.sum_to_one = v.sum_to_one;
  if (given(o.gradient_mode)) {
    c.gradient_mode = v.gradient_mode == "sum_of_squares" ? GradientMode::SumOfSquares : GradientMode::SquareOfSum;
  }
  if (given(o.gamma)) c.params.gamma = v.gamma;
  if (given(o.median_window)) c.params.median_window = v.median_window;
  if (given(o.clahe_clip)) c.params.clahe_clip = v.clahe_clip;
  if (given(o.clahe_tiles)) c.params.clahe_tiles = v.clahe_tiles;
  if (given(o.wb_max_gain)) c.params.wb_max_gain = v.wb_max_gain;
  if (given(o.reps)) c.bench_reps = v.reps;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detection-oriented image enhancement: features, cascade selection, calibration, evaluation"};
  app.require_subcommand(1);

  FlagValues values;
  Options opts;
  int (*command)(const PipelineConfig&, std::ostream&, std::ostream&) = nullptr;

  auto add = [&](const char* name, const char* help, auto fn) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->callback([&command, fn] { command = fn; });
    return cmd;
  };

  // Every subcommand gets its own option objects; only the chosen one is parsed.
  std::vector<std::pair<CLI::App*, Options>> subs;
  auto register_cmd = [&](CLI::App* cmd) {
    Options o;
    add_common(cmd, values, o);
    subs.emplace_back(cmd, o);
    return &subs.back().second;
  };

  subs.reserve(6);
  register_cmd(add("features", "write per-image feature CSV", &cmd_features));
  register_cmd(add("select", "print the per-image cascade selection as JSON lines", &cmd_select));
  register_cmd(add("enhance", "select and apply cascades, writing PNGs and plans.json", &cmd_enhance));
  {
    CLI::App* cmd = add("calibrate", "build a contribution dictionary from detections and ground truth", &cmd_calibrate);
    Options* o = register_cmd(cmd);
    o->dets = cmd->add_option("--dets", values.dets, "detections JSON")->required();
    o->gt = cmd->add_option("--gt", values.gt, "ground-truth JSON")->required();
    o->detector_id = cmd->add_option("--detector-id", values.detector_id, "detector label stored in the dictionary");
    o->sum_to_one = cmd->add_flag("--sum-to-one", values.sum_to_one, "rescale xi to sum to one");
  }
  {
    CLI::App* cmd = add("evaluate", "dataset mAP, per-class AP and per-image utility Q", &cmd_evaluate);
    Options* o = register_cmd(cmd);
    o->dets = cmd->add_option("--dets", values.dets, "detections JSON")->required();
    o->gt = cmd->add_option("--gt", values.gt, "ground-truth JSON")->required();
    o->before = cmd->add_option("--before", values.before, "baseline detections JSON for delta columns");
  }
  {
    CLI::App* cmd = add("bench", "time each correction and the full cascade", &cmd_bench);
    Options* o = register_cmd(cmd);
    o->reps = cmd->add_option("--reps", values.reps, "repetitions");
  }

  CLI11_PARSE(app, argc, argv);

  const Options* chosen = nullptr;
  for (const auto& [cmd, o] : subs) {
    if (cmd->parsed()) chosen = &o;
  }
  try {
    const PipelineConfig config = build_config(values, *chosen);
    return command(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 2;
  }
}
