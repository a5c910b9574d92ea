#include "ynet/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ynet/checkpoint.hpp"
#include "ynet/dataset_io.hpp"
#include "ynet/errors.hpp"
#include "ynet/evaluation.hpp"
#include "ynet/plot.hpp"
#include "ynet/predict.hpp"
#include "ynet/synth.hpp"
#include "ynet/threading.hpp"
#include "ynet/training.hpp"

namespace fs = std::filesystem;

namespace ynet {

namespace {

Scene load_scene_by_id(const std::string& scene_dir, const std::string& id) {
  const fs::path base = fs::path(scene_dir) / id;
  return load_scene(base.string() + ".png", base.string() + ".json");
}

std::map<std::string, Scene> load_referenced_scenes(const std::string& scene_dir,
                                                    const std::vector<WindowedSample>& windows) {
  std::map<std::string, Scene> scenes;
  for (const auto& w : windows) {
    if (!scenes.count(w.scene_id)) scenes.emplace(w.scene_id, load_scene_by_id(scene_dir, w.scene_id));
  }
  return scenes;
}

std::vector<WindowedSample> filter_split(std::vector<WindowedSample> windows,
                                         const std::string& split) {
  if (split == "all") return windows;
  std::vector<WindowedSample> out;
  for (auto& w : windows) {
    if (w.split == split) out.push_back(std::move(w));
  }
  return out;
}

/// Emits the FPS-1 walker tracks as a raw CSV at source_fps, linearly
/// interpolating between the one-second samples so that downsampling recovers
/// the original points exactly.
void write_raw_csv(const std::string& path, const std::vector<RawTrack>& tracks, int source_fps) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write: " + path);
  os << "scene_id,agent_id,class,frame,x,y\n";
  for (const auto& t : tracks) {
    for (std::size_t k = 0; k < t.size(); ++k) {
      const bool last = k + 1 == t.size();
      const int steps = last ? 1 : source_fps;
      for (int s = 0; s < steps; ++s) {
        const double f = static_cast<double>(s) / source_fps;
        const Point p = last ? t.positions[k]
                             : (1.0 - f) * t.positions[k] + f * t.positions[k + 1];
        os << t.scene_id << "," << t.agent_id << "," << t.agent_class << ","
           << t.frames[k] * source_fps + s << "," << p.x() << "," << p.y() << "\n";
      }
    }
  }
}

struct LoadedDataset {
  std::vector<WindowedSample> windows;
  std::map<std::string, Scene> scenes;
};

LoadedDataset load_dataset(const std::string& dataset, const std::string& scene_dir,
                           const std::string& split) {
  LoadedDataset d;
  d.windows = filter_split(read_windows(dataset), split);
  if (d.windows.empty()) throw DataError("no windows in split '" + split + "' of " + dataset);
  d.scenes = load_referenced_scenes(scene_dir, d.windows);
  return d;
}

std::vector<PredictionRecord> run_predictions(const YNet<float>& model, const LoadedDataset& data,
                                              const RunConfig& config, bool use_ttst, bool use_cws,
                                              int k_goals, int k_paths) {
  PredictOptions opts;
  opts.use_ttst = use_ttst;
  opts.use_cws = use_cws;
  opts.alpha = config.alpha;
  opts.beta = config.beta;
  opts.sigma = config.sigma;
  opts.encoding = config.encoding();

  std::vector<std::vector<PredictionRecord>> slots(data.windows.size());
  parallel_for(static_cast<int>(data.windows.size()), [&](int i) {
    const auto& w = data.windows[static_cast<std::size_t>(i)];
    SampleBudget budget;
    budget.goal_count = k_goals;
    budget.path_count = k_paths;
    budget.monte_carlo = config.monte_carlo;
    budget.seed = derive_seed(config.seed, 0x707264, static_cast<std::uint64_t>(i));
    const auto hyps =
        predict_window(model, data.scenes.at(w.scene_id), w.past, budget, opts);
    for (const auto& h : hyps) {
      slots[static_cast<std::size_t>(i)].push_back({w.scene_id, w.agent_id, w.window_index, h});
    }
  });
  std::vector<PredictionRecord> out;
  for (auto& s : slots) {
    for (auto& r : s) out.push_back(std::move(r));
  }
  return out;
}

Trajectory to_eval_space(const Trajectory& t, const Scene& scene) {
  Trajectory out = upscale(t, scene.downsample_factor);
  if (scene.units == "meters") out = pixel_to_world(out, *scene.homography);
  return out;
}

std::vector<EvalRecord> join_records(const std::vector<WindowedSample>& windows,
                                     const std::vector<PredictionRecord>& predictions,
                                     const std::map<std::string, Scene>& scenes) {
  std::map<std::tuple<std::string, std::string, int>, EvalRecord> by_key;
  for (const auto& w : windows) {
    EvalRecord r;
    r.scene_id = w.scene_id;
    r.agent_id = w.agent_id;
    r.window_index = w.window_index;
    r.ground_truth = to_eval_space(w.future, scenes.at(w.scene_id));
    by_key[{w.scene_id, w.agent_id, w.window_index}] = std::move(r);
  }
  for (const auto& p : predictions) {
    const auto key = std::make_tuple(p.scene_id, p.agent_id, p.window_index);
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw DataError("prediction for unknown agent '" + p.agent_id + "' window " +
                      std::to_string(p.window_index) + " in scene '" + p.scene_id + "'");
    }
    Hypothesis h = p.hypothesis;
    h.points = to_eval_space(h.points, scenes.at(p.scene_id));
    it->second.hypotheses.push_back(std::move(h));
  }
  std::vector<EvalRecord> records;
  std::vector<std::string> missing;
  for (auto& [key, rec] : by_key) {
    if (rec.hypotheses.empty()) {
      missing.push_back(rec.agent_id + "/" + std::to_string(rec.window_index));
    } else {
      records.push_back(std::move(rec));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("predictions missing for: " + list);
  }
  return records;
}

EvalSummary summarize(std::vector<EvalRecord>& records, const std::string& dataset_name,
                      const std::string& units) {
  EvalSummary s = evaluate_min_of_k(records);
  s.dataset = dataset_name;
  s.units = units;
  return s;
}

void write_report(const std::string& dir, const std::string& report_name,
                  const EvalSummary& summary, const std::vector<EvalRecord>& records) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["dataset"] = summary.dataset;
  j["n_agents"] = summary.agent_count;
  j["k_e"] = summary.goal_count;
  j["k_a"] = summary.path_count;
  j["min_ade"] = summary.min_ade;
  j["min_fde"] = summary.min_fde;
  j["units"] = summary.units;
  std::ofstream os(fs::path(dir) / report_name, std::ios::trunc);
  os << j.dump(2) << "\n";

  std::ofstream csv(fs::path(dir) / "per_agent.csv", std::ios::trunc);
  csv << "scene_id,agent_id,window,min_ade,min_fde,best_ade_hypothesis,best_fde_hypothesis\n";
  for (const auto& r : records) {
    csv << r.scene_id << "," << r.agent_id << "," << r.window_index << "," << r.min_ade << ","
        << r.min_fde << "," << r.best_ade_index << "," << r.best_fde_index << "\n";
  }
}

YNet<float> restore_model(const RunConfig& config, const std::string& checkpoint) {
  YNet<float> model(config.model, derive_seed(config.seed, 0x696e6974));
  auto params = model.parameters();
  load_checkpoint(checkpoint, params);
  return model;
}

}  // namespace

int cmd_synth(const SynthArgs& args, const RunConfig& config) {
  SynthOptions opts;
  opts.kind = parse_scene_kind(args.kind);
  opts.size = args.size;
  opts.agent_count = args.agents;
  opts.seed = config.seed;
  opts.distractor = args.distractor;
  opts.scene_id = args.scene_id;
  const SynthResult result = synth_scene(opts);
  fs::create_directories(args.out_dir);
  save_scene(result.scene, args.out_dir);
  write_raw_csv((fs::path(args.out_dir) / "raw.csv").string(), result.tracks, args.source_fps);
  std::cout << "scene '" << result.scene.id << "' " << result.scene.width() << "x"
            << result.scene.height() << ", " << result.tracks.size() << " tracks -> "
            << args.out_dir << "\n";
  return 0;
}

int cmd_preprocess(const PreprocessArgs& args, const RunConfig& config) {
  if (!fs::exists(args.manifest)) {
    throw ConfigError("scene manifest not found: " + args.manifest);
  }
  if (!fs::exists(args.raw_csv)) {
    throw ConfigError("raw track CSV not found: " + args.raw_csv);
  }
  const Scene scene = load_scene(
      fs::path(args.manifest).replace_extension(".png").string(), args.manifest);
  const std::vector<RawTrack> raw = load_tracks(args.raw_csv);

  std::vector<RawTrack> fragments;
  for (const auto& t : raw) {
    const RawTrack down = downsample_fps(t, args.source_fps, 1);
    for (auto& f : split_discontinuities(down)) {
      RawTrack scaled = f;
      scaled.positions = rescale_points(f.positions, scene.downsample_factor);
      fragments.push_back(std::move(scaled));
    }
  }
  WindowingResult result = filter_and_window(fragments, args.pedestrians_only,
                                             config.model.past_frames, config.model.future_frames);
  assign_splits(result.windows, config.val_fraction, config.seed);

  fs::create_directories(args.out_dir);
  write_windows((fs::path(args.out_dir) / "windows.jsonl").string(), result.windows);
  write_discards((fs::path(args.out_dir) / "discards.csv").string(), result.discards);

  std::map<std::string, int> reasons;
  for (const auto& d : result.discards) reasons[d.reason] += 1;
  std::cout << "tracks in: " << raw.size() << "\n"
            << "fragments: " << fragments.size() << "\n"
            << "windows out: " << result.windows.size() << " (length "
            << config.model.past_frames + config.model.future_frames << ")\n";
  for (const auto& [reason, count] : reasons) {
    std::cout << "discarded " << reason << ": " << count << "\n";
  }
  return 0;
}

int cmd_train(const TrainArgs& args, const RunConfig& config) {
  const LoadedDataset data = load_dataset(args.dataset, args.scene_dir, args.split);
  std::vector<TrainSample<float>> samples;
  for (const auto& w : data.windows) {
    samples.push_back(make_train_sample<float>(w.scene_id, w.agent_id, w.window_index, w.past,
                                               w.future, data.scenes.at(w.scene_id), config.model,
                                               config.sigma, config.encoding()));
  }
  YNet<float> model(config.model, derive_seed(config.seed, 0x696e6974));

  TrainOptions opts;
  opts.lr = config.lr;
  opts.batch_size = config.batch_size;
  opts.epochs = config.epochs;
  opts.seed = config.seed;
  opts.augment = config.augment;
  opts.weights = {config.lambda1, config.lambda2, config.global_scale};

  fs::create_directories(args.out_dir);
  std::ofstream curve(fs::path(args.out_dir) / "loss.csv", std::ios::trunc);
  curve << "epoch,L_goal,L_wp,L_traj,total\n";
  fit(model, samples, opts, [&](const EpochStats& e) {
    curve << e.epoch << "," << e.goal << "," << e.waypoint << "," << e.trajectory << "," << e.total
          << "\n";
    if (e.epoch % 25 == 0 || e.epoch + 1 == opts.epochs) {
      std::cout << "epoch " << e.epoch << " total " << e.total << "\n";
    }
  });
  auto params = model.parameters();
  save_checkpoint((fs::path(args.out_dir) / "checkpoint.bin").string(), params);
  std::cout << "checkpoint -> " << (fs::path(args.out_dir) / "checkpoint.bin").string() << "\n";
  return 0;
}

int cmd_predict(const PredictArgs& args, const RunConfig& config) {
  const LoadedDataset data = load_dataset(args.dataset, args.scene_dir, args.split);
  const YNet<float> model = restore_model(config, args.checkpoint);
  const auto records = run_predictions(model, data, config, config.use_ttst, config.use_cws,
                                       config.k_goals, config.k_paths);
  if (const fs::path parent = fs::path(args.out_file).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  write_predictions(args.out_file, records);
  std::cout << records.size() << " hypotheses (" << config.k_goals << " goals x "
            << config.k_paths << " paths) -> " << args.out_file << "\n";
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args, const RunConfig& config) {
  (void)config;
  const std::vector<PredictionRecord> predictions = read_predictions(args.predictions);
  std::set<std::tuple<std::string, std::string, int>> predicted_keys;
  for (const auto& p : predictions) {
    predicted_keys.insert({p.scene_id, p.agent_id, p.window_index});
  }
  std::vector<WindowedSample> windows;
  for (auto& w : read_windows(args.dataset)) {
    if (predicted_keys.count({w.scene_id, w.agent_id, w.window_index})) windows.push_back(std::move(w));
  }
  if (windows.empty()) throw DataError("no dataset windows match the predictions");
  const auto scenes = load_referenced_scenes(args.scene_dir, windows);
  auto records = join_records(windows, predictions, scenes);
  const std::string units = scenes.begin()->second.units;
  const EvalSummary summary = summarize(records, args.dataset, units);
  write_report(args.out_dir, args.report_name, summary, records);
  std::cout << "min-ADE " << summary.min_ade << " min-FDE " << summary.min_fde << " ("
            << summary.agent_count << " windows, K_e=" << summary.goal_count
            << ", K_a=" << summary.path_count << ", " << units << ")\n";
  return 0;
}

int cmd_plot(const PlotArgs& args, const RunConfig& config) {
  const LoadedDataset data = load_dataset(args.dataset, args.scene_dir, "all");
  std::map<std::tuple<std::string, std::string, int>, std::vector<Hypothesis>> hyps;
  if (!args.predictions.empty()) {
    for (const auto& p : read_predictions(args.predictions)) {
      hyps[{p.scene_id, p.agent_id, p.window_index}].push_back(p.hypothesis);
    }
  }
  std::optional<YNet<float>> model;
  if (!args.checkpoint.empty()) model.emplace(restore_model(config, args.checkpoint));

  fs::create_directories(args.out_dir);
  const int count = std::min<int>(args.limit, static_cast<int>(data.windows.size()));
  for (int i = 0; i < count; ++i) {
    const auto& w = data.windows[static_cast<std::size_t>(i)];
    const Scene& scene = data.scenes.at(w.scene_id);
    std::optional<ProbabilityMap> overlay;
    if (model) {
      const auto input = build_input(encode_past<float>(w.past, scene, config.encoding()),
                                     encode_semantic<float>(scene));
      const auto maps = model->decode_goal(model->encode(input), RunMode::kInfer);
      overlay = to_probability_map(maps.waypoints_goal, model->config().waypoint_count());
    }
    const auto it = hyps.find({w.scene_id, w.agent_id, w.window_index});
    const RgbImage img = render_figure(
        scene, w.past, w.future, it == hyps.end() ? std::vector<Hypothesis>{} : it->second, overlay);
    std::ostringstream name;
    name << w.scene_id << "_" << w.agent_id << "_w" << w.window_index << ".png";
    write_rgb_png((fs::path(args.out_dir) / name.str()).string(), img);
  }
  std::cout << count << " figures -> " << args.out_dir << "\n";
  return 0;
}

int cmd_ablate(const AblateArgs& args, const RunConfig& config) {
  const LoadedDataset data = load_dataset(args.dataset, args.scene_dir, args.split);
  const YNet<float> model = restore_model(config, args.checkpoint);

  struct Row {
    std::string label;
    bool ttst;
    bool cws;
    int k_goals;
    int k_paths;
    double min_ade;
    double min_fde;
  };
  std::vector<Row> rows;
  auto measure = [&](const std::string& label, bool ttst_on, bool cws_on, int ke, int ka) {
    const auto preds = run_predictions(model, data, config, ttst_on, cws_on, ke, ka);
    auto records = join_records(data.windows, preds, data.scenes);
    const EvalSummary s = summarize(records, args.dataset, data.scenes.begin()->second.units);
    rows.push_back({label, ttst_on, cws_on, ke, ka, s.min_ade, s.min_fde});
  };

  for (const bool ttst_on : {false, true}) {
    for (const bool cws_on : {false, true}) {
      std::ostringstream label;
      label << "grid_ttst" << (ttst_on ? 1 : 0) << "_cws" << (cws_on ? 1 : 0);
      measure(label.str(), ttst_on, cws_on, config.k_goals, config.k_paths);
    }
  }
  for (const int ka : {1, 2, 5}) {
    measure("sweep_ka" + std::to_string(ka), true, true, config.k_goals, ka);
  }

  if (const fs::path parent = fs::path(args.out_file).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream os(args.out_file, std::ios::trunc);
  if (!os) throw DataError("cannot write: " + args.out_file);
  os << "label,ttst,cws,k_e,k_a,min_ade,min_fde\n";
  for (const auto& r : rows) {
    os << r.label << "," << (r.ttst ? 1 : 0) << "," << (r.cws ? 1 : 0) << "," << r.k_goals << ","
       << r.k_paths << "," << r.min_ade << "," << r.min_fde << "\n";
  }
  std::cout << rows.size() << " ablation rows -> " << args.out_file << "\n";
  return 0;
}

}  // namespace ynet
