#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ynet/commands.hpp"
#include "ynet/errors.hpp"
#include "ynet/run_config.hpp"

// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical
// failure.

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> k_goals;
  std::optional<int> k_paths;
  std::optional<double> temperature;
  std::string waypoints;
  bool no_ttst = false;
  bool no_cws = false;
  std::optional<int> epochs;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config file");
  cmd->add_option("--seed", flags.seed, "root RNG seed");
  cmd->add_option("--k-e", flags.k_goals, "goal hypotheses (K_e)");
  cmd->add_option("--k-a", flags.k_paths, "path hypotheses per goal (K_a)");
  cmd->add_option("--temperature", flags.temperature, "goal/waypoint logit temperature");
  cmd->add_option("--waypoints", flags.waypoints, "comma-separated waypoint frame indices");
  cmd->add_flag("--no-ttst", flags.no_ttst, "plain categorical goal sampling");
  cmd->add_flag("--no-cws", flags.no_cws, "unconditioned waypoint sampling");
  cmd->add_option("--epochs", flags.epochs, "training epochs");
}

ynet::RunConfig resolve_config(const CommonFlags& flags) {
  ynet::RunConfig config = flags.config_path.empty()
                               ? ynet::RunConfig{}
                               : ynet::RunConfig::from_json_file(flags.config_path);
  ynet::ConfigOverrides o;
  o.seed = flags.seed;
  o.k_goals = flags.k_goals;
  o.k_paths = flags.k_paths;
  o.temperature = flags.temperature;
  o.epochs = flags.epochs;
  if (flags.no_ttst) o.use_ttst = false;
  if (flags.no_cws) o.use_cws = false;
  if (!flags.waypoints.empty()) {
    std::vector<int> frames;
    std::stringstream ss(flags.waypoints);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        frames.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ynet::ConfigError("bad --waypoints entry '" + tok + "'");
      }
    }
    o.waypoint_frames = frames;
  }
  config = ynet::apply_overrides(config, o);
  std::cout << "resolved config (defaults < "
            << (flags.config_path.empty() ? "none" : flags.config_path)
            << " < command line):\n" << config.to_json_string() << "\n";
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"factorized goal/waypoint/path trajectory forecasting"};
  app.require_subcommand(1);

  CommonFlags flags;

  ynet::SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "generate a synthetic scene and raw tracks");
  c_synth->add_option("--kind", synth.kind, "corridor|fork|crossing");
  c_synth->add_option("--size", synth.size, "square scene size (multiple of 32)");
  c_synth->add_option("--agents", synth.agents, "walker count");
  c_synth->add_option("--src-fps", synth.source_fps, "raw CSV frame rate");
  c_synth->add_option("--scene-id", synth.scene_id, "scene identifier");
  c_synth->add_flag("--no-distractor{false}", synth.distractor, "omit the non-pedestrian track");
  c_synth->add_option("--out", synth.out_dir, "output directory")->required();
  add_common_flags(c_synth, flags);

  ynet::PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "raw CSV -> windowed dataset + discard ledger");
  c_pre->add_option("--raw", pre.raw_csv, "raw track CSV")->required();
  c_pre->add_option("--manifest", pre.manifest, "scene manifest JSON")->required();
  c_pre->add_option("--src-fps", pre.source_fps, "raw CSV frame rate");
  c_pre->add_flag("--keep-classes{false}", pre.pedestrians_only, "keep non-pedestrians");
  c_pre->add_option("--out", pre.out_dir, "output directory")->required();
  add_common_flags(c_pre, flags);

  ynet::TrainArgs train;
  auto* c_train = app.add_subcommand("train", "fit the forecasting network");
  c_train->add_option("--data", train.dataset, "windows JSONL")->required();
  c_train->add_option("--scenes", train.scene_dir, "scene directory")->required();
  c_train->add_option("--split", train.split, "train|val|all");
  c_train->add_option("--out", train.out_dir, "output directory")->required();
  add_common_flags(c_train, flags);

  ynet::PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "sample K_e x K_a future hypotheses");
  c_predict->add_option("--checkpoint", predict.checkpoint, "model checkpoint")->required();
  c_predict->add_option("--data", predict.dataset, "windows JSONL")->required();
  c_predict->add_option("--scenes", predict.scene_dir, "scene directory")->required();
  c_predict->add_option("--split", predict.split, "train|val|all");
  c_predict->add_option("--out", predict.out_file, "predictions JSONL")->required();
  add_common_flags(c_predict, flags);

  ynet::EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "min-of-K displacement metrics");
  c_eval->add_option("--predictions", evaluate.predictions, "predictions JSONL")->required();
  c_eval->add_option("--data", evaluate.dataset, "windows JSONL")->required();
  c_eval->add_option("--scenes", evaluate.scene_dir, "scene directory")->required();
  c_eval->add_option("--out", evaluate.out_dir, "report directory")->required();
  add_common_flags(c_eval, flags);

  ynet::PlotArgs plot;
  auto* c_plot = app.add_subcommand("plot", "render scene/trajectory/heatmap figures");
  c_plot->add_option("--data", plot.dataset, "windows JSONL")->required();
  c_plot->add_option("--scenes", plot.scene_dir, "scene directory")->required();
  c_plot->add_option("--predictions", plot.predictions, "predictions JSONL");
  c_plot->add_option("--checkpoint", plot.checkpoint, "checkpoint for heatmap overlays");
  c_plot->add_option("--limit", plot.limit, "max figures");
  c_plot->add_option("--out", plot.out_dir, "output directory")->required();
  add_common_flags(c_plot, flags);

  ynet::AblateArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate", "TTST/CWS grid and K_a sweep");
  c_ablate->add_option("--checkpoint", ablate.checkpoint, "model checkpoint")->required();
  c_ablate->add_option("--data", ablate.dataset, "windows JSONL")->required();
  c_ablate->add_option("--scenes", ablate.scene_dir, "scene directory")->required();
  c_ablate->add_option("--split", ablate.split, "train|val|all");
  c_ablate->add_option("--out", ablate.out_file, "results CSV")->required();
  add_common_flags(c_ablate, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    const ynet::RunConfig config = resolve_config(flags);
    if (c_synth->parsed()) return ynet::cmd_synth(synth, config);
    if (c_pre->parsed()) return ynet::cmd_preprocess(pre, config);
    if (c_train->parsed()) return ynet::cmd_train(train, config);
    if (c_predict->parsed()) return ynet::cmd_predict(predict, config);
    if (c_eval->parsed()) return ynet::cmd_evaluate(evaluate, config);
    if (c_plot->parsed()) return ynet::cmd_plot(plot, config);
    if (c_ablate->parsed()) return ynet::cmd_ablate(ablate, config);
    return 2;
  } catch (const ynet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ynet::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ynet::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
