#pragma once

#include <string>
#include <vector>

#include "ynet/run_config.hpp"

// Subcommand implementations, separated from the CLI front end so the test
// suites can drive them in-process. All paths are explicit; nothing touches
// ambient state beyond the named files and YNET_THREADS.

namespace ynet {

struct SynthArgs {
  std::string kind = "fork";
  int size = 96;
  int agents = 12;
  int source_fps = 1;
  bool distractor = true;
  std::string scene_id = "synth";
  std::string out_dir;
};

struct PreprocessArgs {
  std::string raw_csv;
  std::string manifest;  // scene manifest JSON (PNG sits next to it)
  std::string out_dir;
  int source_fps = 1;
  bool pedestrians_only = true;
};

struct TrainArgs {
  std::string dataset;    // windows JSONL
  std::string scene_dir;  // <id>.png + <id>.json per scene
  std::string out_dir;
  std::string split = "train";
};

struct PredictArgs {
  std::string checkpoint;
  std::string dataset;
  std::string scene_dir;
  std::string out_file;
  std::string split = "all";  // train | val | all
};

struct EvaluateArgs {
  std::string predictions;
  std::string dataset;
  std::string scene_dir;
  std::string out_dir;
  std::string report_name = "report.json";
};

struct PlotArgs {
  std::string dataset;
  std::string scene_dir;
  std::string predictions;  // optional
  std::string checkpoint;   // optional: adds a goal-map overlay
  std::string out_dir;
  int limit = 8;
};

struct AblateArgs {
  std::string checkpoint;
  std::string dataset;
  std::string scene_dir;
  std::string out_file;
  std::string split = "val";
};

int cmd_synth(const SynthArgs& args, const RunConfig& config);
int cmd_preprocess(const PreprocessArgs& args, const RunConfig& config);
int cmd_train(const TrainArgs& args, const RunConfig& config);
int cmd_predict(const PredictArgs& args, const RunConfig& config);
int cmd_evaluate(const EvaluateArgs& args, const RunConfig& config);
int cmd_plot(const PlotArgs& args, const RunConfig& config);
int cmd_ablate(const AblateArgs& args, const RunConfig& config);

}  // namespace ynet
