#pragma once

#include <string>
#include <vector>

#include "ynet/evaluation.hpp"
#include "ynet/pipeline.hpp"

namespace ynet {

/// JSON-lines persistence for windowed datasets:
///   {"scene":..,"agent":..,"window":..,"split":..,"past":[[x,y]..],"future":[[x,y]..]}
void write_windows(const std::string& path, const std::vector<WindowedSample>& windows);
std::vector<WindowedSample> read_windows(const std::string& path);

/// Discard ledger CSV: scene_id,agent_id,frame,reason.
void write_discards(const std::string& path, const std::vector<DiscardEntry>& discards);

/// One prediction hypothesis per line:
///   {"scene":..,"agent":..,"window":..,"goal_index":..,"path_index":..,
///    "points":[[x,y]..],"conditioning":{"goal":[x,y],"waypoints":[[x,y]..]}}
struct PredictionRecord {
  std::string scene_id;
  std::string agent_id;
  int window_index = 0;
  Hypothesis hypothesis;
};

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records);
std::vector<PredictionRecord> read_predictions(const std::string& path);

}  // namespace ynet
