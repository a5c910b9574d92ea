#include "ynet/dataset_io.hpp"

#include <fstream>

#include <json.hpp>

#include "ynet/errors.hpp"

namespace ynet {

namespace {

nlohmann::json points_json(const std::vector<Point>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

std::vector<Point> points_from_json(const nlohmann::json& arr) {
  std::vector<Point> out;
  for (const auto& e : arr) out.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw DataError("cannot write: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open: " + path);
  return is;
}

}  // namespace

void write_windows(const std::string& path, const std::vector<WindowedSample>& windows) {
  auto os = open_out(path);
  for (const auto& w : windows) {
    nlohmann::json j;
    j["scene"] = w.scene_id;
    j["agent"] = w.agent_id;
    j["window"] = w.window_index;
    j["split"] = w.split;
    j["past"] = points_json(w.past);
    j["future"] = points_json(w.future);
    os << j.dump() << "\n";
  }
}

std::vector<WindowedSample> read_windows(const std::string& path) {
  auto is = open_in(path);
  std::vector<WindowedSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      WindowedSample w;
      w.scene_id = j.at("scene").get<std::string>();
      w.agent_id = j.at("agent").get<std::string>();
      w.window_index = j.at("window").get<int>();
      w.split = j.value("split", "train");
      w.past = points_from_json(j.at("past"));
      w.future = points_from_json(j.at("future"));
      out.push_back(std::move(w));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_discards(const std::string& path, const std::vector<DiscardEntry>& discards) {
  auto os = open_out(path);
  os << "scene_id,agent_id,frame,reason\n";
  for (const auto& d : discards) {
    os << d.scene_id << "," << d.agent_id << "," << d.frame << "," << d.reason << "\n";
  }
}

void write_predictions(const std::string& path, const std::vector<PredictionRecord>& records) {
  auto os = open_out(path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["scene"] = r.scene_id;
    j["agent"] = r.agent_id;
    j["window"] = r.window_index;
    j["goal_index"] = r.hypothesis.goal_index;
    j["path_index"] = r.hypothesis.path_index;
    j["points"] = points_json(r.hypothesis.points);
    j["conditioning"] = {{"goal", {r.hypothesis.goal.x(), r.hypothesis.goal.y()}},
                         {"waypoints", points_json(r.hypothesis.waypoints)}};
    os << j.dump() << "\n";
  }
}

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  auto is = open_in(path);
  std::vector<PredictionRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      PredictionRecord r;
      r.scene_id = j.at("scene").get<std::string>();
      r.agent_id = j.at("agent").get<std::string>();
      r.window_index = j.at("window").get<int>();
      r.hypothesis.goal_index = j.at("goal_index").get<int>();
      r.hypothesis.path_index = j.at("path_index").get<int>();
      r.hypothesis.points = points_from_json(j.at("points"));
      const auto& c = j.at("conditioning");
      r.hypothesis.goal = Point(c.at("goal").at(0).get<double>(), c.at("goal").at(1).get<double>());
      r.hypothesis.waypoints = points_from_json(c.at("waypoints"));
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ynet
