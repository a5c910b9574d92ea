#include "ynet/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ynet/errors.hpp"
#include "ynet/rng.hpp"

namespace ynet {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

std::int64_t parse_frame(const std::string& s, int line_no) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line_no) + ": bad frame '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<RawTrack> parse_tracks(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty file, expected a CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(lower(line));

  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_scene = column("scene_id"), c_agent = column("agent_id");
  const int c_class = column("class"), c_frame = column("frame");
  const int c_x = column("x"), c_y = column("y");
  const int c_xmin = column("xmin"), c_ymin = column("ymin");
  const int c_xmax = column("xmax"), c_ymax = column("ymax");
  const bool points = c_x >= 0 && c_y >= 0;
  const bool boxes = c_xmin >= 0 && c_ymin >= 0 && c_xmax >= 0 && c_ymax >= 0;
  if (c_scene < 0 || c_agent < 0 || c_class < 0 || c_frame < 0 || (!points && !boxes)) {
    throw DataError(origin + ": header must name scene_id,agent_id,class,frame and either x,y or "
                             "xmin,ymin,xmax,ymax");
  }

  struct Row {
    std::int64_t frame;
    Point pos;
    std::string cls;
  };
  std::map<std::pair<std::string, std::string>, std::vector<Row>> grouped;
  std::set<std::tuple<std::string, std::string, std::int64_t>> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (static_cast<int>(f.size()) < static_cast<int>(header.size())) {
      throw DataError(origin + " line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " columns, got " + std::to_string(f.size()));
    }
    Row row;
    row.frame = parse_frame(f[static_cast<std::size_t>(c_frame)], line_no);
    row.cls = f[static_cast<std::size_t>(c_class)];
    if (points) {
      row.pos = Point(parse_double(f[static_cast<std::size_t>(c_x)], line_no),
                      parse_double(f[static_cast<std::size_t>(c_y)], line_no));
    } else {
      row.pos = Point((parse_double(f[static_cast<std::size_t>(c_xmin)], line_no) +
                       parse_double(f[static_cast<std::size_t>(c_xmax)], line_no)) /
                          2.0,
                      (parse_double(f[static_cast<std::size_t>(c_ymin)], line_no) +
                       parse_double(f[static_cast<std::size_t>(c_ymax)], line_no)) /
                          2.0);
    }
    if (!std::isfinite(row.pos.x()) || !std::isfinite(row.pos.y())) {
      throw DataError(origin + " line " + std::to_string(line_no) + ": non-finite position");
    }
    const std::string& scene = f[static_cast<std::size_t>(c_scene)];
    const std::string& agent = f[static_cast<std::size_t>(c_agent)];
    if (!seen.insert({scene, agent, row.frame}).second) {
      throw DataError(origin + " line " + std::to_string(line_no) + ": duplicate frame " +
                      std::to_string(row.frame) + " for agent '" + agent + "' in scene '" + scene +
                      "'");
    }
    grouped[{scene, agent}].push_back(std::move(row));
  }

  std::vector<RawTrack> tracks;
  for (auto& [key, rows] : grouped) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.frame < b.frame; });
    RawTrack t;
    t.scene_id = key.first;
    t.agent_id = key.second;
    t.agent_class = rows.front().cls;
    for (const Row& r : rows) {
      t.frames.push_back(r.frame);
      t.positions.push_back(r.pos);
    }
    tracks.push_back(std::move(t));
  }
  return tracks;
}

std::vector<RawTrack> load_tracks(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open track CSV: " + csv_path);
  return parse_tracks(in, csv_path);
}

RawTrack downsample_fps(const RawTrack& track, int src_fps, int dst_fps) {
  if (src_fps < 1 || dst_fps < 1 || src_fps % dst_fps != 0) {
    throw ConfigError("source FPS " + std::to_string(src_fps) + " must be a multiple of target " +
                      std::to_string(dst_fps));
  }
  const std::int64_t stride = src_fps / dst_fps;
  RawTrack out = track;
  out.frames.clear();
  out.positions.clear();
  for (std::size_t i = 0; i < track.frames.size(); ++i) {
    if (track.frames[i] % stride == 0) {
      out.frames.push_back(track.frames[i] / stride);
      out.positions.push_back(track.positions[i]);
    }
  }
  return out;
}

std::vector<RawTrack> split_discontinuities(const RawTrack& track) {
  std::vector<RawTrack> fragments;
  if (track.frames.empty()) return fragments;
  RawTrack cur = track;
  cur.frames.clear();
  cur.positions.clear();
  int fragment = 0;
  for (std::size_t i = 0; i < track.frames.size(); ++i) {
    if (!cur.frames.empty() && track.frames[i] - cur.frames.back() > 1) {
      cur.fragment = fragment++;
      fragments.push_back(cur);
      cur.frames.clear();
      cur.positions.clear();
    }
    cur.frames.push_back(track.frames[i]);
    cur.positions.push_back(track.positions[i]);
  }
  cur.fragment = fragment;
  fragments.push_back(cur);
  return fragments;
}

WindowingResult filter_and_window(const std::vector<RawTrack>& tracks, bool pedestrians_only,
                                  int past_frames, int future_frames) {
  const std::size_t window = static_cast<std::size_t>(past_frames + future_frames);
  WindowingResult out;
  std::map<std::pair<std::string, std::string>, int> window_counts;
  std::map<std::pair<std::string, std::string>, int> fragment_counts;
  for (const auto& t : tracks) {
    fragment_counts[{t.scene_id, t.agent_id}] += 1;
  }
  for (const auto& t : tracks) {
    auto discard_all = [&](const std::string& reason) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        out.discards.push_back({t.scene_id, t.agent_id, t.frames[i], reason});
      }
    };
    if (pedestrians_only && lower(t.agent_class) != "pedestrian") {
      discard_all("class-filter");
      continue;
    }
    if (t.size() < window) {
      // A too-short piece of a split track is a casualty of the split; an
      // originally short track is just short.
      const bool from_split = fragment_counts[{t.scene_id, t.agent_id}] > 1;
      discard_all(from_split ? "discontinuity-boundary" : "short-fragment");
      continue;
    }
    const std::size_t usable = (t.size() / window) * window;
    int& index = window_counts[{t.scene_id, t.agent_id}];
    for (std::size_t at = 0; at < usable; at += window) {
      WindowedSample s;
      s.scene_id = t.scene_id;
      s.agent_id = t.agent_id;
      s.window_index = index++;
      s.past.assign(t.positions.begin() + static_cast<std::ptrdiff_t>(at),
                    t.positions.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(past_frames)));
      s.future.assign(
          t.positions.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(past_frames)),
          t.positions.begin() + static_cast<std::ptrdiff_t>(at + window));
      out.windows.push_back(std::move(s));
    }
    for (std::size_t i = usable; i < t.size(); ++i) {
      out.discards.push_back({t.scene_id, t.agent_id, t.frames[i], "tail"});
    }
  }
  return out;
}

void assign_splits(std::vector<WindowedSample>& windows, double validation_fraction,
                   std::uint64_t seed) {
  std::map<std::pair<std::string, std::string>, std::vector<WindowedSample*>> agents;
  for (auto& w : windows) agents[{w.scene_id, w.agent_id}].push_back(&w);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& [key, group] : agents) keys.push_back(key);
  Rng rng(derive_seed(seed, 0x73706c6974));
  rng.shuffle(keys);
  const std::size_t val = static_cast<std::size_t>(
      std::floor(validation_fraction * static_cast<double>(keys.size())));
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string split = (i < val) ? "val" : "train";
    for (WindowedSample* w : agents[keys[i]]) w->split = split;
  }
}

}  // namespace ynet
