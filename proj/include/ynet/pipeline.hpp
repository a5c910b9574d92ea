#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ynet/geometry.hpp"
#include "ynet/scene.hpp"

namespace ynet {

/// One agent's raw observations at source frame rate.
struct RawTrack {
  std::string scene_id;
  std::string agent_id;
  std::string agent_class;
  int fragment = 0;  // provenance after discontinuity splitting
  std::vector<std::int64_t> frames;  // strictly increasing
  std::vector<Point> positions;

  std::size_t size() const { return frames.size(); }
};

/// A fixed-length window: n_p past points followed by n_f future points, all
/// one target frame period apart.
struct WindowedSample {
  std::string scene_id;
  std::string agent_id;
  int window_index = 0;
  std::string split = "train";
  std::vector<Point> past;
  std::vector<Point> future;
};

/// Why a source position did not make it into any window.
struct DiscardEntry {
  std::string scene_id;
  std::string agent_id;
  std::int64_t frame = 0;
  std::string reason;  // class-filter | short-fragment | discontinuity-boundary | tail
};

/// Parses rows of scene_id,agent_id,class,frame,x,y (or the bounding-box
/// variant with xmin,ymin,xmax,ymax, reduced to the box center). Tracks come
/// back grouped and frame-sorted; duplicate (scene, agent, frame) rows and
/// malformed rows are rejected with their line number.
std::vector<RawTrack> load_tracks(const std::string& csv_path);
std::vector<RawTrack> parse_tracks(std::istream& in, const std::string& origin);

/// Keeps frames where frame % (src/dst) == 0 and renumbers them by that
/// stride, so the target period is 1.
RawTrack downsample_fps(const RawTrack& track, int src_fps, int dst_fps);

/// Splits wherever consecutive (downsampled) frames differ by more than one
/// period; fragments keep the source track id and get a fragment index.
std::vector<RawTrack> split_discontinuities(const RawTrack& track);

struct WindowingResult {
  std::vector<WindowedSample> windows;
  std::vector<DiscardEntry> discards;
};

/// Class filter, minimum-length filter, and non-overlapping tiling into
/// windows of n_p + n_f points. Every input position lands in exactly one
/// window or in the discard ledger.
WindowingResult filter_and_window(const std::vector<RawTrack>& tracks, bool pedestrians_only,
                                  int past_frames, int future_frames);

/// Seeded 90/10-style split annotation, grouped so windows of one agent stay
/// in one split.
void assign_splits(std::vector<WindowedSample>& windows, double validation_fraction,
                   std::uint64_t seed);

}  // namespace ynet
