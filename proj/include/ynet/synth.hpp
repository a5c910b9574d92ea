#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ynet/pipeline.hpp"
#include "ynet/scene.hpp"

// Desk-scale synthetic scenes and walkers: class-compliant piecewise-linear
// paths over generated semantic maps, with a three-way fork layout for the
// conditioned-sampling fixtures.

namespace ynet {

enum class SceneKind { kCorridor, kFork, kCrossing };

SceneKind parse_scene_kind(const std::string& name);

struct SynthOptions {
  SceneKind kind = SceneKind::kFork;
  int size = 96;          // square, must divide 32
  int agent_count = 12;
  std::uint64_t seed = 0;
  bool distractor = false;  // adds one non-pedestrian track
  std::string scene_id = "synth";
};

struct SynthResult {
  Scene scene;
  std::vector<RawTrack> tracks;  // FPS 1: frame numbers are seconds
};

SynthResult synth_scene(const SynthOptions& options);

/// Corridor half width used by the generator for a given scene size.
int corridor_half_width(int size);

/// The three disjoint arm masks of a fork scene (upper, middle, lower),
/// covering the corridors beyond the junction area. 1 = inside.
std::vector<GrayImage> fork_corridor_masks(int size);

}  // namespace ynet
