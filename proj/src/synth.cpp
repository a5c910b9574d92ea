#include "ynet/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ynet/errors.hpp"
#include "ynet/rng.hpp"

namespace ynet {

namespace {

// Class indices in the generated manifests.
constexpr int kPavement = 0;
constexpr int kTerrain = 1;
constexpr int kStructure = 2;
constexpr int kTree = 3;
constexpr int kRoad = 4;

const std::vector<std::string> kClassNames{"pavement", "terrain", "structure", "tree", "road"};

struct Segment {
  Point a, b;
};

double segment_distance(const Point& p, const Segment& s) {
  const Eigen::Vector2d d = s.b - s.a;
  const double len2 = d.squaredNorm();
  double t = len2 > 0.0 ? (p - s.a).dot(d) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (s.a + t * d)).norm();
}

void paint_band(GrayImage& grid, const Segment& s, double radius, int cls) {
  for (int i = 0; i < grid.rows(); ++i) {
    for (int j = 0; j < grid.cols(); ++j) {
      if (segment_distance(Point(j, i), s) <= radius) {
        grid(i, j) = static_cast<std::uint8_t>(cls);
      }
    }
  }
}

struct Layout {
  std::vector<Segment> corridors;                  // painted as pavement
  std::vector<std::vector<Segment>> routes;        // walker polylines
};

Layout make_layout(SceneKind kind, int size) {
  const double s = size;
  const double mid = s / 2.0;
  const double margin = 2.0;
  Layout layout;
  switch (kind) {
    case SceneKind::kCorridor: {
      const Segment c{Point(margin, mid), Point(s - margin, mid)};
      layout.corridors = {c};
      layout.routes = {{c}, {Segment{c.b, c.a}}};
      break;
    }
    case SceneKind::kFork: {
      const Point start(margin, mid);
      const Point junction(mid, mid);
      const Point upper(s - margin, mid - 3.0 * s / 8.0);
      const Point middle(s - margin, mid);
      const Point lower(s - margin, mid + 3.0 * s / 8.0);
      layout.corridors = {Segment{start, junction}, Segment{junction, upper},
                          Segment{junction, middle}, Segment{junction, lower}};
      layout.routes = {{Segment{start, junction}, Segment{junction, upper}},
                       {Segment{start, junction}, Segment{junction, middle}},
                       {Segment{start, junction}, Segment{junction, lower}}};
      break;
    }
    case SceneKind::kCrossing: {
      const Segment hor{Point(margin, mid), Point(s - margin, mid)};
      const Segment ver{Point(mid, margin), Point(mid, s - margin)};
      layout.corridors = {hor, ver};
      layout.routes = {{hor}, {Segment{hor.b, hor.a}}, {ver}, {Segment{ver.b, ver.a}}};
      break;
    }
  }
  return layout;
}

/// Walks a polyline at 1 Hz with smooth lateral jitter kept strictly inside
/// the corridor band.
std::vector<Point> walk_route(const std::vector<Segment>& route, double half_width, Rng& rng) {
  const double speed = rng.uniform(0.9, 1.3) * std::max(1.0, half_width / 2.0);
  const double max_offset = std::max(0.0, half_width - 1.0);
  std::vector<Point> points;
  double offset = rng.uniform(-max_offset / 2.0, max_offset / 2.0);
  for (const Segment& seg : route) {
    const Eigen::Vector2d dir = (seg.b - seg.a).normalized();
    const Eigen::Vector2d normal(-dir.y(), dir.x());
    const double len = (seg.b - seg.a).norm();
    for (double along = points.empty() ? 0.0 : speed; along < len; along += speed) {
      offset = std::clamp(offset + rng.uniform(-0.4, 0.4), -max_offset, max_offset);
      points.push_back(seg.a + along * dir + offset * normal);
    }
  }
  return points;
}

}  // namespace

SceneKind parse_scene_kind(const std::string& name) {
  if (name == "corridor") return SceneKind::kCorridor;
  if (name == "fork") return SceneKind::kFork;
  if (name == "crossing") return SceneKind::kCrossing;
  throw ConfigError("unknown scene kind '" + name + "' (corridor|fork|crossing)");
}

int corridor_half_width(int size) { return std::max(2, size / 16); }

std::vector<GrayImage> fork_corridor_masks(int size) {
  const Layout layout = make_layout(SceneKind::kFork, size);
  const double hw = corridor_half_width(size);
  const double mask_from = size / 2.0 + 3.0 * hw;  // past the junction, where arms separate
  std::vector<GrayImage> masks;
  for (int arm = 1; arm <= 3; ++arm) {
    GrayImage m = GrayImage::Zero(size, size);
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        if (j >= mask_from && segment_distance(Point(j, i), layout.corridors[static_cast<std::size_t>(arm)]) <= hw) {
          m(i, j) = 1;
        }
      }
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

SynthResult synth_scene(const SynthOptions& options) {
  if (options.size < 32 || options.size % 32 != 0) {
    throw ConfigError("synthetic scene size must be a positive multiple of 32");
  }
  const int s = options.size;
  const double hw = corridor_half_width(s);
  Rng rng(derive_seed(options.seed, 0x73796e7468));

  SynthResult out;
  out.scene.id = options.scene_id;
  out.scene.class_names = kClassNames;
  out.scene.class_count = static_cast<int>(kClassNames.size());
  out.scene.semantic = GrayImage::Constant(s, s, kTerrain);

  // Decoration first; pavement is painted last so corridors stay walkable.
  paint_band(out.scene.semantic, Segment{Point(s * 0.1, s * 0.08), Point(s * 0.9, s * 0.08)},
             std::max(1.0, s * 0.03), kRoad);
  paint_band(out.scene.semantic, Segment{Point(s * 0.15, s * 0.85), Point(s * 0.35, s * 0.85)},
             std::max(1.0, s * 0.05), kStructure);
  paint_band(out.scene.semantic, Segment{Point(s * 0.75, s * 0.9), Point(s * 0.9, s * 0.8)},
             std::max(1.0, s * 0.04), kTree);
  const Layout layout = make_layout(options.kind, s);
  for (const Segment& seg : layout.corridors) paint_band(out.scene.semantic, seg, hw, kPavement);
  out.scene.validate();

  for (int a = 0; a < options.agent_count; ++a) {
    const auto& route = layout.routes[static_cast<std::size_t>(rng.below(static_cast<int>(layout.routes.size())))];
    RawTrack t;
    t.scene_id = options.scene_id;
    t.agent_id = "a" + std::to_string(a);
    t.agent_class = "Pedestrian";
    t.positions = walk_route(route, hw, rng);
    for (std::size_t k = 0; k < t.positions.size(); ++k) {
      t.frames.push_back(static_cast<std::int64_t>(k));
    }
    out.tracks.push_back(std::move(t));
  }
  if (options.distractor) {
    RawTrack t;
    t.scene_id = options.scene_id;
    t.agent_id = "b0";
    t.agent_class = "Biker";
    t.positions = walk_route(layout.routes[0], hw, rng);
    for (std::size_t k = 0; k < t.positions.size(); ++k) {
      t.frames.push_back(static_cast<std::int64_t>(k));
    }
    out.tracks.push_back(std::move(t));
  }
  return out;
}

}  // namespace ynet
