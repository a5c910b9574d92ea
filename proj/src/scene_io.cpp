#include "ynet/scene.hpp"

#include <Eigen/LU>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ynet/errors.hpp"

namespace ynet {

void Scene::validate() const {
  if (height() <= 0 || width() <= 0) throw DataError("scene '" + id + "' has empty grid");
  if (class_count <= 0) throw DataError("scene '" + id + "' declares no classes");
  for (int i = 0; i < height(); ++i) {
    for (int j = 0; j < width(); ++j) {
      if (semantic(i, j) >= class_count) {
        throw DataError("scene '" + id + "' pixel (" + std::to_string(i) + "," +
                        std::to_string(j) + ") has class " + std::to_string(semantic(i, j)) +
                        " >= class count " + std::to_string(class_count));
      }
    }
  }
  if (homography && std::abs(homography->determinant()) <= 1e-12) {
    throw DataError("scene '" + id + "' homography is singular");
  }
}

Scene pad_to_multiple(const Scene& scene, int multiple) {
  const int h = scene.height(), w = scene.width();
  const int ph = (h % multiple == 0) ? h : (h / multiple + 1) * multiple;
  const int pw = (w % multiple == 0) ? w : (w / multiple + 1) * multiple;
  if (ph == h && pw == w) return scene;
  Scene out = scene;
  out.semantic = GrayImage::Zero(ph, pw);
  out.semantic.topLeftCorner(h, w) = scene.semantic;
  return out;
}

namespace {

nlohmann::json manifest_json(const Scene& scene) {
  nlohmann::json j;
  j["id"] = scene.id;
  j["classes"] = scene.class_names;
  j["downsample_factor"] = scene.downsample_factor;
  j["units"] = scene.units;
  if (scene.homography) {
    std::vector<double> row_major(9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) row_major[static_cast<std::size_t>(3 * r + c)] = (*scene.homography)(r, c);
    j["homography"] = row_major;
  }
  return j;
}

}  // namespace

Scene load_scene(const std::string& png_path, const std::string& manifest_path) {
  std::ifstream ms(manifest_path);
  if (!ms) throw DataError("cannot open scene manifest: " + manifest_path);
  nlohmann::json j;
  try {
    ms >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid scene manifest " + manifest_path + ": " + e.what());
  }

  Scene scene;
  scene.semantic = read_gray_png(png_path);
  scene.id = j.value("id", std::filesystem::path(png_path).stem().string());
  if (!j.contains("classes") || !j["classes"].is_array() || j["classes"].empty()) {
    throw DataError("scene manifest " + manifest_path + " must list 'classes'");
  }
  scene.class_names = j["classes"].get<std::vector<std::string>>();
  scene.class_count = static_cast<int>(scene.class_names.size());
  scene.downsample_factor = j.value("downsample_factor", 1.0);
  scene.units = j.value("units", std::string("pixels"));
  if (scene.units != "pixels" && scene.units != "meters") {
    throw DataError("scene manifest units must be 'pixels' or 'meters'");
  }
  if (j.contains("homography")) {
    const auto v = j["homography"].get<std::vector<double>>();
    if (v.size() != 9) throw DataError("homography must have 9 row-major entries");
    Eigen::Matrix3d h;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h(r, c) = v[static_cast<std::size_t>(3 * r + c)];
    scene.homography = h;
  }
  if (scene.units == "meters" && !scene.homography) {
    throw DataError("meter-space evaluation requires a homography in the manifest");
  }
  scene = pad_to_multiple(scene, 32);
  scene.validate();
  return scene;
}

void save_scene(const Scene& scene, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir) / scene.id;
  write_gray_png(base.string() + ".png", scene.semantic);
  std::ofstream os(base.string() + ".json", std::ios::trunc);
  if (!os) throw DataError("cannot write scene manifest in " + dir);
  os << manifest_json(scene).dump(2) << "\n";
}

}  // namespace ynet
