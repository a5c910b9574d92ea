#include "ynet/run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ynet/errors.hpp"

namespace ynet {

void RunConfig::validate() const {
  model.validate();
  if (sigma <= 0.0) throw ConfigError("sigma must be positive");
  if (past_encoding != "peak" && past_encoding != "ramp") {
    throw ConfigError("past_encoding must be 'peak' or 'ramp'");
  }
  if (lr <= 0.0 || batch_size < 1 || epochs < 0) throw ConfigError("bad optimization settings");
  if (lambda1 < 0.0 || lambda2 < 0.0 || global_scale <= 0.0) {
    throw ConfigError("loss weights must be positive");
  }
  if (k_goals < 1 || k_paths < 1 || monte_carlo < k_goals) {
    throw ConfigError("sample budget requires k_goals >= 1, k_paths >= 1, monte_carlo >= k_goals");
  }
  if (alpha <= 0.0 || beta <= 0.0) throw ConfigError("alpha and beta must be positive");
  if (val_fraction < 0.0 || val_fraction >= 1.0) throw ConfigError("val_fraction must be in [0,1)");
}

std::string RunConfig::to_json_string() const {
  nlohmann::json j;
  j["n_past"] = model.past_frames;
  j["n_future"] = model.future_frames;
  j["n_classes"] = model.semantic_classes;
  j["waypoint_frames"] = model.waypoint_frames;
  j["encoder_channels"] = model.encoder_channels;
  j["decoder_channels"] = model.decoder_channels;
  j["center_channels"] = model.center_channels;
  j["temperature"] = model.temperature;
  j["sigma"] = sigma;
  j["past_encoding"] = past_encoding;
  j["lr"] = lr;
  j["batch"] = batch_size;
  j["epochs"] = epochs;
  j["lambda1"] = lambda1;
  j["lambda2"] = lambda2;
  j["global_scale"] = global_scale;
  j["augment"] = augment;
  j["val_fraction"] = val_fraction;
  j["k_goals"] = k_goals;
  j["k_paths"] = k_paths;
  j["monte_carlo"] = monte_carlo;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["use_ttst"] = use_ttst;
  j["use_cws"] = use_cws;
  j["seed"] = seed;
  return j.dump(2);
}

RunConfig RunConfig::from_json_string(const std::string& text, const std::string& origin) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid config " + origin + ": " + e.what());
  }
  RunConfig c;
  try {
    c.model.past_frames = j.value("n_past", c.model.past_frames);
    c.model.future_frames = j.value("n_future", c.model.future_frames);
    c.model.semantic_classes = j.value("n_classes", c.model.semantic_classes);
    c.model.waypoint_frames = j.value("waypoint_frames", c.model.waypoint_frames);
    c.model.encoder_channels = j.value("encoder_channels", c.model.encoder_channels);
    c.model.decoder_channels = j.value("decoder_channels", c.model.decoder_channels);
    c.model.center_channels = j.value("center_channels", c.model.center_channels);
    c.model.temperature = j.value("temperature", c.model.temperature);
    c.sigma = j.value("sigma", c.sigma);
    c.past_encoding = j.value("past_encoding", c.past_encoding);
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.global_scale = j.value("global_scale", c.global_scale);
    c.augment = j.value("augment", c.augment);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.k_goals = j.value("k_goals", c.k_goals);
    c.k_paths = j.value("k_paths", c.k_paths);
    c.monte_carlo = j.value("monte_carlo", c.monte_carlo);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.use_ttst = j.value("use_ttst", c.use_ttst);
    c.use_cws = j.value("use_cws", c.use_cws);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid config " + origin + ": " + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json_string(ss.str(), path);
}

RunConfig apply_overrides(RunConfig config, const ConfigOverrides& overrides) {
  if (overrides.seed) config.seed = *overrides.seed;
  if (overrides.k_goals) config.k_goals = *overrides.k_goals;
  if (overrides.k_paths) config.k_paths = *overrides.k_paths;
  if (overrides.temperature) config.model.temperature = *overrides.temperature;
  if (overrides.waypoint_frames) config.model.waypoint_frames = *overrides.waypoint_frames;
  if (overrides.use_ttst) config.use_ttst = *overrides.use_ttst;
  if (overrides.use_cws) config.use_cws = *overrides.use_cws;
  if (overrides.epochs) config.epochs = *overrides.epochs;
  config.validate();
  return config;
}

}  // namespace ynet
