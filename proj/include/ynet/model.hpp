#pragma once

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "ynet/errors.hpp"
#include "ynet/ops.hpp"
#include "ynet/rng.hpp"
#include "ynet/tensor.hpp"

namespace ynet {

/// Architecture and sampling-head knobs. Encoder/decoder channel lists must
/// have equal length; spatial extents must divide 2^(number of blocks).
struct ModelConfig {
  int past_frames = 8;      // n_p
  int future_frames = 12;   // n_f
  int semantic_classes = 2; // N_c
  std::vector<int> waypoint_frames;  // absolute indices, strictly inside (n_p, n_p + n_f)
  std::vector<int> encoder_channels{32, 32, 64, 64, 64};
  std::vector<int> decoder_channels{64, 64, 64, 32, 32};
  int center_channels = 128;
  double temperature = 1.0;

  int waypoint_count() const { return static_cast<int>(waypoint_frames.size()); }
  int input_channels() const { return semantic_classes + past_frames; }
  int block_count() const { return static_cast<int>(encoder_channels.size()); }
  int spatial_divisor() const { return 1 << block_count(); }

  void validate() const {
    if (past_frames < 1 || future_frames < 1 || semantic_classes < 1) {
      throw ConfigError("frame counts and class count must be positive");
    }
    if (encoder_channels.empty() || encoder_channels.size() != decoder_channels.size()) {
      throw ConfigError("decoder channel list must mirror the encoder's length");
    }
    for (int c : encoder_channels)
      if (c < 1) throw ConfigError("encoder channels must be positive");
    for (int c : decoder_channels)
      if (c < 1) throw ConfigError("decoder channels must be positive");
    if (center_channels < 2) throw ConfigError("center channels must be at least 2");
    int prev = past_frames;
    for (int w : waypoint_frames) {
      if (w <= prev || w >= past_frames + future_frames) {
        throw ConfigError("waypoint frames must be strictly increasing inside (n_p, n_p + n_f)");
      }
      prev = w;
    }
    if (temperature <= 0.0) throw ConfigError("temperature must be positive");
  }
};

/// Encoder features: one pre-pool tensor per block (full resolution first,
/// halving each level) plus the deepest map after the final pooling.
template <typename Scalar>
struct FeaturePyramid {
  std::vector<Tensor<Scalar>> levels;  // size = block_count + 1

  const Tensor<Scalar>& deepest() const { return levels.back(); }
};

enum class RunMode { kTrain, kInfer };

template <typename Scalar>
struct GoalMaps {
  Tensor<Scalar> waypoints_goal;  // N_w + 1 channels: waypoints earliest-first, then the goal
  Tensor<Scalar> auxiliary;       // train mode only: one map per future step
};

/// The three sub-networks: a pooling conv encoder and two mirrored expansion
/// decoders sharing its skip features, the second one conditioned on
/// goal/waypoint heatmaps at every resolution.
template <typename Scalar>
class YNet {
 public:
  YNet(ModelConfig config, std::uint64_t seed) : cfg_(std::move(config)) {
    cfg_.validate();
    Rng rng(seed);
    build_encoder(rng);
    const int head_goal = cfg_.waypoint_count() + 1 + cfg_.future_frames;
    build_decoder(goal_, "goal", 0, head_goal, rng);
    build_decoder(traj_, "traj", cfg_.waypoint_count() + 1, cfg_.future_frames, rng);
  }

  // Parameters are referenced by stable pointers into params_; moving keeps
  // them valid, copying would not.
  YNet(const YNet&) = delete;
  YNet& operator=(const YNet&) = delete;
  YNet(YNet&&) = default;
  YNet& operator=(YNet&&) = default;

  const ModelConfig& config() const { return cfg_; }

  std::vector<Parameter<Scalar>*> parameters() {
    std::vector<Parameter<Scalar>*> out;
    for (auto& p : params_) out.push_back(&p);
    return out;
  }
  std::vector<const Parameter<Scalar>*> parameters() const {
    std::vector<const Parameter<Scalar>*> out;
    for (const auto& p : params_) out.push_back(&p);
    return out;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p.value.zero_grad();
  }

  /// Contraction arm: two 3x3 convs + ReLU per block, max pooling after each
  /// block; pre-pool features are retained as skip levels.
  FeaturePyramid<Scalar> encode(const Tensor<Scalar>& input, Tape<Scalar>* tape = nullptr) const {
    if (input.rank() != 3 || input.extent(0) != cfg_.input_channels()) {
      throw std::invalid_argument("encode: expected " + std::to_string(cfg_.input_channels()) +
                                  " input channels, got " + shape_string(input.shape()));
    }
    const int div = cfg_.spatial_divisor();
    if (input.extent(1) % div != 0 || input.extent(2) % div != 0) {
      throw std::invalid_argument("encode: spatial extents of " + shape_string(input.shape()) +
                                  " must divide " + std::to_string(div));
    }
    FeaturePyramid<Scalar> pyr;
    Tensor<Scalar> x = input;
    for (int b = 0; b < cfg_.block_count(); ++b) {
      x = relu(conv2d(x, enc_[b].c0.w->value, enc_[b].c0.b->value, 1, tape), tape);
      x = relu(conv2d(x, enc_[b].c1.w->value, enc_[b].c1.b->value, 1, tape), tape);
      pyr.levels.push_back(x);
      x = maxpool2(x, tape);
    }
    pyr.levels.push_back(x);
    return pyr;
  }

  /// Goal/waypoint arm. In train mode also emits the per-future-step
  /// auxiliary maps; in infer mode logits are divided by the temperature
  /// before the sigmoid and the auxiliary head output is dropped.
  GoalMaps<Scalar> decode_goal(const FeaturePyramid<Scalar>& pyramid, RunMode mode,
                               Tape<Scalar>* tape = nullptr) const {
    const Tensor<Scalar> logits = run_decoder(goal_, pyramid, {}, tape);
    const int n_wg = cfg_.waypoint_count() + 1;
    GoalMaps<Scalar> out;
    if (mode == RunMode::kInfer) {
      Tensor<Scalar> head = slice_channels(logits, 0, n_wg, tape);
      head = scale(head, static_cast<Scalar>(1.0 / cfg_.temperature), tape);
      out.waypoints_goal = sigmoid(head, tape);
    } else {
      const Tensor<Scalar> probs = sigmoid(logits, tape);
      out.waypoints_goal = slice_channels(probs, 0, n_wg, tape);
      out.auxiliary = slice_channels(probs, n_wg, cfg_.future_frames, tape);
    }
    return out;
  }

  /// Trajectory arm: same expansion structure, with the conditioning stack
  /// concatenated into the center block and every expansion block.
  Tensor<Scalar> decode_trajectory(const FeaturePyramid<Scalar>& pyramid,
                                   const std::vector<Tensor<Scalar>>& conditioning,
                                   Tape<Scalar>* tape = nullptr) const {
    check_conditioning(pyramid, conditioning);
    return sigmoid(run_decoder(traj_, pyramid, conditioning, tape), tape);
  }

  struct ForwardResult {
    FeaturePyramid<Scalar> pyramid;
    GoalMaps<Scalar> goal;
    Tensor<Scalar> trajectory;
  };

  ForwardResult forward(const Tensor<Scalar>& input, const std::vector<Tensor<Scalar>>& conditioning,
                        RunMode mode, Tape<Scalar>* tape = nullptr) const {
    ForwardResult r;
    r.pyramid = encode(input, tape);
    r.goal = decode_goal(r.pyramid, mode, tape);
    r.trajectory = decode_trajectory(r.pyramid, conditioning, tape);
    return r;
  }

 private:
  struct Conv {
    Parameter<Scalar>* w = nullptr;
    Parameter<Scalar>* b = nullptr;
  };
  struct EncoderBlock {
    Conv c0, c1;
  };
  struct Decoder {
    int conditioning_channels = 0;
    Conv center0, center1;
    std::vector<Conv> up;       // halves channels after each upsample
    std::vector<Conv> block0, block1;
    Conv head;                  // 1x1 projection to the output maps
  };

  Conv make_conv(const std::string& name, int c_out, int c_in, int k, Rng& rng) {
    params_.emplace_back(name + ".w", Shape{c_out, c_in, k, k});
    Parameter<Scalar>& w = params_.back();
    const double bound = 1.0 / std::sqrt(static_cast<double>(c_in * k * k));
    for (int i = 0; i < w.value.size(); ++i) {
      w.value.values()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
    }
    params_.emplace_back(name + ".b", Shape{c_out});
    return Conv{&w, &params_.back()};
  }

  void build_encoder(Rng& rng) {
    int c_in = cfg_.input_channels();
    for (int b = 0; b < cfg_.block_count(); ++b) {
      const int c = cfg_.encoder_channels[static_cast<std::size_t>(b)];
      EncoderBlock blk;
      blk.c0 = make_conv("enc.b" + std::to_string(b) + ".c0", c, c_in, 3, rng);
      blk.c1 = make_conv("enc.b" + std::to_string(b) + ".c1", c, c, 3, rng);
      enc_.push_back(blk);
      c_in = c;
    }
  }

  void build_decoder(Decoder& dec, const std::string& prefix, int conditioning_channels,
                     int head_channels, Rng& rng) {
    dec.conditioning_channels = conditioning_channels;
    const int n = cfg_.block_count();
    const int deep = cfg_.encoder_channels.back();
    dec.center0 = make_conv(prefix + ".center.c0", cfg_.center_channels,
                            deep + conditioning_channels, 3, rng);
    dec.center1 =
        make_conv(prefix + ".center.c1", cfg_.center_channels, cfg_.center_channels, 3, rng);
    int c_prev = cfg_.center_channels;
    for (int i = 0; i < n; ++i) {
      const int up_out = std::max(1, c_prev / 2);
      const int skip = cfg_.encoder_channels[static_cast<std::size_t>(n - 1 - i)];
      const int c = cfg_.decoder_channels[static_cast<std::size_t>(i)];
      const std::string base = prefix + ".b" + std::to_string(i);
      dec.up.push_back(make_conv(prefix + ".up" + std::to_string(i), up_out, c_prev, 3, rng));
      dec.block0.push_back(make_conv(base + ".c0", c, up_out + skip + conditioning_channels, 3, rng));
      dec.block1.push_back(make_conv(base + ".c1", c, c, 3, rng));
      c_prev = c;
    }
    dec.head = make_conv(prefix + ".head", head_channels, c_prev, 1, rng);
  }

  void check_conditioning(const FeaturePyramid<Scalar>& pyramid,
                          const std::vector<Tensor<Scalar>>& conditioning) const {
    const int n = cfg_.block_count();
    if (static_cast<int>(conditioning.size()) != n + 1) {
      throw std::invalid_argument("decode_trajectory: expected conditioning at " +
                                  std::to_string(n + 1) + " resolutions, got " +
                                  std::to_string(conditioning.size()));
    }
    for (int k = 0; k <= n; ++k) {
      const auto& c = conditioning[static_cast<std::size_t>(k)];
      const auto& l = pyramid.levels[static_cast<std::size_t>(k)];
      if (!c.valid() || c.extent(0) != cfg_.waypoint_count() + 1 || c.extent(1) != l.extent(1) ||
          c.extent(2) != l.extent(2)) {
        throw std::invalid_argument("decode_trajectory: conditioning level " + std::to_string(k) +
                                    " missing or mismatched");
      }
    }
  }

  /// Center block, then per expansion block: bilinear upsample, channel-halving
  /// conv, concat with the matching skip (and conditioning), two convs + ReLU.
  Tensor<Scalar> run_decoder(const Decoder& dec, const FeaturePyramid<Scalar>& pyramid,
                             const std::vector<Tensor<Scalar>>& conditioning,
                             Tape<Scalar>* tape) const {
    const int n = cfg_.block_count();
    if (static_cast<int>(pyramid.levels.size()) != n + 1) {
      throw std::invalid_argument("decoder: pyramid does not match the configured block count");
    }
    const bool cond = dec.conditioning_channels > 0;
    Tensor<Scalar> x = pyramid.deepest();
    if (cond) x = concat_channels(x, conditioning[static_cast<std::size_t>(n)], tape);
    x = relu(conv2d(x, dec.center0.w->value, dec.center0.b->value, 1, tape), tape);
    x = relu(conv2d(x, dec.center1.w->value, dec.center1.b->value, 1, tape), tape);
    for (int i = 0; i < n; ++i) {
      x = bilinear_upsample2(x, tape);
      x = conv2d(x, dec.up[i].w->value, dec.up[i].b->value, 1, tape);
      std::vector<Tensor<Scalar>> parts{x, pyramid.levels[static_cast<std::size_t>(n - 1 - i)]};
      if (cond) parts.push_back(conditioning[static_cast<std::size_t>(n - 1 - i)]);
      x = concat_channels(parts, tape);
      x = relu(conv2d(x, dec.block0[i].w->value, dec.block0[i].b->value, 1, tape), tape);
      x = relu(conv2d(x, dec.block1[i].w->value, dec.block1[i].b->value, 1, tape), tape);
    }
    return conv2d(x, dec.head.w->value, dec.head.b->value, 0, tape);
  }

  ModelConfig cfg_;
  std::deque<Parameter<Scalar>> params_;
  std::vector<EncoderBlock> enc_;
  Decoder goal_;
  Decoder traj_;
};

}  // namespace ynet
