#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gradcheck.hpp"
#include "ynet/adam.hpp"
#include "ynet/checkpoint.hpp"
#include "ynet/ops.hpp"
#include "ynet/tensor.hpp"

using namespace ynet;

namespace {

Tensor<double> tensor3(int c, int h, int w, const std::vector<double>& v) {
  return Tensor<double>::from({c, h, w}, v);
}

}  // namespace

TEST_CASE("conv2d with a 1x1 identity kernel reproduces the input") {
  Rng rng(7);
  Tensor<double> x({3, 5, 4});
  oracle::fill_uniform(x, rng);
  Tensor<double> w = Tensor<double>::full({3, 3, 1, 1}, 0.0);
  for (int c = 0; c < 3; ++c) w.values()[c * 3 + c] = 1.0;
  Tensor<double> b({3});
  const Tensor<double> y = conv2d(x, w, b, 0);
  REQUIRE(y.shape() == x.shape());
  CHECK((y.values() == x.values()).all());
}

TEST_CASE("conv2d 2x2 all-ones kernel sums the window") {
  const Tensor<double> x = tensor3(1, 2, 2, {1, 2, 3, 4});
  const Tensor<double> w = Tensor<double>::full({1, 1, 2, 2}, 1.0);
  Tensor<double> b({1});
  const Tensor<double> y = conv2d(x, w, b, 0);
  REQUIRE(y.shape() == Shape{1, 1, 1});
  CHECK(y.values()[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("conv2d rejects mismatched channel counts naming both shapes") {
  Tensor<double> x({2, 4, 4});
  Tensor<double> w({1, 3, 3, 3});
  Tensor<double> b({1});
  CHECK_THROWS_WITH_AS(conv2d(x, w, b, 1),
                       doctest::Contains("[2x4x4]"), std::invalid_argument);
}

TEST_CASE("conv2d gradients match finite differences") {
  Rng rng(11);
  Tensor<double> x({2, 6, 5});
  Tensor<double> w({3, 2, 3, 3});
  Tensor<double> b({3});
  oracle::fill_uniform(x, rng);
  oracle::fill_uniform(w, rng);
  oracle::fill_uniform(b, rng);
  auto forward = [&](Tape<double>* tape) { return conv2d(x, w, b, 1, tape); };
  CHECK(oracle::max_grad_error(w, forward, 101) < 1e-4);
  CHECK(oracle::max_grad_error(x, forward, 102) < 1e-4);
  CHECK(oracle::max_grad_error(b, forward, 103) < 1e-4);
}

TEST_CASE("maxpool2 of a constant map is the constant at half resolution") {
  const Tensor<double> x = Tensor<double>::full({2, 6, 4}, 3.25);
  const Tensor<double> y = maxpool2(x);
  REQUIRE(y.shape() == Shape{2, 3, 2});
  CHECK((y.values() == 3.25).all());
}

TEST_CASE("maxpool2 picks the window maximum") {
  const Tensor<double> y = maxpool2(tensor3(1, 2, 2, {1, 2, 3, 4}));
  REQUIRE(y.size() == 1);
  CHECK(y.values()[0] == 4.0);
}

TEST_CASE("maxpool2 routes tie gradients to the first row-major position") {
  Tensor<double> x = tensor3(1, 2, 2, {5, 5, 5, 5});
  x.ensure_grad();
  Tape<double> tape;
  Tensor<double> y = maxpool2(x, &tape);
  CHECK(y.values()[0] == 5.0);
  y.grad()[0] = 1.0;
  tape.backward();
  CHECK(x.grad()[0] == 1.0);
  CHECK(x.grad()[1] == 0.0);
  CHECK(x.grad()[2] == 0.0);
  CHECK(x.grad()[3] == 0.0);
}

TEST_CASE("maxpool2 rejects odd spatial extents") {
  Tensor<double> x({1, 3, 4});
  CHECK_THROWS_AS(maxpool2(x), std::invalid_argument);
}

TEST_CASE("bilinear_upsample2 keeps constants and clamps single samples") {
  const Tensor<double> c = Tensor<double>::full({2, 3, 5}, -0.75);
  const Tensor<double> y = bilinear_upsample2(c);
  REQUIRE(y.shape() == Shape{2, 6, 10});
  CHECK((y.values() == -0.75).all());

  const Tensor<double> one = tensor3(1, 1, 1, {2.5});
  const Tensor<double> up = bilinear_upsample2(one);
  REQUIRE(up.shape() == Shape{1, 2, 2});
  CHECK((up.values() == 2.5).all());
}

TEST_CASE("bilinear_upsample2 follows the half-pixel-center formula") {
  const Tensor<double> x = tensor3(1, 1, 2, {0.0, 1.0});
  const Tensor<double> y = bilinear_upsample2(x);
  REQUIRE(y.shape() == Shape{1, 2, 4});
  for (int row = 0; row < 2; ++row) {
    CHECK(y.at(0, row, 0) == doctest::Approx(0.0));
    CHECK(y.at(0, row, 1) == doctest::Approx(0.25));
    CHECK(y.at(0, row, 2) == doctest::Approx(0.75));
    CHECK(y.at(0, row, 3) == doctest::Approx(1.0));
  }
}

TEST_CASE("concat_channels stacks channels and rejects spatial mismatch") {
  Tensor<double> a({2, 4, 4});
  Tensor<double> b({3, 4, 4});
  const Tensor<double> y = concat_channels(a, b);
  CHECK(y.shape() == Shape{5, 4, 4});

  Tensor<double> c({1, 3, 4});
  CHECK_THROWS_AS(concat_channels(a, c), std::invalid_argument);
}

TEST_CASE("concat_channels with an empty tensor is the identity") {
  Rng rng(3);
  Tensor<double> a({2, 3, 3});
  oracle::fill_uniform(a, rng);
  const Tensor<double> y = concat_channels(a, Tensor<double>());
  CHECK(y.same_storage(a));
}

TEST_CASE("concat_channels backward splits the gradient exactly") {
  Tensor<double> a({2, 2, 2});
  Tensor<double> b({1, 2, 2});
  a.ensure_grad();
  Tape<double> tape;
  Tensor<double> y = concat_channels(a, b, &tape);
  y.grad().setOnes();
  tape.backward();
  CHECK((a.grad() == 1.0).all());
}

TEST_CASE("sigmoid values and gradient") {
  const Tensor<double> zero = tensor3(1, 1, 1, {0.0});
  CHECK(sigmoid(zero).values()[0] == doctest::Approx(0.5));

  const Tensor<double> big = tensor3(1, 1, 1, {250.0});
  const double v = sigmoid(big).values()[0];
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  Tensor<double> x = tensor3(1, 1, 1, {0.0});
  x.ensure_grad();
  Tape<double> tape;
  Tensor<double> y = sigmoid(x, &tape);
  y.grad()[0] = 1.0;
  tape.backward();
  CHECK(x.grad()[0] == doctest::Approx(0.25));

  Rng rng(5);
  Tensor<double> r({2, 4, 3});
  oracle::fill_uniform(r, rng, -3.0, 3.0);
  CHECK(oracle::max_grad_error(r, [&](Tape<double>* t) { return sigmoid(r, t); }, 104) < 1e-4);
}

TEST_CASE("bce_loss analytic values") {
  const Tensor<double> half = Tensor<double>::full({1, 3, 3}, 0.5);
  CHECK(bce_loss(half, half).values()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  const double eps = kBceClamp;
  Tensor<double> tiny({1, 2, 2});
  tiny.values() << eps, 1.0 - eps, eps, 1.0 - eps;
  CHECK(bce_loss(tiny, tiny).values()[0] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("bce_loss matches a scalar-loop oracle on a random 3x3 case") {
  Rng rng(17);
  Tensor<double> p({1, 3, 3});
  Tensor<double> t({1, 3, 3});
  oracle::fill_uniform(p, rng, 0.05, 0.95);
  oracle::fill_uniform(t, rng, 0.0, 1.0);
  double expect = 0.0;
  for (int i = 0; i < 9; ++i) {
    expect -= t.values()[i] * std::log(p.values()[i]) +
              (1.0 - t.values()[i]) * std::log(1.0 - p.values()[i]);
  }
  expect /= 9.0;
  CHECK(bce_loss(p, t).values()[0] == doctest::Approx(expect).epsilon(1e-6));
  CHECK_THROWS_AS(bce_loss(p, Tensor<double>({1, 2, 2})), std::invalid_argument);
}

TEST_CASE("adam leaves parameters untouched under zero gradients") {
  Parameter<double> p("p", {4});
  p.value.values() << 1, 2, 3, 4;
  const auto before = p.value.values();
  std::vector<Parameter<double>*> ps{&p};
  adam_step(ps, AdamConfig{});
  CHECK((p.value.values() == before).all());
  CHECK(p.step == 1);
}

TEST_CASE("adam first step moves a unit-gradient scalar by about lr") {
  Parameter<double> p("p", {1});
  p.value.grad()[0] = 1.0;
  std::vector<Parameter<double>*> ps{&p};
  AdamConfig cfg;
  cfg.lr = 1e-3;
  adam_step(ps, cfg);
  // First-step closed form: m_hat = v_hat = 1, so the move is lr/(1 + eps).
  CHECK(std::abs(p.value.values()[0] + cfg.lr) < 1e-9);
}

TEST_CASE("adam rejects a parameter without gradients") {
  Parameter<double> p("p", {2});
  p.value = Tensor<double>({2});  // fresh tensor, no grad buffer
  std::vector<Parameter<double>*> ps{&p};
  CHECK_THROWS_AS(adam_step(ps, AdamConfig{}), std::invalid_argument);
}

TEST_CASE("two identical adam runs are bit-identical after 10 steps") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    Parameter<double> p("p", {8});
    oracle::fill_uniform(p.value, rng);
    std::vector<Parameter<double>*> ps{&p};
    for (int s = 0; s < 10; ++s) {
      for (int i = 0; i < 8; ++i) p.value.grad()[i] = rng.uniform(-1, 1);
      adam_step(ps, AdamConfig{});
      p.value.zero_grad();
    }
    return p.value.values();
  };
  const auto a = run(42);
  const auto b = run(42);
  CHECK((a == b).all());
}

TEST_CASE("every differentiable op passes 100 randomized gradient checks") {
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + static_cast<std::uint64_t>(trial));

    Tensor<double> x({2, 8, 8});
    Tensor<double> w({4, 2, 3, 3});
    Tensor<double> b({4});
    oracle::fill_uniform(x, rng);
    oracle::fill_uniform(w, rng);
    oracle::fill_uniform(b, rng);
    auto conv_fwd = [&](Tape<double>* t) { return conv2d(x, w, b, 1, t); };
    CHECK(oracle::max_grad_error(x, conv_fwd, 9000 + trial) < 1e-4);

    Tensor<double> mp({2, 6, 6});
    oracle::fill_separated(mp, rng);
    CHECK(oracle::max_grad_error(mp, [&](Tape<double>* t) { return maxpool2(mp, t); },
                                 9100 + trial) < 1e-4);

    Tensor<double> up({3, 4, 5});
    oracle::fill_uniform(up, rng);
    CHECK(oracle::max_grad_error(up, [&](Tape<double>* t) { return bilinear_upsample2(up, t); },
                                 9200 + trial) < 1e-4);

    Tensor<double> sg({2, 5, 4});
    oracle::fill_uniform(sg, rng, -3, 3);
    CHECK(oracle::max_grad_error(sg, [&](Tape<double>* t) { return sigmoid(sg, t); },
                                 9300 + trial) < 1e-4);

    Tensor<double> rl({2, 5, 4});
    oracle::fill_separated(rl, rng, 0.05, 1.0);
    for (int i = 0; i < rl.size(); ++i) {
      if (rng.uniform() < 0.5) rl.values()[i] = -rl.values()[i];
    }
    CHECK(oracle::max_grad_error(rl, [&](Tape<double>* t) { return relu(rl, t); },
                                 9400 + trial) < 1e-4);

    Tensor<double> ca({2, 4, 4});
    Tensor<double> cb({3, 4, 4});
    oracle::fill_uniform(ca, rng);
    oracle::fill_uniform(cb, rng);
    CHECK(oracle::max_grad_error(ca, [&](Tape<double>* t) { return concat_channels(ca, cb, t); },
                                 9500 + trial) < 1e-4);

    Tensor<double> pr({1, 4, 4});
    Tensor<double> tg({1, 4, 4});
    oracle::fill_uniform(pr, rng, 0.05, 0.95);
    oracle::fill_uniform(tg, rng, 0.0, 1.0);
    CHECK(oracle::max_grad_error(pr, [&](Tape<double>* t) { return bce_loss(pr, tg, t); },
                                 9600 + trial) < 1e-4);

    Tensor<double> av({2, 4, 6});
    oracle::fill_uniform(av, rng);
    CHECK(oracle::max_grad_error(av, [&](Tape<double>* t) { return avgpool2(av, t); },
                                 9700 + trial) < 1e-4);

    Tensor<double> sl({4, 3, 3});
    oracle::fill_uniform(sl, rng);
    CHECK(oracle::max_grad_error(sl, [&](Tape<double>* t) { return slice_channels(sl, 1, 2, t); },
                                 9800 + trial) < 1e-4);
  }
}

TEST_CASE("maxpool2 of an upsampled constant map recovers the constant") {
  const Tensor<double> c = Tensor<double>::full({1, 4, 4}, 0.625);
  const Tensor<double> y = maxpool2(bilinear_upsample2(c));
  REQUIRE(y.shape() == Shape{1, 4, 4});
  CHECK((y.values() == 0.625).all());
}

TEST_CASE("bce_loss is minimized at predicted == target") {
  // Gradient sign check on both sides of the target value.
  const double t = 0.37;
  Tensor<double> target = Tensor<double>::full({1, 2, 2}, t);
  for (double offset : {-0.2, -0.05, 0.05, 0.2}) {
    Tensor<double> p = Tensor<double>::full({1, 2, 2}, t + offset);
    p.ensure_grad();
    Tape<double> tape;
    Tensor<double> loss = bce_loss(p, target, &tape);
    loss.grad()[0] = 1.0;
    tape.backward();
    if (offset < 0) {
      CHECK(p.grad()[0] < 0.0);
    } else {
      CHECK(p.grad()[0] > 0.0);
    }
  }
}

TEST_CASE("forward ops are pure: identical inputs give bit-identical outputs") {
  Rng rng(77);
  Tensor<double> x({3, 6, 6});
  Tensor<double> w({2, 3, 3, 3});
  Tensor<double> b({2});
  oracle::fill_uniform(x, rng);
  oracle::fill_uniform(w, rng);
  oracle::fill_uniform(b, rng);
  CHECK((conv2d(x, w, b, 1).values() == conv2d(x, w, b, 1).values()).all());
  CHECK((maxpool2(x).values() == maxpool2(x).values()).all());
  CHECK((bilinear_upsample2(x).values() == bilinear_upsample2(x).values()).all());
  CHECK((sigmoid(x).values() == sigmoid(x).values()).all());
}

TEST_CASE("checkpoints round-trip parameters and optimizer state") {
  Rng rng(123);
  Parameter<float> a("enc.b0.c0.w", {2, 3, 3, 3});
  Parameter<float> b("enc.b0.c0.b", {2});
  for (int i = 0; i < a.value.size(); ++i) a.value.values()[i] = static_cast<float>(rng.uniform(-1, 1));
  for (int i = 0; i < b.value.size(); ++i) b.value.values()[i] = static_cast<float>(rng.uniform(-1, 1));
  a.moment1.setConstant(0.25f);
  a.moment2.setConstant(0.125f);
  a.step = 7;
  std::vector<Parameter<float>*> ps{&a, &b};

  const auto path = std::filesystem::temp_directory_path() / "ynet_ckpt_test.bin";
  save_checkpoint(path.string(), ps);

  Parameter<float> a2("enc.b0.c0.w", {2, 3, 3, 3});
  Parameter<float> b2("enc.b0.c0.b", {2});
  std::vector<Parameter<float>*> qs{&a2, &b2};
  load_checkpoint(path.string(), qs);
  CHECK((a2.value.values() == a.value.values()).all());
  CHECK((b2.value.values() == b.value.values()).all());
  CHECK((a2.moment1 == a.moment1).all());
  CHECK(a2.step == 7);

  Parameter<float> wrong("enc.b0.c0.w", {2, 3, 2, 2});
  Parameter<float> b3("enc.b0.c0.b", {2});
  std::vector<Parameter<float>*> rs{&wrong, &b3};
  CHECK_THROWS_AS(load_checkpoint(path.string(), rs), DataError);
  std::filesystem::remove(path);
}
