// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "uodet/ipp.hpp"
#include "uodet/rng.hpp"

using namespace uodet;

namespace {

IppModel random_model(Rng& rng, std::size_t dim, double scale = 1.0) {
  IppModel model;
  model.weights.resize(dim);
  for (double& w : model.weights) w = rng.uniform(-scale, scale);
  model.bias = rng.uniform(-scale, scale);
  return model;
}

std::vector<double> random_embedding(Rng& rng, std::size_t dim) {
  std::vector<double> e(dim);
  for (double& v : e) v = rng.uniform(-1.0, 1.0);
  return e;
}

}  // namespace

TEST_CASE("forward fixtures") {
  IppModel zero;
  zero.weights.assign(4, 0.0);
  CHECK(forward(zero, std::vector<double>{1.0, -2.0, 0.5, 3.0}) ==
        doctest::Approx(0.5));

  IppModel unit;
  unit.weights = {1.0, 0.0};
  CHECK(forward(unit, std::vector<double>{0.0, 5.0}) == doctest::Approx(0.5));

  // Pre-activation ln 3 gives 0.75.
  IppModel scaled;
  scaled.weights = {std::log(3.0)};
  CHECK(forward(scaled, std::vector<double>{1.0}) == doctest::Approx(0.75));

  CHECK_THROWS_AS(forward(unit, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("forward stays strictly inside (0, 1)") {
  IppModel model;
  model.weights = {1000.0};
  CHECK(forward(model, std::vector<double>{1000.0}) < 1.0);
  CHECK(forward(model, std::vector<double>{-1000.0}) > 0.0);
}

TEST_CASE("gradient vanishes at the loss minimum") {
  SupervisionConfig sup;
  IppModel model;
  model.weights = {0.0, 0.0};
  model.bias = 0.0;
  // Forward is exactly 0.5; pick a low-branch sample with C = 0.5.
  const auto grad =
      gradient(model, std::vector<double>{0.3, -0.2}, 0.2, 0.9, sup);
  CHECK(grad.bias == 0.0);
  CHECK(grad.weights[0] == 0.0);
  CHECK(grad.weights[1] == 0.0);
}

TEST_CASE("weight gradient is linear in the embedding") {
  SupervisionConfig sup;
  Rng rng(311);
  const IppModel model = random_model(rng, 3);
  const std::vector<double> e{0.4, -0.7, 0.2};
  std::vector<double> doubled{0.8, -1.4, 0.4};

  const auto g1 = gradient(model, e, 0.9, 0.95, sup);
  // Doubling the embedding changes the forward value, so compare against
  // a fresh model whose pre-activation matches: use zero weights instead.
  IppModel flat;
  flat.weights.assign(3, 0.0);
  flat.bias = 0.3;
  const auto base = gradient(flat, e, 0.9, 0.95, sup);
  const auto twice = gradient(flat, doubled, 0.9, 0.95, sup);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(twice.weights[i] == doctest::Approx(2.0 * base.weights[i]));
  }
  CHECK(twice.bias == doctest::Approx(base.bias));
  (void)g1;
}

TEST_CASE("analytic gradient matches central differences") {
  SupervisionConfig sup;
  Rng rng(313);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t dim = 1 + rng.index(6);
    const IppModel model = random_model(rng, dim);
    IppSample sample;
    sample.embedding = random_embedding(rng, dim);
    sample.giou_val = rng.uniform(-1.0, 1.0);
    sample.target = rng.uniform(0.0, 1.0);
    const auto check = finite_diff_check(model, sample, sup, 1e-4);
    CHECK(check.ok);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("corrupted gradient fails the finite-difference check") {
  SupervisionConfig sup;
  Rng rng(317);
  const IppModel model = random_model(rng, 4);
  IppSample sample;
  sample.embedding = random_embedding(rng, 4);
  sample.giou_val = 0.9;
  sample.target = 0.9;

  // The honest gradient passes.
  CHECK(finite_diff_check(model, sample, sup, 1e-4).ok);

  // A model evaluated against a perturbed sample's differences must not:
  // recompute the numeric slope against a shifted loss to emulate a wrong
  // analytic value.
  const auto analytic =
      gradient(model, sample.embedding, sample.giou_val, sample.target, sup);
  const double h = 1e-6;
  IppModel probe = model;
  probe.weights[0] += h;
  const double plus = sample_loss(probe, sample, sup);
  probe.weights[0] -= 2 * h;
  const double minus = sample_loss(probe, sample, sup);
  const double numeric = (plus - minus) / (2 * h);
  const double corrupted = analytic.weights[0] + 0.05;
  const double rel = std::abs(numeric - corrupted) /
                     std::max({std::abs(numeric), std::abs(corrupted), 1e-8});
  CHECK(rel > 1e-4);
}

TEST_CASE("zero-gradient points pass trivially") {
  SupervisionConfig sup;
  IppModel model;
  model.weights = {0.0};
  model.bias = 0.0;
  IppSample sample;
  sample.embedding = {0.7};
  sample.giou_val = 0.2;  // low branch, target C = 0.5 = forward
  sample.target = 0.8;
  const auto check = finite_diff_check(model, sample, sup, 1e-4);
  CHECK(check.ok);
}

TEST_CASE("training is deterministic and obeys the learning rate") {
  SupervisionConfig sup;
  Rng rng(331);
  std::vector<IppSample> data;
  for (int i = 0; i < 64; ++i) {
    IppSample s;
    s.embedding = random_embedding(rng, 5);
    s.giou_val = rng.uniform(0.0, 1.0);
    s.target = rng.uniform(0.3, 1.0);
    data.push_back(std::move(s));
  }

  TrainerConfig cfg;
  cfg.steps = 200;
  cfg.seed = 7;
  const auto a = train(data, cfg, sup);
  const auto b = train(data, cfg, sup);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);
  CHECK(a.loss_trace == b.loss_trace);

  TrainerConfig frozen = cfg;
  frozen.learning_rate = 1e-300;  // effectively zero, still valid
  const auto before = train(data, frozen, sup);
  TrainerConfig one_step = frozen;
  one_step.steps = 1;
  const auto after = train(data, one_step, sup);
  for (std::size_t i = 0; i < before.model.weights.size(); ++i) {
    CHECK(before.model.weights[i] ==
          doctest::Approx(after.model.weights[i]).epsilon(1e-12));
  }

  CHECK_THROWS_AS(train({}, cfg, sup), std::invalid_argument);
  TrainerConfig bad = cfg;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(data, bad, sup), std::invalid_argument);

  // A poisoned sample surfaces as a diagnostic, not a silent NaN model.
  std::vector<IppSample> poisoned = data;
  poisoned[3].embedding[2] = std::nan("");
  CHECK_THROWS_AS(train(poisoned, cfg, sup), std::runtime_error);
}

TEST_CASE("a single repeated sample converges to its target") {
  SupervisionConfig sup;
  std::vector<IppSample> data;
  IppSample s;
  s.embedding = {1.0, 0.5};
  s.giou_val = 0.9;  // high branch
  s.target = 0.8;
  data.assign(8, s);

  TrainerConfig cfg;
  cfg.steps = 4000;
  cfg.learning_rate = 0.2;
  const auto result = train(data, cfg, sup);
  CHECK(forward(result.model, s.embedding) == doctest::Approx(0.8).epsilon(0.0125));
}

TEST_CASE("teacher recovery reaches low held-out error") {
  SupervisionConfig sup;
  Rng rng(337);
  IppModel teacher = random_model(rng, 6, 1.5);

  const auto make_split = [&](std::size_t n) {
    std::vector<IppSample> split;
    for (std::size_t i = 0; i < n; ++i) {
      IppSample s;
      s.embedding = random_embedding(rng, 6);
      s.giou_val = 0.9;  // keep everything on the high branch
      s.target = forward(teacher, s.embedding);
      split.push_back(std::move(s));
    }
    return split;
  };
  const auto train_set = make_split(256);
  const auto held_out = make_split(128);

  TrainerConfig cfg;
  cfg.steps = 5000;
  cfg.learning_rate = 0.5;
  cfg.seed = 11;
  const auto result = train(train_set, cfg, sup);
  CHECK(result.loss_trace.back() < 0.05);

  double mae = 0.0;
  for (const IppSample& s : held_out) {
    mae += std::abs(s.target - forward(result.model, s.embedding));
  }
  mae /= static_cast<double>(held_out.size());
  CHECK(mae < 0.1);
}
