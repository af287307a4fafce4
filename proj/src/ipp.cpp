// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/ipp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uodet/rng.hpp"

namespace uodet {
namespace {

void check_dim(std::size_t model_dim, std::size_t embedding_dim,
               const char* op) {
  if (model_dim != embedding_dim) {
    throw std::invalid_argument(std::string(op) + ": embedding length " +
                                std::to_string(embedding_dim) +
                                " does not match model dimension " +
                                std::to_string(model_dim));
  }
}

double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

double forward(const IppModel& model, std::span<const double> embedding) {
  check_dim(model.dim(), embedding.size(), "forward");
  double z = model.bias;
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    z += model.weights[i] * embedding[i];
  }
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = 0x1.fffffffffffffp-1;  // largest double below 1
  return std::clamp(sigmoid(z), lo, hi);
}

double branch_target(const IppSample& sample,
                     const SupervisionConfig& cfg) noexcept {
  return sample.giou_val > cfg.tau ? sample.target : cfg.c_const;
}

double sample_loss(const IppModel& model, const IppSample& sample,
                   const SupervisionConfig& cfg) {
  return std::abs(branch_target(sample, cfg) - forward(model, sample.embedding));
}

IppGradient gradient(const IppModel& model, std::span<const double> embedding,
                     double giou_val, double target,
                     const SupervisionConfig& cfg) {
  check_dim(model.dim(), embedding.size(), "gradient");
  const double t = giou_val > cfg.tau ? target : cfg.c_const;
  const double out = forward(model, embedding);
  const double factor = sign(out - t) * out * (1.0 - out);
  IppGradient grad;
  grad.weights.resize(embedding.size());
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    grad.weights[i] = factor * embedding[i];
  }
  grad.bias = factor;
  return grad;
}

void TrainerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("trainer.learning_rate must be > 0");
  }
  if (steps < 1) {
    throw std::invalid_argument("trainer.steps must be >= 1");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("trainer.batch_size must be >= 1");
  }
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw std::invalid_argument("trainer.init_scale must be >= 0");
  }
}

TrainResult train(std::span<const IppSample> dataset, const TrainerConfig& cfg,
                  const SupervisionConfig& sup) {
  cfg.validate();
  sup.validate();
  if (dataset.empty()) {
    throw std::invalid_argument("train: dataset is empty");
  }
  const std::size_t dim = dataset.front().embedding.size();
  if (dim == 0) {
    throw std::invalid_argument("train: zero-length embeddings");
  }
  for (const IppSample& s : dataset) {
    if (s.embedding.size() != dim) {
      throw std::invalid_argument("train: inconsistent embedding lengths");
    }
  }

  Rng rng(cfg.seed);
  IppModel model;
  model.weights.resize(dim);
  for (double& w : model.weights) {
    w = rng.uniform(-cfg.init_scale, cfg.init_scale);
  }
  model.bias = rng.uniform(-cfg.init_scale, cfg.init_scale);

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  const auto mean_loss = [&]() {
    double sum = 0.0;
    for (const IppSample& s : dataset) sum += sample_loss(model, s, sup);
    return sum / static_cast<double>(n);
  };

  TrainResult result;
  std::vector<double> grad_w(dim);
  std::size_t cursor = n;  // forces a shuffle before the first batch
  bool epoch_ended = false;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (cursor >= n) {
      rng.shuffle(order);
      cursor = 0;
    }
    const std::size_t batch_end = std::min(cursor + cfg.batch_size, n);
    const std::size_t batch_n = batch_end - cursor;

    std::fill(grad_w.begin(), grad_w.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = cursor; i < batch_end; ++i) {
      const IppSample& s = dataset[order[i]];
      const IppGradient g =
          gradient(model, s.embedding, s.giou_val, s.target, sup);
      for (std::size_t d = 0; d < dim; ++d) grad_w[d] += g.weights[d];
      grad_b += g.bias;
    }
    const double scale = cfg.learning_rate / static_cast<double>(batch_n);
    for (std::size_t d = 0; d < dim; ++d) model.weights[d] -= scale * grad_w[d];
    model.bias -= scale * grad_b;
    cursor = batch_end;

    epoch_ended = cursor >= n;
    if (epoch_ended) {
      const double loss = mean_loss();
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train: non-finite loss after step " +
                                 std::to_string(step + 1));
      }
      result.loss_trace.push_back(loss);
    }
  }
  if (!epoch_ended) {
    result.loss_trace.push_back(mean_loss());
  }

  result.model = std::move(model);
  return result;
}

GradientCheck finite_diff_check(const IppModel& model, const IppSample& sample,
                                const SupervisionConfig& cfg,
                                double tolerance) {
  constexpr double kStep = 1e-6;
  const IppGradient analytic =
      gradient(model, sample.embedding, sample.giou_val, sample.target, cfg);

  GradientCheck check;
  check.ok = true;
  IppModel probe = model;
  const std::size_t dim = model.dim();
  for (std::size_t k = 0; k <= dim; ++k) {
    double* param = k < dim ? &probe.weights[k] : &probe.bias;
    const double saved = *param;
    *param = saved + kStep;
    const double plus = sample_loss(probe, sample, cfg);
    *param = saved - kStep;
    const double minus = sample_loss(probe, sample, cfg);
    *param = saved;

    const double numeric = (plus - minus) / (2.0 * kStep);
    const double expected = k < dim ? analytic.weights[k] : analytic.bias;
    const double gap = std::abs(numeric - expected);
    const double rel =
        gap / std::max({std::abs(numeric), std::abs(expected), 1e-8});
    check.max_rel_error = std::max(check.max_rel_error, rel);
    if (rel > tolerance && gap > 1e-8) check.ok = false;
  }
  return check;
}

}  // namespace uodet
