// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uodet/supervision.hpp"

namespace uodet {

/// The instance presence score predictor: one linear layer squashed by a
/// logistic, mapping a query embedding to a score in (0, 1).
struct IppModel {
  std::vector<double> weights;
  double bias = 0.0;

  std::size_t dim() const noexcept { return weights.size(); }
};

/// logistic(w . e + b), clamped to the open interval (0, 1) so saturated
/// pre-activations never round to the endpoints. Throws
/// std::invalid_argument on a length mismatch.
double forward(const IppModel& model, std::span<const double> embedding);

/// One IPP training sample: embedding with the matched pair's GIoU and
/// the joint supervision target P_o. The effective regression target is
/// P_o on the high branch (giou > tau) and C on the low branch.
struct IppSample {
  std::vector<double> embedding;
  double giou_val = 0.0;
  double target = 0.0;
};

/// The branch-resolved regression target of a sample.
double branch_target(const IppSample& sample,
                     const SupervisionConfig& cfg) noexcept;

/// |branch target - forward(model, embedding)|.
double sample_loss(const IppModel& model, const IppSample& sample,
                   const SupervisionConfig& cfg);

struct IppGradient {
  std::vector<double> weights;
  double bias = 0.0;
};

/// Analytic gradient of the per-sample L1 loss: with I the forward output
/// and t the branch target, d/dw = sign(I - t) * I * (1 - I) * e and
/// d/db = sign(I - t) * I * (1 - I), with sign(0) = 0.
IppGradient gradient(const IppModel& model, std::span<const double> embedding,
                     double giou_val, double target,
                     const SupervisionConfig& cfg);

struct TrainerConfig {
  double learning_rate = 0.05;
  std::size_t steps = 2000;     // mini-batch gradient steps
  std::size_t batch_size = 32;
  std::uint64_t seed = 1;
  double init_scale = 0.01;     // uniform init in [-init_scale, init_scale]

  void validate() const;
};

struct TrainResult {
  IppModel model;
  std::vector<double> loss_trace;  // mean dataset loss per completed epoch
};

/// Mini-batch gradient descent on the branch L1 loss. Deterministic given
/// the seed. Throws std::invalid_argument for an empty dataset or
/// inconsistent embedding lengths and std::runtime_error if the loss
/// stops being finite.
TrainResult train(std::span<const IppSample> dataset, const TrainerConfig& cfg,
                  const SupervisionConfig& sup);

struct GradientCheck {
  bool ok = false;
  double max_rel_error = 0.0;
};

/// Compares the analytic gradient against central finite differences
/// (step 1e-6) parameter by parameter. A coordinate passes when the
/// relative error is within tolerance or the absolute gap is below 1e-8.
GradientCheck finite_diff_check(const IppModel& model, const IppSample& sample,
                                const SupervisionConfig& cfg,
                                double tolerance);

}  // namespace uodet
