// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "uodet/types.hpp"

namespace uodet {

/// Weights and thresholds of the joint objectness supervision and the
/// total training loss.
struct SupervisionConfig {
  double alpha = 0.6;   // weight of positional objectness (GIoU)
  double beta = 0.4;    // weight of categorical objectness (P_f)
  double c_const = 0.5; // low-branch objective constant C
  double tau = 0.6;     // GIoU branch threshold
  double lambda_ips = 3.0;
  double lambda_cls = 2.0;
  double lambda_box = 5.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Positional objectness of a matched pair: GIoU(gt, prediction).
double positional_objectness(const BBox& gt_box, const BBox& pred_box) noexcept;

/// Categorical objectness P_f = min(1, sum_k sigmoid(logit_k)). Throws
/// std::invalid_argument for an empty or non-finite logit vector.
double categorical_objectness(std::span<const double> logits);

/// Joint supervision target P_o = alpha * giou + beta * p_f.
double supervision_target(double giou_val, double p_f,
                          const SupervisionConfig& cfg) noexcept;

/// One positive sample for the IPS loss: the pair's GIoU, the joint
/// target P_o, and the predicted IPS.
struct IpsSample {
  double giou_val = 0.0;
  double target = 0.0;
  double ips = 0.0;
};

struct IpsLoss {
  double high = 0.0;   // mean |P_o - IPS| over samples with giou > tau
  double low = 0.0;    // mean |C - IPS| over samples with giou <= tau
  double total = 0.0;  // high + low
};

/// Branch each sample on giou vs tau and average within the branch; an
/// empty branch contributes 0.
IpsLoss ips_loss(std::span<const IpsSample> samples,
                 const SupervisionConfig& cfg) noexcept;

struct DetectionLosses {
  double cls = 0.0;
  double box = 0.0;
};

/// Classification and box losses over one-to-one matched pairs: mean
/// sigmoid focal loss (gamma 2, balance 0.25) against one-hot known
/// labels, and mean of 5 * L1(box params) + 2 * (1 - GIoU). Throws
/// std::invalid_argument on length mismatch, inconsistent logit sizes, or
/// an unknown-labeled ground truth.
DetectionLosses detection_losses(std::span<const Detection> predictions,
                                 std::span<const GroundTruthObject> gts);

struct LossBreakdown {
  double l_ips_h = 0.0;
  double l_ips_l = 0.0;
  double l_ips = 0.0;
  double l_cls = 0.0;
  double l_box = 0.0;
  double total = 0.0;
};

/// total = lambda_ips * l_ips + lambda_cls * l_cls + lambda_box * l_box.
LossBreakdown total_loss(const IpsLoss& ips, double l_cls, double l_box,
                         const SupervisionConfig& cfg) noexcept;

}  // namespace uodet
