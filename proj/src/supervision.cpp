// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/supervision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uodet {
namespace {

constexpr double kFocalGamma = 2.0;
constexpr double kFocalAlpha = 0.25;

// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Focal loss of one logit against a binary target.
// -log p = softplus(-x) and -log(1 - p) = softplus(x).
double focal_term(double logit, bool positive) noexcept {
  const double p = sigmoid(logit);
  if (positive) {
    const double pt = 1.0 - p;
    return kFocalAlpha * pt * pt * softplus(-logit);
  }
  return (1.0 - kFocalAlpha) * p * p * softplus(logit);
}

}  // namespace

void SupervisionConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("supervision.alpha must be >= 0");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("supervision.beta must be >= 0");
  }
  if (std::abs(alpha + beta - 1.0) > 1e-9) {
    throw std::invalid_argument("supervision.alpha + supervision.beta must equal 1");
  }
  if (!(c_const >= 0.0 && c_const <= 1.0)) {
    throw std::invalid_argument("supervision.c_const must lie in [0, 1]");
  }
  if (!(tau > -1.0 && tau <= 1.0)) {
    throw std::invalid_argument("supervision.tau must lie in (-1, 1]");
  }
  for (const auto& [value, name] :
       {std::pair{lambda_ips, "supervision.lambda_ips"},
        std::pair{lambda_cls, "supervision.lambda_cls"},
        std::pair{lambda_box, "supervision.lambda_box"}}) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string(name) + " must be >= 0");
    }
  }
}

double positional_objectness(const BBox& gt_box,
                             const BBox& pred_box) noexcept {
  return giou(gt_box, pred_box);
}

double categorical_objectness(std::span<const double> logits) {
  if (logits.empty()) {
    throw std::invalid_argument("categorical_objectness: empty logit vector");
  }
  double sum = 0.0;
  for (double logit : logits) {
    if (!std::isfinite(logit)) {
      throw std::invalid_argument(
          "categorical_objectness: logits must be finite");
    }
    sum += sigmoid(logit);
  }
  return std::min(1.0, sum);
}

double supervision_target(double giou_val, double p_f,
                          const SupervisionConfig& cfg) noexcept {
  return cfg.alpha * giou_val + cfg.beta * p_f;
}

IpsLoss ips_loss(std::span<const IpsSample> samples,
                 const SupervisionConfig& cfg) noexcept {
  double high_sum = 0.0;
  double low_sum = 0.0;
  std::size_t high_n = 0;
  std::size_t low_n = 0;
  for (const IpsSample& s : samples) {
    if (s.giou_val > cfg.tau) {
      high_sum += std::abs(s.target - s.ips);
      ++high_n;
    } else {
      low_sum += std::abs(cfg.c_const - s.ips);
      ++low_n;
    }
  }
  IpsLoss loss;
  loss.high = high_n > 0 ? high_sum / static_cast<double>(high_n) : 0.0;
  loss.low = low_n > 0 ? low_sum / static_cast<double>(low_n) : 0.0;
  loss.total = loss.high + loss.low;
  return loss;
}

DetectionLosses detection_losses(std::span<const Detection> predictions,
                                 std::span<const GroundTruthObject> gts) {
  if (predictions.size() != gts.size()) {
    throw std::invalid_argument(
        "detection_losses: prediction/ground-truth counts differ");
  }
  DetectionLosses losses;
  if (predictions.empty()) return losses;

  const std::size_t k = predictions.front().logits.size();
  if (k == 0) {
    throw std::invalid_argument("detection_losses: predictions carry no logits");
  }

  double cls_sum = 0.0;
  double box_sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Detection& pred = predictions[i];
    const GroundTruthObject& gt = gts[i];
    if (gt.is_unknown()) {
      throw std::invalid_argument(
          "detection_losses: ground truth must carry a known class label");
    }
    if (pred.logits.size() != k) {
      throw std::invalid_argument(
          "detection_losses: inconsistent logit lengths");
    }
    const int label = *gt.label;
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw std::invalid_argument("detection_losses: class label " +
                                  std::to_string(label) +
                                  " outside the logit range");
    }
    for (std::size_t c = 0; c < k; ++c) {
      cls_sum += focal_term(pred.logits[c], static_cast<int>(c) == label);
    }
    const double l1 = std::abs(pred.box.cx - gt.box.cx) +
                      std::abs(pred.box.cy - gt.box.cy) +
                      std::abs(pred.box.w - gt.box.w) +
                      std::abs(pred.box.h - gt.box.h);
    box_sum += 5.0 * l1 + 2.0 * (1.0 - giou(pred.box, gt.box));
  }

  const double n = static_cast<double>(predictions.size());
  losses.cls = cls_sum / (n * static_cast<double>(k));
  losses.box = box_sum / n;
  return losses;
}

LossBreakdown total_loss(const IpsLoss& ips, double l_cls, double l_box,
                         const SupervisionConfig& cfg) noexcept {
  LossBreakdown out;
  out.l_ips_h = ips.high;
  out.l_ips_l = ips.low;
  out.l_ips = ips.total;
  out.l_cls = l_cls;
  out.l_box = l_box;
  out.total =
      cfg.lambda_ips * ips.total + cfg.lambda_cls * l_cls + cfg.lambda_box * l_box;
  return out;
}

}  // namespace uodet
