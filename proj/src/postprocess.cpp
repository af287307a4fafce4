// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace uodet {

void PostprocessConfig::validate() const {
  if (!(nms_diou_threshold >= -1.0 && nms_diou_threshold <= 1.0)) {
    throw std::invalid_argument(
        "postprocess.nms_diou_threshold must lie in [-1, 1]");
  }
  if (!(known_cls_threshold >= 0.0 && known_cls_threshold <= 1.0)) {
    throw std::invalid_argument(
        "postprocess.known_cls_threshold must lie in [0, 1]");
  }
  if (!(ips_threshold >= 0.0 && ips_threshold <= 1.0)) {
    throw std::invalid_argument("postprocess.ips_threshold must lie in [0, 1]");
  }
}

std::vector<Detection> ips_guided_nms(std::vector<Detection> detections,
                                      const PostprocessConfig& cfg) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (detections[a].ips != detections[b].ips) {
      return detections[a].ips > detections[b].ips;
    }
    return a < b;
  });

  std::vector<bool> suppressed(detections.size(), false);
  std::vector<Detection> kept;
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (suppressed[i]) continue;
    for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
      const std::size_t j = order[oj];
      if (suppressed[j]) continue;
      if (diou(detections[i].box, detections[j].box) > cfg.nms_diou_threshold) {
        suppressed[j] = true;
      }
    }
    kept.push_back(std::move(detections[i]));
  }
  return kept;
}

std::optional<FinalPrediction> dual_criteria(const Detection& detection,
                                             const PostprocessConfig& cfg) {
  if (detection.logits.empty()) {
    throw std::invalid_argument("dual_criteria: detection carries no logits");
  }
  std::size_t argmax = 0;
  double best = -1.0;
  for (std::size_t k = 0; k < detection.logits.size(); ++k) {
    const double p = sigmoid(detection.logits[k]);
    if (p > best) {
      best = p;
      argmax = k;
    }
  }

  if (detection.ips < cfg.ips_threshold) return std::nullopt;
  if (best >= cfg.known_cls_threshold) {
    return FinalPrediction{detection.box, Verdict::kKnown,
                           static_cast<int>(argmax), best};
  }
  return FinalPrediction{detection.box, Verdict::kUnknown, -1, detection.ips};
}

std::vector<FinalPrediction> postprocess(std::vector<Detection> detections,
                                         const PostprocessConfig& cfg) {
  const std::vector<Detection> kept = ips_guided_nms(std::move(detections), cfg);
  std::vector<FinalPrediction> predictions;
  predictions.reserve(kept.size());
  for (const Detection& det : kept) {
    if (auto verdict = dual_criteria(det, cfg)) {
      predictions.push_back(*verdict);
    }
  }
  return predictions;
}

}  // namespace uodet
