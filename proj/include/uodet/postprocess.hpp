// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "uodet/types.hpp"

namespace uodet {

struct PostprocessConfig {
  double nms_diou_threshold = 0.5;
  double known_cls_threshold = 0.5;
  double ips_threshold = 0.5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Greedy suppression ranked by IPS: repeatedly keep the highest-IPS
/// remaining detection and drop every remaining detection whose DIoU with
/// it exceeds the threshold. The kept list comes back in descending IPS
/// order (ties toward the earlier input index).
std::vector<Detection> ips_guided_nms(std::vector<Detection> detections,
                                      const PostprocessConfig& cfg);

/// The two-threshold verdict on one detection. With p* the highest
/// per-class sigmoid probability: Known(argmax) when p* and the IPS both
/// clear their thresholds, Unknown when only the IPS does, background
/// (nullopt) otherwise. Throws std::invalid_argument when the detection
/// carries no logits.
std::optional<FinalPrediction> dual_criteria(const Detection& detection,
                                             const PostprocessConfig& cfg);

/// ips_guided_nms followed by dual_criteria per survivor; background
/// verdicts are dropped.
std::vector<FinalPrediction> postprocess(std::vector<Detection> detections,
                                         const PostprocessConfig& cfg);

}  // namespace uodet
