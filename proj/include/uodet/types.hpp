// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "uodet/geometry.hpp"

namespace uodet {

/// Numerically stable logistic. The single per-class probability
/// convention used everywhere: class confidences are sigmoids of logits.
inline double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// One detector output triple: predicted box, per-class logits, instance
/// presence score.
struct Detection {
  BBox box;
  std::vector<double> logits;
  double ips = 0.5;
};

/// Labeled ground-truth object. An empty label marks the distinguished
/// unknown class; known labels are class indices in [0, K).
struct GroundTruthObject {
  BBox box;
  std::optional<int> label;

  bool is_unknown() const noexcept { return !label.has_value(); }
};

enum class Verdict { kKnown, kUnknown };

/// Post-processed detection: a known class with its probability, or an
/// unknown-object call whose confidence is the IPS.
struct FinalPrediction {
  BBox box;
  Verdict verdict = Verdict::kUnknown;
  int class_index = -1;  // valid only when verdict == kKnown
  double confidence = 0.0;
};

}  // namespace uodet
