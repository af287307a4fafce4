// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "uodet/types.hpp"

namespace uodet {

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
};

/// One scored detection's match flag, kept with its confidence so flags
/// from many scenes can be merged and re-ranked globally.
struct RankedFlag {
  double confidence = 0.0;
  bool tp = false;
};

struct MatchOutcome {
  ClassCounts unknown;
  std::map<int, ClassCounts> known;  // keyed by class index
  std::vector<RankedFlag> unknown_flags;
  std::map<int, std::vector<RankedFlag>> known_flags;

  /// Adds counts and concatenates flags; callers re-rank via
  /// average_precision.
  void merge(const MatchOutcome& other);
};

/// Greedy benchmark matching of one scene at a fixed IoU threshold.
/// Within each category (each known class plus Unknown as its own
/// category) predictions are visited in descending confidence; a
/// prediction is a TP when it reaches IoU >= threshold with a still
/// unmatched ground truth of the same category (the highest-IoU one),
/// otherwise an FP. Unmatched ground truths are FNs. Cross-category
/// overlaps never match.
MatchOutcome match_to_gt(std::span<const FinalPrediction> predictions,
                         std::span<const GroundTruthObject> gts,
                         double iou_threshold);

/// TP / (TP + FP); 0 when the denominator is 0.
double u_precision(const MatchOutcome& outcome);
/// TP / (TP + FN); 0 when the denominator is 0.
double u_recall(const MatchOutcome& outcome);
/// Harmonic mean of precision and recall; 0 when their sum is 0.
double u_f1(const MatchOutcome& outcome);

/// Area under the precision-recall curve with all-points precision
/// envelope interpolation. Flags are ranked by descending confidence
/// internally; total_positives is TP + FN for the category. Returns 0
/// when there are no positives.
double average_precision(std::vector<RankedFlag> flags,
                         std::int64_t total_positives);

/// Raw (recall, precision) points of the ranked detection list, one per
/// rank.
std::vector<std::pair<double, double>> pr_curve(std::vector<RankedFlag> flags,
                                                std::int64_t total_positives);

/// Mean AP of the known classes averaged over IoU thresholds
/// 0.50, 0.55, ..., 0.95. Classes are those with at least one known
/// ground truth in the dataset; 0 when there are none.
double map_over_thresholds(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts);

struct EvalConfig {
  double iou_threshold = 0.5;  // used by every metric except mAP's sweep

  void validate() const;
};

struct EvalReport {
  double u_ap = 0.0;
  double u_pre = 0.0;
  double u_rec = 0.0;
  double u_f1 = 0.0;
  double map_known = 0.0;
  ClassCounts unknown;
  std::map<int, ClassCounts> known;
};

/// Aggregates matches across scenes and computes the full report. Throws
/// std::invalid_argument when the per-scene lists disagree in length.
EvalReport evaluate_dataset(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts,
    const EvalConfig& cfg = {});

/// Globally ranked unknown-class PR points at the report's IoU threshold;
/// this is what the PR-curve artifact file contains.
std::vector<std::pair<double, double>> unknown_pr_points(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts,
    const EvalConfig& cfg = {});

}  // namespace uodet
