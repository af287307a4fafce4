// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "uodet/geometry.hpp"

namespace uodet {
namespace {

// Internal category key: known class index, or this for Unknown.
constexpr int kUnknownCategory = -1;

int category_of(const FinalPrediction& p) {
  return p.verdict == Verdict::kKnown ? p.class_index : kUnknownCategory;
}

int category_of(const GroundTruthObject& gt) {
  return gt.is_unknown() ? kUnknownCategory : *gt.label;
}

void sort_by_confidence(std::vector<RankedFlag>& flags) {
  std::stable_sort(flags.begin(), flags.end(),
                   [](const RankedFlag& a, const RankedFlag& b) {
                     return a.confidence > b.confidence;
                   });
}

}  // namespace

void MatchOutcome::merge(const MatchOutcome& other) {
  unknown.tp += other.unknown.tp;
  unknown.fp += other.unknown.fp;
  unknown.fn += other.unknown.fn;
  for (const auto& [cls, counts] : other.known) {
    ClassCounts& mine = known[cls];
    mine.tp += counts.tp;
    mine.fp += counts.fp;
    mine.fn += counts.fn;
  }
  unknown_flags.insert(unknown_flags.end(), other.unknown_flags.begin(),
                       other.unknown_flags.end());
  for (const auto& [cls, flags] : other.known_flags) {
    auto& mine = known_flags[cls];
    mine.insert(mine.end(), flags.begin(), flags.end());
  }
}

MatchOutcome match_to_gt(std::span<const FinalPrediction> predictions,
                         std::span<const GroundTruthObject> gts,
                         double iou_threshold) {
  MatchOutcome outcome;
  // Ground-truth categories appear in the outcome even when nothing was
  // predicted for them.
  std::map<int, std::vector<std::size_t>> gts_of_category;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    gts_of_category[category_of(gts[g])].push_back(g);
  }
  for (const auto& [cat, members] : gts_of_category) {
    if (cat != kUnknownCategory) {
      outcome.known[cat];
      outcome.known_flags[cat];
    }
  }

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return predictions[a].confidence > predictions[b].confidence;
                   });

  std::vector<bool> gt_matched(gts.size(), false);
  for (std::size_t idx : order) {
    const FinalPrediction& pred = predictions[idx];
    const int cat = category_of(pred);
    std::size_t best_gt = gts.size();
    double best_iou = 0.0;
    if (auto it = gts_of_category.find(cat); it != gts_of_category.end()) {
      for (std::size_t g : it->second) {
        if (gt_matched[g]) continue;
        const double overlap = iou(pred.box, gts[g].box);
        if (overlap > best_iou) {
          best_iou = overlap;
          best_gt = g;
        }
      }
    }
    const bool is_tp = best_gt < gts.size() && best_iou >= iou_threshold;
    if (is_tp) gt_matched[best_gt] = true;

    ClassCounts& counts =
        cat == kUnknownCategory ? outcome.unknown : outcome.known[cat];
    std::vector<RankedFlag>& flags = cat == kUnknownCategory
                                         ? outcome.unknown_flags
                                         : outcome.known_flags[cat];
    (is_tp ? counts.tp : counts.fp) += 1;
    flags.push_back({pred.confidence, is_tp});
  }

  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (gt_matched[g]) continue;
    const int cat = category_of(gts[g]);
    (cat == kUnknownCategory ? outcome.unknown : outcome.known[cat]).fn += 1;
  }
  return outcome;
}

double u_precision(const MatchOutcome& outcome) {
  const std::int64_t denom = outcome.unknown.tp + outcome.unknown.fp;
  return denom > 0 ? static_cast<double>(outcome.unknown.tp) /
                         static_cast<double>(denom)
                   : 0.0;
}

double u_recall(const MatchOutcome& outcome) {
  const std::int64_t denom = outcome.unknown.tp + outcome.unknown.fn;
  return denom > 0 ? static_cast<double>(outcome.unknown.tp) /
                         static_cast<double>(denom)
                   : 0.0;
}

double u_f1(const MatchOutcome& outcome) {
  const double p = u_precision(outcome);
  const double r = u_recall(outcome);
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

double average_precision(std::vector<RankedFlag> flags,
                         std::int64_t total_positives) {
  if (total_positives <= 0) return 0.0;
  sort_by_confidence(flags);

  std::vector<double> precision(flags.size());
  std::int64_t tp = 0;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    tp += flags[k].tp ? 1 : 0;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }

  // Precision envelope from the right; each TP advances recall by 1/P.
  double envelope = 0.0;
  double ap = 0.0;
  for (std::size_t k = flags.size(); k-- > 0;) {
    envelope = std::max(envelope, precision[k]);
    if (flags[k].tp) ap += envelope;
  }
  return ap / static_cast<double>(total_positives);
}

std::vector<std::pair<double, double>> pr_curve(std::vector<RankedFlag> flags,
                                                std::int64_t total_positives) {
  sort_by_confidence(flags);
  std::vector<std::pair<double, double>> points;
  points.reserve(flags.size());
  std::int64_t tp = 0;
  for (std::size_t k = 0; k < flags.size(); ++k) {
    tp += flags[k].tp ? 1 : 0;
    const double recall =
        total_positives > 0
            ? static_cast<double>(tp) / static_cast<double>(total_positives)
            : 0.0;
    points.emplace_back(recall,
                        static_cast<double>(tp) / static_cast<double>(k + 1));
  }
  return points;
}

namespace {

std::vector<FinalPrediction> known_only(
    const std::vector<FinalPrediction>& predictions) {
  std::vector<FinalPrediction> out;
  for (const FinalPrediction& p : predictions) {
    if (p.verdict == Verdict::kKnown) out.push_back(p);
  }
  return out;
}

std::vector<GroundTruthObject> known_only(
    const std::vector<GroundTruthObject>& gts) {
  std::vector<GroundTruthObject> out;
  for (const GroundTruthObject& gt : gts) {
    if (!gt.is_unknown()) out.push_back(gt);
  }
  return out;
}

}  // namespace

double map_over_thresholds(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts) {
  if (predictions.size() != gts.size()) {
    throw std::invalid_argument(
        "map_over_thresholds: scene counts differ between predictions and "
        "ground truth");
  }

  std::vector<std::vector<FinalPrediction>> known_preds(predictions.size());
  std::vector<std::vector<GroundTruthObject>> known_gts(gts.size());
  for (std::size_t s = 0; s < gts.size(); ++s) {
    known_preds[s] = known_only(predictions[s]);
    known_gts[s] = known_only(gts[s]);
  }

  double threshold_sum = 0.0;
  for (int t = 0; t < 10; ++t) {
    const double threshold = 0.5 + 0.05 * static_cast<double>(t);
    MatchOutcome merged;
    for (std::size_t s = 0; s < gts.size(); ++s) {
      merged.merge(match_to_gt(known_preds[s], known_gts[s], threshold));
    }
    double class_sum = 0.0;
    std::size_t class_n = 0;
    for (const auto& [cls, counts] : merged.known) {
      const std::int64_t positives = counts.tp + counts.fn;
      if (positives == 0) continue;  // class never appears in ground truth
      auto it = merged.known_flags.find(cls);
      class_sum += average_precision(
          it != merged.known_flags.end() ? it->second
                                         : std::vector<RankedFlag>{},
          positives);
      ++class_n;
    }
    if (class_n > 0) threshold_sum += class_sum / static_cast<double>(class_n);
  }
  return threshold_sum / 10.0;
}

void EvalConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw std::invalid_argument("eval.iou_threshold must lie in (0, 1]");
  }
}

EvalReport evaluate_dataset(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts,
    const EvalConfig& cfg) {
  if (predictions.size() != gts.size()) {
    throw std::invalid_argument(
        "evaluate_dataset: scene counts differ between predictions (" +
        std::to_string(predictions.size()) + ") and ground truth (" +
        std::to_string(gts.size()) + ")");
  }
  cfg.validate();

  MatchOutcome merged;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    merged.merge(match_to_gt(predictions[s], gts[s], cfg.iou_threshold));
  }

  EvalReport report;
  report.u_pre = u_precision(merged);
  report.u_rec = u_recall(merged);
  report.u_f1 = u_f1(merged);
  report.u_ap =
      average_precision(merged.unknown_flags, merged.unknown.tp + merged.unknown.fn);
  report.map_known = map_over_thresholds(predictions, gts);
  report.unknown = merged.unknown;
  report.known = merged.known;
  return report;
}

std::vector<std::pair<double, double>> unknown_pr_points(
    std::span<const std::vector<FinalPrediction>> predictions,
    std::span<const std::vector<GroundTruthObject>> gts,
    const EvalConfig& cfg) {
  if (predictions.size() != gts.size()) {
    throw std::invalid_argument(
        "unknown_pr_points: scene counts differ between predictions and "
        "ground truth");
  }
  MatchOutcome merged;
  for (std::size_t s = 0; s < gts.size(); ++s) {
    merged.merge(match_to_gt(predictions[s], gts[s], cfg.iou_threshold));
  }
  return pr_curve(merged.unknown_flags, merged.unknown.tp + merged.unknown.fn);
}

}  // namespace uodet
