// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "uodet/types.hpp"

namespace uodet {

/// Dense matching-cost matrix. Rows are ground truths (G), columns are
/// predictions (N); a complete matching needs G <= N. Entries must be
/// finite.
struct CostMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major, rows * cols
  double lambda_cls = 2.0;
  double lambda_box = 5.0;

  double& at(std::size_t gt, std::size_t pred) {
    return entries[gt * cols + pred];
  }
  double at(std::size_t gt, std::size_t pred) const {
    return entries[gt * cols + pred];
  }
};

/// (ground-truth index, prediction index)
using MatchPair = std::pair<std::size_t, std::size_t>;

struct AssignmentResult {
  std::vector<MatchPair> best;        // optimal one-to-one matching
  std::vector<MatchPair> suboptimal;  // optimum over the leftover columns
  std::vector<MatchPair> positive;    // best followed by suboptimal, 2G pairs
  double best_cost = 0.0;
  double suboptimal_cost = 0.0;
};

/// lambda_cls * (-p(class)) + lambda_box * (1 - IoU(box, gt.box)), with
/// p(class) the sigmoid of the logit at the ground-truth class index.
/// Throws std::invalid_argument for an unknown-labeled ground truth or a
/// label outside the logit range.
double match_cost(const Detection& prediction, const GroundTruthObject& gt,
                  double lambda_cls, double lambda_box);

CostMatrix build_cost_matrix(std::span<const Detection> predictions,
                             std::span<const GroundTruthObject> gts,
                             double lambda_cls, double lambda_box);

/// Minimum-cost complete matching of every ground truth to a distinct
/// prediction, ordered by ground-truth index. Ties between equal-cost
/// columns resolve toward the lower prediction index. Throws
/// std::invalid_argument when rows > cols or any entry is not finite.
std::vector<MatchPair> solve_optimal(const CostMatrix& costs);

/// Total cost of a pair list, summed in the given order.
double matching_cost(const CostMatrix& costs, std::span<const MatchPair> pairs);

/// Optimal matching plus the optimal matching over the prediction columns
/// the first one left unused. The two pair sets use disjoint prediction
/// indices and together provide 2G positive samples. Requires
/// 2 * rows <= cols.
AssignmentResult solve_one_to_many(const CostMatrix& costs);

}  // namespace uodet
