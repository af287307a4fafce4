// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/assignment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uodet/geometry.hpp"

namespace uodet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// One step of successive shortest augmenting paths with dual potentials
// (rectangular Jonker-Volgenant). Grows the matching by one row. Ties on
// path cost resolve toward free columns first, then the lower column
// index, which keeps the solver deterministic and biases equal-cost
// matchings toward low prediction indices.
void augment_row(const CostMatrix& c, std::size_t source,
                 std::vector<double>& u, std::vector<double>& v,
                 std::vector<std::size_t>& col_of_row,
                 std::vector<std::size_t>& row_of_col) {
  const std::size_t n = c.cols;
  std::vector<double> shortest(n, kInf);
  std::vector<std::size_t> reached_from(n, kNone);
  std::vector<bool> column_final(n, false);
  std::vector<bool> row_visited(c.rows, false);

  double path_cost = 0.0;
  std::size_t i = source;
  std::size_t sink = kNone;
  while (sink == kNone) {
    row_visited[i] = true;
    std::size_t best = kNone;
    bool best_free = false;
    double lowest = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (column_final[j]) continue;
      const double reduced = path_cost + c.at(i, j) - u[i] - v[j];
      if (reduced < shortest[j]) {
        shortest[j] = reduced;
        reached_from[j] = i;
      }
      const bool is_free = row_of_col[j] == kNone;
      if (shortest[j] < lowest ||
          (shortest[j] == lowest && is_free && !best_free)) {
        lowest = shortest[j];
        best = j;
        best_free = is_free;
      }
    }
    // Finite entries guarantee a finite path to some free column.
    path_cost = lowest;
    column_final[best] = true;
    if (row_of_col[best] == kNone) {
      sink = best;
    } else {
      i = row_of_col[best];
    }
  }

  u[source] += path_cost;
  for (std::size_t r = 0; r < c.rows; ++r) {
    if (row_visited[r] && r != source) {
      u[r] += path_cost - shortest[col_of_row[r]];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (column_final[j]) v[j] -= path_cost - shortest[j];
  }

  for (std::size_t j = sink;;) {
    const std::size_t r = reached_from[j];
    row_of_col[j] = r;
    std::swap(col_of_row[r], j);
    if (r == source) break;
  }
}

void check_entries(const CostMatrix& costs, const char* op) {
  if (costs.entries.size() != costs.rows * costs.cols) {
    throw std::invalid_argument(std::string(op) +
                                ": entry count does not match dimensions");
  }
  for (double e : costs.entries) {
    if (!std::isfinite(e)) {
      throw std::invalid_argument(std::string(op) +
                                  ": cost entries must be finite");
    }
  }
}

}  // namespace

double match_cost(const Detection& prediction, const GroundTruthObject& gt,
                  double lambda_cls, double lambda_box) {
  if (gt.is_unknown()) {
    throw std::invalid_argument(
        "match_cost: ground truth must carry a known class label");
  }
  const int label = *gt.label;
  if (label < 0 ||
      static_cast<std::size_t>(label) >= prediction.logits.size()) {
    throw std::invalid_argument("match_cost: class label " +
                                std::to_string(label) +
                                " outside the logit range");
  }
  const double p = sigmoid(prediction.logits[static_cast<std::size_t>(label)]);
  return lambda_cls * (-p) + lambda_box * (1.0 - iou(prediction.box, gt.box));
}

CostMatrix build_cost_matrix(std::span<const Detection> predictions,
                             std::span<const GroundTruthObject> gts,
                             double lambda_cls, double lambda_box) {
  CostMatrix m;
  m.rows = gts.size();
  m.cols = predictions.size();
  m.lambda_cls = lambda_cls;
  m.lambda_box = lambda_box;
  m.entries.resize(m.rows * m.cols);
  for (std::size_t g = 0; g < m.rows; ++g) {
    for (std::size_t p = 0; p < m.cols; ++p) {
      m.at(g, p) = match_cost(predictions[p], gts[g], lambda_cls, lambda_box);
    }
  }
  return m;
}

std::vector<MatchPair> solve_optimal(const CostMatrix& costs) {
  if (costs.rows > costs.cols) {
    throw std::invalid_argument(
        "solve_optimal: more ground truths than predictions (G=" +
        std::to_string(costs.rows) + ", N=" + std::to_string(costs.cols) +
        ")");
  }
  check_entries(costs, "solve_optimal");

  std::vector<double> u(costs.rows, 0.0);
  std::vector<double> v(costs.cols, 0.0);
  std::vector<std::size_t> col_of_row(costs.rows, kNone);
  std::vector<std::size_t> row_of_col(costs.cols, kNone);
  for (std::size_t r = 0; r < costs.rows; ++r) {
    augment_row(costs, r, u, v, col_of_row, row_of_col);
  }

  std::vector<MatchPair> out;
  out.reserve(costs.rows);
  for (std::size_t r = 0; r < costs.rows; ++r) {
    out.emplace_back(r, col_of_row[r]);
  }
  return out;
}

double matching_cost(const CostMatrix& costs,
                     std::span<const MatchPair> pairs) {
  double total = 0.0;
  for (const auto& [g, p] : pairs) total += costs.at(g, p);
  return total;
}

AssignmentResult solve_one_to_many(const CostMatrix& costs) {
  if (2 * costs.rows > costs.cols) {
    throw std::invalid_argument(
        "solve_one_to_many: needs two predictions per ground truth (2G=" +
        std::to_string(2 * costs.rows) + " > N=" + std::to_string(costs.cols) +
        ")");
  }
  AssignmentResult result;
  if (costs.rows == 0) return result;

  result.best = solve_optimal(costs);
  result.best_cost = matching_cost(costs, result.best);

  std::vector<bool> used(costs.cols, false);
  for (const auto& [g, p] : result.best) used[p] = true;
  std::vector<std::size_t> remaining;
  remaining.reserve(costs.cols - costs.rows);
  for (std::size_t j = 0; j < costs.cols; ++j) {
    if (!used[j]) remaining.push_back(j);
  }

  CostMatrix reduced;
  reduced.rows = costs.rows;
  reduced.cols = remaining.size();
  reduced.lambda_cls = costs.lambda_cls;
  reduced.lambda_box = costs.lambda_box;
  reduced.entries.reserve(reduced.rows * reduced.cols);
  for (std::size_t g = 0; g < costs.rows; ++g) {
    for (std::size_t j : remaining) reduced.entries.push_back(costs.at(g, j));
  }

  const auto sub = solve_optimal(reduced);
  result.suboptimal.reserve(sub.size());
  for (const auto& [g, j] : sub) result.suboptimal.emplace_back(g, remaining[j]);
  result.suboptimal_cost = matching_cost(costs, result.suboptimal);

  result.positive = result.best;
  result.positive.insert(result.positive.end(), result.suboptimal.begin(),
                         result.suboptimal.end());
  return result;
}

}  // namespace uodet
