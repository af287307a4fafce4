// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "uodet/ipp.hpp"
#include "uodet/types.hpp"

namespace uodet {

/// Encoder proposals as parallel lists: query embeddings, their boxes,
/// and (after scoring) their instance presence scores.
struct ProposalSet {
  std::vector<std::vector<double>> embeddings;
  std::vector<BBox> boxes;
  std::vector<double> scores;  // empty until scored

  std::size_t size() const noexcept { return embeddings.size(); }

  /// Throws std::invalid_argument when the parallel lists disagree.
  void validate(bool require_scores = false) const;
};

/// Scores every proposal with the predictor, preserving order.
ProposalSet score_proposals(ProposalSet proposals, const IppModel& ipp);

/// Indices of the min(k, N) highest scores in descending score order,
/// ties broken toward the lower original index. k must be >= 1; k > N
/// saturates to all of them.
std::vector<std::size_t> topk_indices(std::span<const double> scores,
                                      std::size_t k);

/// The top-k subset of a scored proposal set, descending by score.
ProposalSet select_topk(const ProposalSet& proposals, std::size_t k);

}  // namespace uodet
