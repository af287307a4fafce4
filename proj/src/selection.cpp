// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace uodet {

void ProposalSet::validate(bool require_scores) const {
  if (boxes.size() != embeddings.size()) {
    throw std::invalid_argument(
        "ProposalSet: embeddings and boxes lengths differ");
  }
  if (!scores.empty() && scores.size() != embeddings.size()) {
    throw std::invalid_argument(
        "ProposalSet: scores length does not match proposals");
  }
  if (require_scores && scores.size() != embeddings.size()) {
    throw std::invalid_argument("ProposalSet: proposals are not scored yet");
  }
}

ProposalSet score_proposals(ProposalSet proposals, const IppModel& ipp) {
  proposals.validate();
  proposals.scores.resize(proposals.size());
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    proposals.scores[i] = forward(ipp, proposals.embeddings[i]);
  }
  return proposals;
}

std::vector<std::size_t> topk_indices(std::span<const double> scores,
                                      std::size_t k) {
  if (k == 0) {
    throw std::invalid_argument("topk_indices: k must be >= 1");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t take = std::min(k, scores.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&scores](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(take);
  return order;
}

ProposalSet select_topk(const ProposalSet& proposals, std::size_t k) {
  proposals.validate(/*require_scores=*/true);
  const auto picked = topk_indices(proposals.scores, k);
  ProposalSet out;
  out.embeddings.reserve(picked.size());
  out.boxes.reserve(picked.size());
  out.scores.reserve(picked.size());
  for (std::size_t i : picked) {
    out.embeddings.push_back(proposals.embeddings[i]);
    out.boxes.push_back(proposals.boxes[i]);
    out.scores.push_back(proposals.scores[i]);
  }
  return out;
}

}  // namespace uodet
