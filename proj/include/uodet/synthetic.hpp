// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uodet/selection.hpp"
#include "uodet/types.hpp"

namespace uodet {

/// One raw proposal: the query embedding plus the teacher's box and
/// logits for it, and optionally an IPS once scored.
struct Proposal {
  std::vector<double> embedding;
  BBox box;
  std::vector<double> logits;
  std::optional<double> ips;
};

struct SceneProposals {
  std::string image_id;
  std::vector<Proposal> proposals;
};

struct SceneGroundTruth {
  std::string image_id;
  std::vector<GroundTruthObject> objects;
};

struct SyntheticScene {
  SceneProposals proposals;
  SceneGroundTruth ground_truth;
};

/// Knobs of the synthetic desk-scale scene generator. The generator
/// stands in for a trained detector: a frozen linear teacher maps each
/// query embedding to a box and to per-class logits, and scenes plant
/// three proposal populations — known objects (class-evidence embeddings
/// whose teacher logits favor their class), unknown objects
/// (foreground-like embeddings with diffuse class evidence) and
/// background (random boxes, no foreground evidence). Each known object
/// additionally gets one near-miss decoy proposal: a moderately
/// overlapping box carried by a background-like embedding, which is what
/// the sub-optimal matching naturally picks up.
struct SyntheticSceneSpec {
  std::uint64_t seed = 1;
  std::size_t n_known = 3;
  std::size_t n_unknown = 2;
  std::size_t n_background = 12;
  std::size_t embedding_dim = 16;
  std::size_t k_classes = 3;
  double box_jitter = 0.0;   // uniform half-width added to the box code
  double logit_noise = 0.0;  // gaussian sigma on the class-feature dims

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// Deterministic given spec.seed. Known objects and unknown objects land
/// in distinct grid cells, so noiseless scenes are separable.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec,
                              std::string image_id = "scene-000000");

/// n_scenes scenes with per-scene seeds derived from spec.seed and ids
/// "scene-000000", "scene-000001", ...
std::vector<SyntheticScene> generate_scenes(const SyntheticSceneSpec& spec,
                                            std::size_t n_scenes);

ProposalSet to_proposal_set(std::span<const Proposal> proposals);

Detection to_detection(const Proposal& proposal, double ips);

}  // namespace uodet
