// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "uodet/rng.hpp"

namespace uodet {
namespace {

// Embedding layout: dim 0 is the positional lock quality (how tightly the
// query frames whatever it latched onto), dims 1..K the class-evidence
// features, dims K+1..K+4 the box code (cx, cy, w, h), the remainder
// distractor noise. Positional and categorical evidence live in separate
// coordinates and vary independently across planted objects, so neither
// signal is redundant.
constexpr double kUnknownClassFeature = 0.12;

// Frozen teacher. Logits read only the class features:
//   logit_k = 3.5 * e[1 + k] - 3
// A known object scores ~0.62 on its class; its off-class features carry
// a per-object ambiguity mass, so the summed foreground evidence spans
// [0.72, 1]. Unknown objects stay near 0.11 per class (summed ~0.32),
// still clearly above background (~0.14). The box is read straight from
// the box code.
constexpr double kClassGain = 3.5;
constexpr double kLogitBias = -3.0;

std::vector<double> teacher_logits(const std::vector<double>& embedding,
                                   std::size_t k_classes) {
  std::vector<double> logits(k_classes);
  for (std::size_t k = 0; k < k_classes; ++k) {
    logits[k] = kClassGain * embedding[1 + k] + kLogitBias;
  }
  return logits;
}

BBox teacher_box(const std::vector<double>& embedding, std::size_t k_classes) {
  const std::size_t base = k_classes + 1;
  return {embedding[base + 0], embedding[base + 1],
          std::max(0.01, embedding[base + 2]),
          std::max(0.01, embedding[base + 3])};
}

struct SceneBuilder {
  const SyntheticSceneSpec& spec;
  Rng& rng;
  std::vector<Proposal>& proposals;

  std::vector<double> blank_embedding() const {
    return std::vector<double>(spec.embedding_dim, 0.0);
  }

  void fill_noise_dims(std::vector<double>& e) {
    for (std::size_t d = spec.k_classes + 5; d < spec.embedding_dim; ++d) {
      e[d] = rng.uniform(-0.5, 0.5);
    }
  }

  void encode_box(std::vector<double>& e, const BBox& box, bool jittered) {
    const std::size_t base = spec.k_classes + 1;
    const double j = jittered ? spec.box_jitter : 0.0;
    e[base + 0] = box.cx + (j > 0.0 ? rng.uniform(-j, j) : 0.0);
    e[base + 1] = box.cy + (j > 0.0 ? rng.uniform(-j, j) : 0.0);
    e[base + 2] = std::max(0.01, box.w + (j > 0.0 ? rng.uniform(-j, j) : 0.0));
    e[base + 3] = std::max(0.01, box.h + (j > 0.0 ? rng.uniform(-j, j) : 0.0));
  }

  void add_class_noise(std::vector<double>& e) {
    if (spec.logit_noise <= 0.0) return;
    for (std::size_t k = 0; k < spec.k_classes; ++k) {
      e[1 + k] += spec.logit_noise * rng.normal();
    }
  }

  // Finalizes a proposal whose lock quality is its realized GIoU against
  // the region it latched onto, observed through the positional channel's
  // own noise (twice the box jitter, mirroring the categorical channel).
  void push_locked(std::vector<double> e, const BBox& locked_region) {
    Proposal p;
    p.logits = teacher_logits(e, spec.k_classes);
    p.box = teacher_box(e, spec.k_classes);
    double quality = std::max(0.0, giou(locked_region, p.box));
    if (spec.box_jitter > 0.0) {
      quality += 2.0 * spec.box_jitter * rng.normal();
    }
    e[0] = std::clamp(quality, 0.0, 1.0);
    p.embedding = std::move(e);
    proposals.push_back(std::move(p));
  }

  // Background variants carry an explicit lock quality: plain clutter
  // locks on nothing, a phantom locks tightly onto an empty region.
  void push_with_quality(std::vector<double> e, double quality) {
    Proposal p;
    p.logits = teacher_logits(e, spec.k_classes);
    p.box = teacher_box(e, spec.k_classes);
    e[0] = std::clamp(quality, 0.0, 1.0);
    p.embedding = std::move(e);
    proposals.push_back(std::move(p));
  }

  // Same-size box displaced along one axis so that IoU(gt, box) hits the
  // requested value exactly before jitter: shift = (1 - iou) / (1 + iou).
  BBox displaced(const BBox& box, double target_iou) {
    const double shift = (1.0 - target_iou) / (1.0 + target_iou);
    const bool shift_x = rng.uniform() < 0.5;
    const double sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
    BBox out = box;
    if (shift_x) {
      out.cx += sign * shift * box.w;
    } else {
      out.cy += sign * shift * box.h;
    }
    return out;
  }
};

}  // namespace

void SyntheticSceneSpec::validate() const {
  if (k_classes < 1) {
    throw std::invalid_argument("synth.classes must be >= 1");
  }
  if (embedding_dim < k_classes + 5) {
    throw std::invalid_argument(
        "synth.dim must be >= classes + 5 to hold the class features and "
        "box code");
  }
  if (!(box_jitter >= 0.0) || !std::isfinite(box_jitter)) {
    throw std::invalid_argument("synth.box_jitter must be >= 0");
  }
  if (!(logit_noise >= 0.0) || !std::isfinite(logit_noise)) {
    throw std::invalid_argument("synth.logit_noise must be >= 0");
  }
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec,
                              std::string image_id) {
  spec.validate();
  Rng rng(spec.seed);

  SyntheticScene scene;
  scene.proposals.image_id = image_id;
  scene.ground_truth.image_id = std::move(image_id);

  std::vector<Proposal>& proposals = scene.proposals.proposals;
  std::vector<GroundTruthObject>& gts = scene.ground_truth.objects;
  SceneBuilder builder{spec, rng, proposals};

  // Distinct grid cells keep planted objects disjoint.
  const std::size_t n_objects = spec.n_known + spec.n_unknown;
  std::size_t grid = 2;
  while (grid * grid < n_objects) ++grid;
  std::vector<std::size_t> cells(grid * grid);
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = i;
  rng.shuffle(cells);

  const double cell = 1.0 / static_cast<double>(grid);
  const auto place_in_cell = [&](std::size_t cell_index) {
    const double cx0 = (static_cast<double>(cell_index % grid) + 0.5) * cell;
    const double cy0 = (static_cast<double>(cell_index / grid) + 0.5) * cell;
    BBox box;
    box.cx = cx0 + rng.uniform(-0.08, 0.08) * cell;
    box.cy = cy0 + rng.uniform(-0.08, 0.08) * cell;
    box.w = rng.uniform(0.45, 0.7) * cell;
    box.h = rng.uniform(0.45, 0.7) * cell;
    return box;
  };

  for (std::size_t i = 0; i < spec.n_known; ++i) {
    const int label = static_cast<int>(i % spec.k_classes);
    const BBox box = place_in_cell(cells[i]);
    gts.push_back({box, label});

    // Detection quality varies per object along both latent axes:
    // localization tightness and class ambiguity are drawn independently,
    // each spreading with its channel's noise level. At zero noise the
    // teacher reproduces every planted box exactly.
    const double loc_floor = std::max(0.55, 1.0 - 19.0 * spec.box_jitter);
    const double ambiguity_cap = std::min(0.5, spec.logit_noise * (10.0 / 3.0));
    const double loc_iou = rng.uniform(loc_floor, 1.0);
    const double ambiguity = rng.uniform(0.0, ambiguity_cap);

    std::vector<double> e = builder.blank_embedding();
    for (std::size_t k = 0; k < spec.k_classes; ++k) {
      e[1 + k] = static_cast<int>(k) == label ? 1.0 : ambiguity;
    }
    builder.add_class_noise(e);
    builder.encode_box(e, builder.displaced(box, loc_iou),
                       /*jittered=*/true);
    builder.fill_noise_dims(e);
    builder.push_locked(std::move(e), box);

    // Near-miss decoy: a same-size box at IoU ~0.57 against the object
    // with no class evidence — a plausible frame with no instance under
    // it. This is what the sub-optimal matching picks up.
    std::vector<double> d = builder.blank_embedding();
    builder.add_class_noise(d);
    builder.encode_box(d, builder.displaced(box, 0.57), /*jittered=*/true);
    builder.fill_noise_dims(d);
    builder.push_locked(std::move(d), box);
  }

  for (std::size_t i = 0; i < spec.n_unknown; ++i) {
    const BBox box = place_in_cell(cells[spec.n_known + i]);
    gts.push_back({box, std::nullopt});

    const double loc_floor = std::max(0.85, 1.0 - 7.5 * spec.box_jitter);
    std::vector<double> e = builder.blank_embedding();
    for (std::size_t k = 0; k < spec.k_classes; ++k) {
      e[1 + k] = kUnknownClassFeature;
    }
    builder.add_class_noise(e);
    builder.encode_box(e,
                       builder.displaced(box, rng.uniform(loc_floor, 1.0)),
                       /*jittered=*/true);
    builder.fill_noise_dims(e);
    builder.push_locked(std::move(e), box);
  }

  for (std::size_t i = 0; i < spec.n_background; ++i) {
    BBox box;
    box.cx = rng.uniform(0.1, 0.9);
    box.cy = rng.uniform(0.1, 0.9);
    box.w = rng.uniform(0.05, 0.25);
    box.h = rng.uniform(0.05, 0.25);
    std::vector<double> e = builder.blank_embedding();
    builder.add_class_noise(e);
    builder.encode_box(e, box, /*jittered=*/false);
    builder.fill_noise_dims(e);
    // Half the clutter is phantoms: queries locked tightly onto empty
    // regions (strong positional evidence, no class evidence). They never
    // match a ground truth, so only the learned score can reject them.
    const bool phantom = i % 2 == 0;
    builder.push_with_quality(std::move(e),
                              phantom ? rng.uniform(0.70, 0.88)
                                      : rng.uniform(0.02, 0.20));
  }

  rng.shuffle(proposals);
  return scene;
}

std::vector<SyntheticScene> generate_scenes(const SyntheticSceneSpec& spec,
                                            std::size_t n_scenes) {
  std::vector<SyntheticScene> scenes;
  scenes.reserve(n_scenes);
  for (std::size_t i = 0; i < n_scenes; ++i) {
    SyntheticSceneSpec scene_spec = spec;
    scene_spec.seed = mix_seed(spec.seed, i);
    char id[32];
    std::snprintf(id, sizeof(id), "scene-%06zu", i);
    scenes.push_back(generate_scene(scene_spec, id));
  }
  return scenes;
}

ProposalSet to_proposal_set(std::span<const Proposal> proposals) {
  ProposalSet set;
  set.embeddings.reserve(proposals.size());
  set.boxes.reserve(proposals.size());
  bool any_scored = false;
  for (const Proposal& p : proposals) {
    if (p.ips.has_value()) any_scored = true;
  }
  for (const Proposal& p : proposals) {
    set.embeddings.push_back(p.embedding);
    set.boxes.push_back(p.box);
    if (any_scored) {
      if (!p.ips.has_value()) {
        throw std::invalid_argument(
            "to_proposal_set: proposals are only partially scored");
      }
      set.scores.push_back(*p.ips);
    }
  }
  return set;
}

Detection to_detection(const Proposal& proposal, double ips) {
  return {proposal.box, proposal.logits, ips};
}

}  // namespace uodet
