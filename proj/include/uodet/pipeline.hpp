// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "uodet/assignment.hpp"
#include "uodet/config.hpp"
#include "uodet/io.hpp"

namespace uodet {

struct PipelineResult {
  IppModel model;
  std::vector<double> loss_trace;
  std::vector<ScenePredictions> predictions;
  EvalReport report;
  std::size_t training_samples = 0;
};

/// Per-scene one-to-many assignment of known ground truths against the
/// proposals, turned into IPP training samples (embedding, GIoU of the
/// pair, joint target P_o). Scenes without known objects contribute
/// nothing.
std::vector<IppSample> collect_ipp_samples(
    std::span<const SceneProposals> proposals,
    std::span<const SceneGroundTruth> gts, const PipelineConfig& cfg);

/// The full algorithmic pipeline: one-to-many matching and joint
/// supervision targets, IPP training over all scenes, then per scene
/// IPS scoring, top-k query selection, IPS-guided NMS and the
/// dual-criteria verdicts, finally dataset evaluation. Deterministic
/// given config and input. Throws std::invalid_argument when the scene
/// lists disagree.
PipelineResult run_pipeline(std::span<const SceneProposals> proposals,
                            std::span<const SceneGroundTruth> gts,
                            const PipelineConfig& cfg);

/// Writes model.txt, predictions.jsonl, report.json and pr_unknown.txt
/// under out_dir (created if missing).
void write_pipeline_artifacts(const std::filesystem::path& out_dir,
                              const PipelineResult& result,
                              std::span<const SceneGroundTruth> gts,
                              const PipelineConfig& cfg);

}  // namespace uodet
