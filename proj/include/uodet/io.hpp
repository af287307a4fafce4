// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uodet/ipp.hpp"
#include "uodet/metrics.hpp"
#include "uodet/synthetic.hpp"

namespace uodet {

struct ScenePredictions {
  std::string image_id;
  std::vector<FinalPrediction> predictions;
};

/// Decimal text with 9 significant digits; every numeric field in the
/// file formats goes through this.
std::string format_number(double value);

// Detections file: JSON lines, one scene per line:
//   {"image_id": ..., "proposals": [{"box": [cx,cy,w,h], "logits": [...],
//    "embedding": [...], "ips": ...?}]}
// The "ips" key appears once a proposal is scored.
void write_proposals_jsonl(const std::filesystem::path& path,
                           std::span<const SceneProposals> scenes);
std::vector<SceneProposals> read_proposals_jsonl(
    const std::filesystem::path& path);

// Ground-truth file: JSON lines:
//   {"image_id": ..., "objects": [{"box": [...], "label": int|"unknown"}]}
void write_ground_truth_jsonl(const std::filesystem::path& path,
                              std::span<const SceneGroundTruth> scenes);
std::vector<SceneGroundTruth> read_ground_truth_jsonl(
    const std::filesystem::path& path);

// Predictions file: JSON lines:
//   {"image_id": ..., "predictions": [{"box": [...],
//    "verdict": "known"|"unknown", "class": int?, "confidence": ...}]}
void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScenePredictions> scenes);
std::vector<ScenePredictions> read_predictions_jsonl(
    const std::filesystem::path& path);

// Report file: one JSON object with the metric keys and raw counts.
void write_report_json(const std::filesystem::path& path,
                       const EvalReport& report);
EvalReport read_report_json(const std::filesystem::path& path);

// Model file: flat numeric record "D w_1 ... w_D bias", whitespace
// separated.
void write_ipp_model(const std::filesystem::path& path, const IppModel& model);
IppModel read_ipp_model(const std::filesystem::path& path);

// PR-curve points file: "recall precision" per line.
void write_pr_points(const std::filesystem::path& path,
                     std::span<const std::pair<double, double>> points);

}  // namespace uodet
