// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/pipeline.hpp"

#include <stdexcept>
#include <string>

#include "uodet/postprocess.hpp"

namespace uodet {
namespace {

void check_scene_alignment(std::span<const SceneProposals> proposals,
                           std::span<const SceneGroundTruth> gts,
                           const char* op) {
  if (proposals.size() != gts.size()) {
    throw std::invalid_argument(
        std::string(op) + ": scene counts differ between proposals (" +
        std::to_string(proposals.size()) + ") and ground truth (" +
        std::to_string(gts.size()) + ")");
  }
  for (std::size_t s = 0; s < proposals.size(); ++s) {
    if (proposals[s].image_id != gts[s].image_id) {
      throw std::invalid_argument(std::string(op) + ": scene " +
                                  std::to_string(s) + " image ids differ ('" +
                                  proposals[s].image_id + "' vs '" +
                                  gts[s].image_id + "')");
    }
  }
}

std::vector<GroundTruthObject> known_objects(const SceneGroundTruth& gt) {
  std::vector<GroundTruthObject> known;
  for (const GroundTruthObject& obj : gt.objects) {
    if (!obj.is_unknown()) known.push_back(obj);
  }
  return known;
}

}  // namespace

std::vector<IppSample> collect_ipp_samples(
    std::span<const SceneProposals> proposals,
    std::span<const SceneGroundTruth> gts, const PipelineConfig& cfg) {
  check_scene_alignment(proposals, gts, "collect_ipp_samples");

  std::vector<IppSample> samples;
  for (std::size_t s = 0; s < proposals.size(); ++s) {
    const std::vector<GroundTruthObject> known = known_objects(gts[s]);
    if (known.empty()) continue;
    if (2 * known.size() > proposals[s].proposals.size()) {
      throw std::invalid_argument(
          "collect_ipp_samples: scene '" + proposals[s].image_id +
          "' has too few proposals for one-to-many assignment (need 2G)");
    }

    std::vector<Detection> detections;
    detections.reserve(proposals[s].proposals.size());
    for (const Proposal& p : proposals[s].proposals) {
      detections.push_back(to_detection(p, 0.5));
    }
    const CostMatrix costs = build_cost_matrix(
        detections, known, cfg.lambda_match_cls, cfg.lambda_match_box);
    const AssignmentResult assignment = solve_one_to_many(costs);

    for (const auto& [g, p] : assignment.positive) {
      const Proposal& proposal = proposals[s].proposals[p];
      IppSample sample;
      sample.embedding = proposal.embedding;
      sample.giou_val = positional_objectness(known[g].box, proposal.box);
      const double p_f = categorical_objectness(proposal.logits);
      sample.target = supervision_target(sample.giou_val, p_f, cfg.supervision);
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

PipelineResult run_pipeline(std::span<const SceneProposals> proposals,
                            std::span<const SceneGroundTruth> gts,
                            const PipelineConfig& cfg) {
  cfg.validate();
  check_scene_alignment(proposals, gts, "run_pipeline");

  const std::vector<IppSample> samples =
      collect_ipp_samples(proposals, gts, cfg);
  if (samples.empty()) {
    throw std::invalid_argument(
        "run_pipeline: no known objects anywhere, nothing to train on");
  }

  TrainResult trained = train(samples, cfg.trainer, cfg.supervision);

  PipelineResult result;
  result.model = std::move(trained.model);
  result.loss_trace = std::move(trained.loss_trace);
  result.training_samples = samples.size();

  std::vector<std::vector<FinalPrediction>> scene_predictions;
  scene_predictions.reserve(proposals.size());
  for (const SceneProposals& scene : proposals) {
    const ProposalSet scored =
        score_proposals(to_proposal_set(scene.proposals), result.model);
    const auto picked = topk_indices(scored.scores, cfg.topk);

    std::vector<Detection> detections;
    detections.reserve(picked.size());
    for (std::size_t i : picked) {
      detections.push_back(
          to_detection(scene.proposals[i], scored.scores[i]));
    }
    scene_predictions.push_back(
        postprocess(std::move(detections), cfg.postprocess));
  }

  std::vector<std::vector<GroundTruthObject>> gt_objects;
  gt_objects.reserve(gts.size());
  for (const SceneGroundTruth& gt : gts) gt_objects.push_back(gt.objects);

  result.report = evaluate_dataset(scene_predictions, gt_objects, cfg.eval);

  result.predictions.reserve(proposals.size());
  for (std::size_t s = 0; s < proposals.size(); ++s) {
    result.predictions.push_back(
        {proposals[s].image_id, std::move(scene_predictions[s])});
  }
  return result;
}

void write_pipeline_artifacts(const std::filesystem::path& out_dir,
                              const PipelineResult& result,
                              std::span<const SceneGroundTruth> gts,
                              const PipelineConfig& cfg) {
  std::filesystem::create_directories(out_dir);
  write_ipp_model(out_dir / "model.txt", result.model);
  write_predictions_jsonl(out_dir / "predictions.jsonl", result.predictions);
  write_report_json(out_dir / "report.json", result.report);

  std::vector<std::vector<FinalPrediction>> predictions;
  std::vector<std::vector<GroundTruthObject>> gt_objects;
  predictions.reserve(result.predictions.size());
  gt_objects.reserve(gts.size());
  for (const ScenePredictions& p : result.predictions) {
    predictions.push_back(p.predictions);
  }
  for (const SceneGroundTruth& gt : gts) gt_objects.push_back(gt.objects);
  write_pr_points(out_dir / "pr_unknown.txt",
                  unknown_pr_points(predictions, gt_objects, cfg.eval));
}

}  // namespace uodet
