// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the unknown-object detection pipeline:
// synthetic scene generation, one-to-many matching, IPP training, query
// selection, IPS-guided post-processing and benchmark evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uodet/assignment.hpp"
#include "uodet/config.hpp"
#include "uodet/io.hpp"
#include "uodet/pipeline.hpp"
#include "uodet/postprocess.hpp"

namespace fs = std::filesystem;
using namespace uodet;

namespace {

// Every config-file key as an optional CLI flag; flags set on the command
// line override the config file, which overrides the defaults.
struct FlagSet {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";

  std::optional<double> alpha, beta, c_const, tau;
  std::optional<double> lambda_ips, lambda_cls, lambda_box;
  std::optional<double> learning_rate, init_scale;
  std::optional<std::size_t> steps, batch_size;
  std::optional<double> nms_diou, cls_thresh, ips_thresh, eval_iou;
  std::optional<std::size_t> topk;
  std::optional<double> lambda_match_cls, lambda_match_box;
  std::optional<std::size_t> scenes, n_known, n_unknown, n_background;
  std::optional<std::size_t> dim, classes;
  std::optional<double> box_jitter, logit_noise;

  void register_on(CLI::App* cmd) {
    cmd->add_option("--config", config, "flat key = value config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "master seed (scenes and trainer)");
    cmd->add_option("--out", out, "output directory");

    cmd->add_option("--alpha", alpha, "positional objectness weight");
    cmd->add_option("--beta", beta, "categorical objectness weight");
    cmd->add_option("--c-const", c_const, "low-branch objective constant C");
    cmd->add_option("--tau", tau, "GIoU branch threshold");
    cmd->add_option("--lambda-ips", lambda_ips, "IPS loss weight");
    cmd->add_option("--lambda-cls", lambda_cls, "classification loss weight");
    cmd->add_option("--lambda-box", lambda_box, "box loss weight");
    cmd->add_option("--learning-rate", learning_rate, "trainer step size");
    cmd->add_option("--steps", steps, "trainer mini-batch steps");
    cmd->add_option("--batch-size", batch_size, "trainer batch size");
    cmd->add_option("--init-scale", init_scale, "trainer init half-width");
    cmd->add_option("--nms-diou", nms_diou, "NMS DIoU threshold");
    cmd->add_option("--cls-thresh", cls_thresh, "known-class threshold");
    cmd->add_option("--ips-thresh", ips_thresh, "IPS threshold");
    cmd->add_option("--eval-iou", eval_iou, "evaluation IoU threshold");
    cmd->add_option("--topk", topk, "query selection budget K");
    cmd->add_option("--lambda-match-cls", lambda_match_cls,
                    "matching class-cost weight");
    cmd->add_option("--lambda-match-box", lambda_match_box,
                    "matching box-cost weight");
    cmd->add_option("--scenes", scenes, "number of synthetic scenes");
    cmd->add_option("--n-known", n_known, "known objects per scene");
    cmd->add_option("--n-unknown", n_unknown, "unknown objects per scene");
    cmd->add_option("--n-background", n_background,
                    "background proposals per scene");
    cmd->add_option("--dim", dim, "embedding dimension");
    cmd->add_option("--classes", classes, "number of known classes");
    cmd->add_option("--box-jitter", box_jitter, "box code jitter half-width");
    cmd->add_option("--logit-noise", logit_noise,
                    "class feature noise sigma");
  }

  RunOptions resolve() const {
    RunOptions options;
    if (config) options = read_config_file(*config, options);
    const auto set_d = [](const std::optional<double>& v, double& field) {
      if (v) field = *v;
    };
    const auto set_n = [](const std::optional<std::size_t>& v,
                          std::size_t& field) {
      if (v) field = *v;
    };
    set_d(alpha, options.pipeline.supervision.alpha);
    set_d(beta, options.pipeline.supervision.beta);
    set_d(c_const, options.pipeline.supervision.c_const);
    set_d(tau, options.pipeline.supervision.tau);
    set_d(lambda_ips, options.pipeline.supervision.lambda_ips);
    set_d(lambda_cls, options.pipeline.supervision.lambda_cls);
    set_d(lambda_box, options.pipeline.supervision.lambda_box);
    set_d(learning_rate, options.pipeline.trainer.learning_rate);
    set_n(steps, options.pipeline.trainer.steps);
    set_n(batch_size, options.pipeline.trainer.batch_size);
    set_d(init_scale, options.pipeline.trainer.init_scale);
    set_d(nms_diou, options.pipeline.postprocess.nms_diou_threshold);
    set_d(cls_thresh, options.pipeline.postprocess.known_cls_threshold);
    set_d(ips_thresh, options.pipeline.postprocess.ips_threshold);
    set_d(eval_iou, options.pipeline.eval.iou_threshold);
    set_n(topk, options.pipeline.topk);
    set_d(lambda_match_cls, options.pipeline.lambda_match_cls);
    set_d(lambda_match_box, options.pipeline.lambda_match_box);
    set_n(scenes, options.scenes);
    set_n(n_known, options.synth.n_known);
    set_n(n_unknown, options.synth.n_unknown);
    set_n(n_background, options.synth.n_background);
    set_n(dim, options.synth.embedding_dim);
    set_n(classes, options.synth.k_classes);
    set_d(box_jitter, options.synth.box_jitter);
    set_d(logit_noise, options.synth.logit_noise);
    if (seed) options.set_seed(*seed);
    options.validate();
    return options;
  }
};

void print_report(const EvalReport& report) {
  std::printf("metric      value\n");
  std::printf("u_ap        %.4f\n", report.u_ap);
  std::printf("u_pre       %.4f\n", report.u_pre);
  std::printf("u_rec       %.4f\n", report.u_rec);
  std::printf("u_f1        %.4f\n", report.u_f1);
  std::printf("map_known   %.4f\n", report.map_known);
  std::printf("counts      tp_u=%lld fp_u=%lld fn_u=%lld\n",
              static_cast<long long>(report.unknown.tp),
              static_cast<long long>(report.unknown.fp),
              static_cast<long long>(report.unknown.fn));
}

std::vector<Detection> scored_detections(const SceneProposals& scene) {
  std::vector<Detection> detections;
  detections.reserve(scene.proposals.size());
  for (const Proposal& p : scene.proposals) {
    if (!p.ips.has_value()) {
      throw std::invalid_argument("scene '" + scene.image_id +
                                  "' carries unscored proposals; run the "
                                  "select step first");
    }
    detections.push_back(to_detection(p, *p.ips));
  }
  return detections;
}

int run_synth(const FlagSet& flags) {
  const RunOptions options = flags.resolve();
  const auto scenes = generate_scenes(options.synth, options.scenes);
  std::vector<SceneProposals> proposals;
  std::vector<SceneGroundTruth> gts;
  for (const SyntheticScene& scene : scenes) {
    proposals.push_back(scene.proposals);
    gts.push_back(scene.ground_truth);
  }
  fs::create_directories(flags.out);
  write_proposals_jsonl(fs::path(flags.out) / "proposals.jsonl", proposals);
  write_ground_truth_jsonl(fs::path(flags.out) / "gt.jsonl", gts);
  write_config_file(fs::path(flags.out) / "run.cfg", options);
  std::printf("wrote %zu scenes to %s\n", scenes.size(), flags.out.c_str());
  return 0;
}

int run_match(const FlagSet& flags, const std::string& proposals_path,
              const std::string& gt_path) {
  const RunOptions options = flags.resolve();
  const auto proposals = read_proposals_jsonl(proposals_path);
  const auto gts = read_ground_truth_jsonl(gt_path);
  if (proposals.size() != gts.size()) {
    throw std::invalid_argument("proposals and ground truth disagree on "
                                "scene count");
  }
  fs::create_directories(flags.out);
  std::ofstream out(fs::path(flags.out) / "assignments.jsonl");
  if (!out) throw std::runtime_error("cannot write assignments.jsonl");
  for (std::size_t s = 0; s < proposals.size(); ++s) {
    std::vector<GroundTruthObject> known;
    for (const GroundTruthObject& gt : gts[s].objects) {
      if (!gt.is_unknown()) known.push_back(gt);
    }
    std::vector<Detection> detections;
    for (const Proposal& p : proposals[s].proposals) {
      detections.push_back(to_detection(p, 0.5));
    }
    const CostMatrix costs =
        build_cost_matrix(detections, known, options.pipeline.lambda_match_cls,
                          options.pipeline.lambda_match_box);
    const AssignmentResult result = solve_one_to_many(costs);
    out << "{\"image_id\":\"" << proposals[s].image_id << "\",\"best\":[";
    for (std::size_t i = 0; i < result.best.size(); ++i) {
      if (i > 0) out << ',';
      out << '[' << result.best[i].first << ',' << result.best[i].second
          << ']';
    }
    out << "],\"suboptimal\":[";
    for (std::size_t i = 0; i < result.suboptimal.size(); ++i) {
      if (i > 0) out << ',';
      out << '[' << result.suboptimal[i].first << ','
          << result.suboptimal[i].second << ']';
    }
    out << "],\"best_cost\":" << format_number(result.best_cost)
        << ",\"suboptimal_cost\":" << format_number(result.suboptimal_cost)
        << "}\n";
  }
  std::printf("wrote assignments for %zu scenes to %s/assignments.jsonl\n",
              proposals.size(), flags.out.c_str());
  return 0;
}

int run_train_ipp(const FlagSet& flags, const std::string& proposals_path,
                  const std::string& gt_path) {
  const RunOptions options = flags.resolve();
  const auto proposals = read_proposals_jsonl(proposals_path);
  const auto gts = read_ground_truth_jsonl(gt_path);
  const auto samples = collect_ipp_samples(proposals, gts, options.pipeline);
  if (samples.empty()) {
    throw std::invalid_argument("no known objects found, nothing to train on");
  }
  const TrainResult result =
      train(samples, options.pipeline.trainer, options.pipeline.supervision);
  fs::create_directories(flags.out);
  write_ipp_model(fs::path(flags.out) / "model.txt", result.model);
  std::ofstream trace(fs::path(flags.out) / "loss_trace.txt");
  for (double loss : result.loss_trace) trace << format_number(loss) << '\n';
  std::printf("trained on %zu samples, final loss %.6f -> %s/model.txt\n",
              samples.size(), result.loss_trace.back(), flags.out.c_str());
  return 0;
}

int run_select(const FlagSet& flags, const std::string& proposals_path,
               const std::string& model_path) {
  const RunOptions options = flags.resolve();
  auto proposals = read_proposals_jsonl(proposals_path);
  const IppModel model = read_ipp_model(model_path);
  std::vector<SceneProposals> selected;
  for (SceneProposals& scene : proposals) {
    const ProposalSet scored =
        score_proposals(to_proposal_set(scene.proposals), model);
    const auto picked = topk_indices(scored.scores, options.pipeline.topk);
    SceneProposals keep;
    keep.image_id = scene.image_id;
    for (std::size_t i : picked) {
      Proposal p = scene.proposals[i];
      p.ips = scored.scores[i];
      keep.proposals.push_back(std::move(p));
    }
    selected.push_back(std::move(keep));
  }
  fs::create_directories(flags.out);
  write_proposals_jsonl(fs::path(flags.out) / "selected.jsonl", selected);
  std::printf("selected top-%zu proposals per scene -> %s/selected.jsonl\n",
              options.pipeline.topk, flags.out.c_str());
  return 0;
}

int run_nms(const FlagSet& flags, const std::string& detections_path) {
  const RunOptions options = flags.resolve();
  const auto scenes = read_proposals_jsonl(detections_path);
  std::vector<SceneProposals> kept_scenes;
  for (const SceneProposals& scene : scenes) {
    const std::vector<Detection> kept = ips_guided_nms(
        scored_detections(scene), options.pipeline.postprocess);
    SceneProposals out_scene;
    out_scene.image_id = scene.image_id;
    for (const Detection& d : kept) {
      // Embeddings are not needed downstream of NMS; keep records small.
      Proposal p;
      p.box = d.box;
      p.logits = d.logits;
      p.embedding = {};
      p.ips = d.ips;
      out_scene.proposals.push_back(std::move(p));
    }
    kept_scenes.push_back(std::move(out_scene));
  }
  fs::create_directories(flags.out);
  write_proposals_jsonl(fs::path(flags.out) / "kept.jsonl", kept_scenes);
  std::printf("suppressed duplicates in %zu scenes -> %s/kept.jsonl\n",
              scenes.size(), flags.out.c_str());
  return 0;
}

int run_classify(const FlagSet& flags, const std::string& detections_path) {
  const RunOptions options = flags.resolve();
  const auto scenes = read_proposals_jsonl(detections_path);
  std::vector<ScenePredictions> predictions;
  for (const SceneProposals& scene : scenes) {
    ScenePredictions out_scene;
    out_scene.image_id = scene.image_id;
    for (const Detection& d : scored_detections(scene)) {
      if (auto verdict = dual_criteria(d, options.pipeline.postprocess)) {
        out_scene.predictions.push_back(*verdict);
      }
    }
    predictions.push_back(std::move(out_scene));
  }
  fs::create_directories(flags.out);
  write_predictions_jsonl(fs::path(flags.out) / "predictions.jsonl",
                          predictions);
  std::printf("classified %zu scenes -> %s/predictions.jsonl\n",
              scenes.size(), flags.out.c_str());
  return 0;
}

int run_evaluate(const FlagSet& flags, const std::string& predictions_path,
                 const std::string& gt_path) {
  const RunOptions options = flags.resolve();
  const auto scenes = read_predictions_jsonl(predictions_path);
  const auto gts = read_ground_truth_jsonl(gt_path);
  if (scenes.size() != gts.size()) {
    throw std::invalid_argument(
        "predictions and ground truth disagree on scene count");
  }
  std::vector<std::vector<FinalPrediction>> predictions;
  std::vector<std::vector<GroundTruthObject>> objects;
  for (const ScenePredictions& s : scenes) predictions.push_back(s.predictions);
  for (const SceneGroundTruth& s : gts) objects.push_back(s.objects);

  const EvalReport report =
      evaluate_dataset(predictions, objects, options.pipeline.eval);
  fs::create_directories(flags.out);
  write_report_json(fs::path(flags.out) / "report.json", report);
  write_pr_points(fs::path(flags.out) / "pr_unknown.txt",
                  unknown_pr_points(predictions, objects,
                                    options.pipeline.eval));
  print_report(report);
  return 0;
}

int run_full_pipeline(const FlagSet& flags, const std::string& proposals_path,
                      const std::string& gt_path) {
  const RunOptions options = flags.resolve();
  std::vector<SceneProposals> proposals;
  std::vector<SceneGroundTruth> gts;
  if (!proposals_path.empty() || !gt_path.empty()) {
    if (proposals_path.empty() || gt_path.empty()) {
      throw std::invalid_argument(
          "pipeline needs both --proposals and --gt, or neither");
    }
    proposals = read_proposals_jsonl(proposals_path);
    gts = read_ground_truth_jsonl(gt_path);
  } else {
    for (SyntheticScene& scene :
         generate_scenes(options.synth, options.scenes)) {
      proposals.push_back(std::move(scene.proposals));
      gts.push_back(std::move(scene.ground_truth));
    }
  }

  const PipelineResult result =
      run_pipeline(proposals, gts, options.pipeline);
  write_pipeline_artifacts(flags.out, result, gts, options.pipeline);
  write_config_file(fs::path(flags.out) / "run.cfg", options);
  std::printf("pipeline over %zu scenes (%zu IPP samples)\n", gts.size(),
              result.training_samples);
  print_report(result.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unknown-object detection pipeline toolkit"};
  app.require_subcommand(1);

  FlagSet synth_flags, match_flags, train_flags, select_flags, nms_flags,
      classify_flags, evaluate_flags, pipeline_flags;
  std::string match_proposals, match_gt;
  std::string train_proposals, train_gt;
  std::string select_proposals, select_model;
  std::string nms_detections, classify_detections;
  std::string eval_predictions, eval_gt;
  std::string pipe_proposals, pipe_gt;

  CLI::App* synth = app.add_subcommand("synth", "generate synthetic scenes");
  synth_flags.register_on(synth);

  CLI::App* match = app.add_subcommand(
      "match", "one-to-one and one-to-many assignment per scene");
  match_flags.register_on(match);
  match->add_option("--proposals", match_proposals, "proposals JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  match->add_option("--gt", match_gt, "ground-truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* train_cmd =
      app.add_subcommand("train-ipp", "train the IPS predictor");
  train_flags.register_on(train_cmd);
  train_cmd->add_option("--proposals", train_proposals, "proposals JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--gt", train_gt, "ground-truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* select =
      app.add_subcommand("select", "score proposals and keep the top K");
  select_flags.register_on(select);
  select->add_option("--proposals", select_proposals, "proposals JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  select->add_option("--model", select_model, "IPP model file")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* nms = app.add_subcommand("nms", "IPS-guided DIoU suppression");
  nms_flags.register_on(nms);
  nms->add_option("--detections", nms_detections, "scored detections JSONL")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* classify =
      app.add_subcommand("classify", "dual-criteria known/unknown verdicts");
  classify_flags.register_on(classify);
  classify
      ->add_option("--detections", classify_detections,
                   "scored detections JSONL")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "benchmark metrics for predictions");
  evaluate_flags.register_on(evaluate);
  evaluate->add_option("--predictions", eval_predictions, "predictions JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--gt", eval_gt, "ground-truth JSONL")
      ->required()
      ->check(CLI::ExistingFile);

  CLI::App* pipeline_cmd = app.add_subcommand(
      "pipeline", "full pipeline over synthetic or loaded scenes");
  pipeline_flags.register_on(pipeline_cmd);
  pipeline_cmd->add_option("--proposals", pipe_proposals,
                           "proposals JSONL (default: synthesize)");
  pipeline_cmd->add_option("--gt", pipe_gt, "ground-truth JSONL");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // command-line problems are validation errors
  }

  try {
    if (synth->parsed()) return run_synth(synth_flags);
    if (match->parsed()) return run_match(match_flags, match_proposals, match_gt);
    if (train_cmd->parsed()) {
      return run_train_ipp(train_flags, train_proposals, train_gt);
    }
    if (select->parsed()) {
      return run_select(select_flags, select_proposals, select_model);
    }
    if (nms->parsed()) return run_nms(nms_flags, nms_detections);
    if (classify->parsed()) {
      return run_classify(classify_flags, classify_detections);
    }
    if (evaluate->parsed()) {
      return run_evaluate(evaluate_flags, eval_predictions, eval_gt);
    }
    if (pipeline_cmd->parsed()) {
      return run_full_pipeline(pipeline_flags, pipe_proposals, pipe_gt);
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "validation error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
