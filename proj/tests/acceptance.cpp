// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: every release-gate property of the pipeline, one
// pass/fail line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "uodet/config.hpp"
#include "uodet/io.hpp"
#include "uodet/pipeline.hpp"
#include "uodet/postprocess.hpp"

using namespace uodet;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

void run_criterion(int id, const std::string& name,
                   const std::function<void(Outcome&)>& body,
                   double time_limit_s = 0.0) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    body(outcome);
  } catch (const std::exception& err) {
    outcome.ok = false;
    outcome.detail = std::string("exception: ") + err.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  if (time_limit_s > 0.0 && seconds > time_limit_s) {
    outcome.ok = false;
    outcome.detail += (outcome.detail.empty() ? "" : "; ");
    outcome.detail += "exceeded the " + std::to_string(time_limit_s) +
                      "s budget";
  }
  std::printf("%s  criterion %02d: %s (%.2fs)%s%s\n",
              outcome.ok ? "PASS" : "FAIL", id, name.c_str(), seconds,
              outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
  std::fflush(stdout);
  if (!outcome.ok) ++g_failures;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

void geometry_oracle(Outcome& out) {
  constexpr int kGrid = 1000;
  Rng rng(20260809);
  for (int i = 0; i < 1000 && out.ok; ++i) {
    const BBox a = oracle::lattice_box(rng, kGrid);
    const BBox b = oracle::lattice_box(rng, kGrid);
    const auto raster = oracle::rasterize_scores(a, b, kGrid);
    out.require(std::abs(iou(a, b) - raster.iou) < 1e-3,
                "iou disagrees with the rasterization oracle");
    out.require(std::abs(giou(a, b) - raster.giou) < 1e-3,
                "giou disagrees with the rasterization oracle");
  }
  for (int i = 0; i < 10000 && out.ok; ++i) {
    const BBox a = oracle::random_box(rng);
    const BBox b = oracle::random_box(rng);
    const double i_ab = iou(a, b), g_ab = giou(a, b), d_ab = diou(a, b);
    out.require(i_ab == iou(b, a) && g_ab == giou(b, a) && d_ab == diou(b, a),
                "symmetry violated");
    out.require(i_ab >= 0.0 && i_ab <= 1.0, "iou out of [0, 1]");
    out.require(g_ab > -1.0 && g_ab <= 1.0, "giou out of (-1, 1]");
    out.require(d_ab >= -1.0 && d_ab <= 1.0, "diou out of [-1, 1]");
    out.require(g_ab <= i_ab + 1e-15, "giou exceeds iou");
    out.require(std::abs(iou(a, a) - 1.0) < 1e-15 &&
                    std::abs(giou(a, a) - 1.0) < 1e-15 &&
                    std::abs(diou(a, a) - 1.0) < 1e-15,
                "identity violated");
  }
}

void geometry_fixtures(Outcome& out) {
  const BBox a = box_from_corners(0, 0, 2, 2);
  const BBox b = box_from_corners(1, 1, 3, 3);
  out.require(std::abs(giou(a, b) - (1.0 / 7.0 - 2.0 / 9.0)) < 1e-9,
              "giou fixture off");
  out.require(std::abs(diou(a, b) - (1.0 / 7.0 - 1.0 / 9.0)) < 1e-9,
              "diou fixture off");
}

void assignment_exactness(Outcome& out) {
  Rng rng(31337);
  for (int trial = 0; trial < 500 && out.ok; ++trial) {
    const std::size_t rows = 1 + rng.index(6);
    const std::size_t cols = rows + rng.index(7 - rows + 1);
    CostMatrix costs;
    costs.rows = rows;
    costs.cols = cols;
    costs.entries.resize(rows * cols);
    for (double& e : costs.entries) e = rng.uniform(-1.0, 1.0);

    const auto pairs = solve_optimal(costs);
    out.require(matching_cost(costs, pairs) == oracle::exhaustive_min_cost(costs),
                "optimal cost differs from the exhaustive minimum");

    if (2 * rows <= cols) {
      const auto otm = solve_one_to_many(costs);
      std::set<std::size_t> best_cols, sub_cols;
      for (const auto& [g, p] : otm.best) best_cols.insert(p);
      for (const auto& [g, p] : otm.suboptimal) sub_cols.insert(p);
      out.require(otm.positive.size() == 2 * rows, "positive set is not 2G");
      out.require(best_cols.size() == rows && sub_cols.size() == rows,
                  "duplicate prediction indices inside a matching");
      for (std::size_t p : sub_cols) {
        out.require(best_cols.count(p) == 0,
                    "best and suboptimal share a prediction");
      }
      out.require(otm.suboptimal_cost >= otm.best_cost - 1e-12,
                  "suboptimal cost below best cost");
    }
  }
}

void loss_identities(Outcome& out) {
  SupervisionConfig cfg;  // alpha 0.6, beta 0.4, C 0.5, tau 0.6

  const double p_o = supervision_target(0.8, 0.9, cfg);
  out.require(std::abs(p_o - 0.84) < 1e-12, "supervision target fixture off");
  const auto fixture =
      ips_loss(std::vector<IpsSample>{{0.8, p_o, 0.5}}, cfg);
  out.require(std::abs(fixture.total - 0.34) < 1e-12, "l_ips fixture off");

  Rng rng(5150);
  for (int i = 0; i < 2000 && out.ok; ++i) {
    std::vector<IpsSample> samples(1 + rng.index(8));
    for (IpsSample& s : samples) {
      s.giou_val = rng.uniform(-1.0, 1.0);
      s.target = rng.uniform(0.0, 1.0);
      s.ips = rng.uniform(0.0, 1.0);
    }
    const IpsLoss ips = ips_loss(samples, cfg);
    out.require(ips.total == ips.high + ips.low, "l_ips != l_ips_h + l_ips_l");

    const double l_cls = rng.uniform(0.0, 2.0);
    const double l_box = rng.uniform(0.0, 2.0);
    const LossBreakdown breakdown = total_loss(ips, l_cls, l_box, cfg);
    out.require(breakdown.total ==
                    3.0 * ips.total + 2.0 * l_cls + 5.0 * l_box,
                "total loss is not 3/2/5-weighted");
  }
}

void gradient_check(Outcome& out) {
  SupervisionConfig sup;
  Rng rng(8128);
  for (int trial = 0; trial < 1000 && out.ok; ++trial) {
    const std::size_t dim = 1 + rng.index(8);
    IppModel model;
    model.weights.resize(dim);
    for (double& w : model.weights) w = rng.uniform(-1.5, 1.5);
    model.bias = rng.uniform(-1.5, 1.5);

    IppSample sample;
    sample.embedding.resize(dim);
    for (double& v : sample.embedding) v = rng.uniform(-1.0, 1.0);
    sample.giou_val = rng.uniform(-1.0, 1.0);
    sample.target = rng.uniform(0.0, 1.0);

    const auto check = finite_diff_check(model, sample, sup, 1e-4);
    out.require(check.ok, "analytic gradient misses finite differences");
  }

  // Negative control: a corrupted analytic value must be caught.
  IppModel model;
  model.weights = {0.4, -0.3};
  model.bias = 0.2;
  IppSample sample;
  sample.embedding = {0.8, -0.6};
  sample.giou_val = 0.9;
  sample.target = 0.9;
  const auto honest =
      gradient(model, sample.embedding, sample.giou_val, sample.target, sup);
  const double h = 1e-6;
  IppModel probe = model;
  probe.weights[0] += h;
  const double plus = sample_loss(probe, sample, sup);
  probe.weights[0] -= 2 * h;
  const double minus = sample_loss(probe, sample, sup);
  const double numeric = (plus - minus) / (2 * h);
  const double corrupted = honest.weights[0] + 0.05;
  const double rel = std::abs(numeric - corrupted) /
                     std::max({std::abs(numeric), std::abs(corrupted), 1e-8});
  out.require(rel > 1e-4 && std::abs(numeric - corrupted) > 1e-8,
              "corrupted gradient slipped through");
}

void teacher_recovery(Outcome& out) {
  SupervisionConfig sup;
  Rng rng(2718);
  IppModel teacher;
  teacher.weights = {1.2, -0.8, 0.5, 1.6};
  teacher.bias = -0.2;

  const auto draw = [&](std::size_t n) {
    std::vector<IppSample> set;
    for (std::size_t i = 0; i < n; ++i) {
      IppSample s;
      s.embedding.resize(teacher.dim());
      for (double& v : s.embedding) v = rng.uniform(-1.0, 1.0);
      s.giou_val = 0.9;  // high branch: the target is P_o itself
      s.target = forward(teacher, s.embedding);
      set.push_back(std::move(s));
    }
    return set;
  };
  const auto train_set = draw(512);
  const auto held_out = draw(256);

  TrainerConfig cfg;  // default learning rate
  cfg.steps = 5000;
  cfg.seed = 99;
  const TrainResult first = train(train_set, cfg, sup);
  const TrainResult second = train(train_set, cfg, sup);
  out.require(first.model.weights == second.model.weights &&
                  first.model.bias == second.model.bias,
              "training is not bit-identical across reruns");

  double mae = 0.0;
  for (const IppSample& s : held_out) {
    mae += std::abs(s.target - forward(first.model, s.embedding));
  }
  mae /= static_cast<double>(held_out.size());
  out.require(mae < 0.1,
              "held-out MAE " + std::to_string(mae) + " not below 0.1");
}

void selection_oracle(Outcome& out) {
  Rng rng(424242);
  for (int trial = 0; trial < 1000 && out.ok; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    std::vector<double> scores(n);
    for (double& s : scores) {
      s = rng.uniform(0.0, 1.0);
      if (rng.uniform() < 0.15) s = 0.25;  // deliberate ties
    }
    const std::size_t k = 1 + rng.index(n + 5);
    out.require(topk_indices(scores, k) == oracle::topk_by_sort(scores, k),
                "topk differs from the sorting oracle");

    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) {
      transformed[i] = std::exp(2.0 * scores[i]) + 1.0;
    }
    const auto base = topk_indices(scores, k);
    const auto moved = topk_indices(transformed, k);
    out.require(std::set<std::size_t>(base.begin(), base.end()) ==
                    std::set<std::size_t>(moved.begin(), moved.end()),
                "selection changed under an increasing transform");
  }
}

void nms_oracle(Outcome& out) {
  PostprocessConfig cfg;
  Rng rng(6174);
  for (int trial = 0; trial < 1000 && out.ok; ++trial) {
    std::vector<Detection> scene;
    const std::size_t n = rng.index(31);
    for (std::size_t i = 0; i < n; ++i) {
      scene.push_back(
          {oracle::random_box(rng), {0.0}, rng.uniform(0.001, 0.999)});
    }
    const auto fast = ips_guided_nms(scene, cfg);
    const auto slow = oracle::greedy_nms(scene, cfg.nms_diou_threshold);
    bool equal = fast.size() == slow.size();
    for (std::size_t i = 0; equal && i < fast.size(); ++i) {
      equal = fast[i].ips == slow[i].ips && fast[i].box.cx == slow[i].box.cx;
    }
    out.require(equal, "nms differs from the greedy oracle");

    const auto twice = ips_guided_nms(fast, cfg);
    out.require(twice.size() == fast.size(), "nms is not idempotent");
    if (!scene.empty()) {
      double top = 0.0;
      for (const Detection& d : scene) top = std::max(top, d.ips);
      out.require(!fast.empty() && fast.front().ips == top,
                  "max-IPS detection was dropped");
    }
  }
}

void dual_criteria_truth_table(Outcome& out) {
  PostprocessConfig cfg;
  const auto logit_for = [](double p) { return std::log(p / (1.0 - p)); };

  const Detection hi_hi{{0.5, 0.5, 0.2, 0.2},
                        {logit_for(0.9), logit_for(0.2)},
                        0.8};
  const Detection lo_hi{{0.5, 0.5, 0.2, 0.2},
                        {logit_for(0.2), logit_for(0.3)},
                        0.8};
  const Detection lo_lo{{0.5, 0.5, 0.2, 0.2},
                        {logit_for(0.2), logit_for(0.3)},
                        0.1};
  const Detection hi_lo{{0.5, 0.5, 0.2, 0.2},
                        {logit_for(0.9), logit_for(0.2)},
                        0.1};

  const auto known = dual_criteria(hi_hi, cfg);
  out.require(known.has_value() && known->verdict == Verdict::kKnown &&
                  known->class_index == 0,
              "high/high quadrant is not Known");
  const auto unknown = dual_criteria(lo_hi, cfg);
  out.require(unknown.has_value() && unknown->verdict == Verdict::kUnknown,
              "low/high quadrant is not Unknown");
  out.require(!dual_criteria(lo_lo, cfg).has_value(),
              "low/low quadrant is not Background");
  out.require(!dual_criteria(hi_lo, cfg).has_value(),
              "high/low quadrant is not Background");

  Rng rng(5040);
  std::vector<Detection> pool;
  for (int i = 0; i < 200; ++i) {
    pool.push_back({oracle::random_box(rng),
                    {rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)},
                    rng.uniform(0.001, 0.999)});
  }
  std::size_t previous = pool.size() + 1;
  for (int step = 0; step <= 20; ++step) {
    PostprocessConfig sweep = cfg;
    sweep.ips_threshold = 0.05 * static_cast<double>(step);
    std::size_t verdicts = 0;
    for (const Detection& d : pool) {
      verdicts += dual_criteria(d, sweep).has_value() ? 1 : 0;
    }
    out.require(verdicts <= previous,
                "raising ips_threshold added non-background verdicts");
    previous = verdicts;
  }
}

void metric_fixtures(Outcome& out) {
  MatchOutcome counts;
  counts.unknown = {2, 1, 2};
  out.require(std::abs(u_precision(counts) - 2.0 / 3.0) < 1e-12 &&
                  std::abs(u_recall(counts) - 0.5) < 1e-12 &&
                  std::abs(u_f1(counts) - 4.0 / 7.0) < 1e-12,
              "u_pre/u_rec/u_f1 fixture off");

  for (std::size_t n = 0; n <= 12 && out.ok; ++n) {
    for (std::uint32_t bits = 0; bits < (1u << n) && out.ok; ++bits) {
      std::vector<bool> pattern(n);
      std::vector<RankedFlag> flags;
      std::int64_t tp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        pattern[i] = (bits >> i) & 1u;
        tp += pattern[i] ? 1 : 0;
        flags.push_back({1.0 - 1e-4 * static_cast<double>(i), pattern[i]});
      }
      for (std::int64_t extra : {std::int64_t{0}, std::int64_t{1}}) {
        const double got = average_precision(flags, tp + extra);
        const double want = oracle::pr_ap(pattern, tp + extra);
        out.require(std::abs(got - want) < 1e-12,
                    "average precision differs from the PR oracle");
      }
    }
  }

  // Threshold sweep: an IoU ~0.72 prediction is a TP at 0.50..0.70 only.
  const BBox gt_box = box_from_corners(0.2, 0.2, 0.8, 0.8);
  const BBox pred_box =
      box_from_corners(0.2, 0.2 + 0.6 * 0.16, 0.8, 0.8 + 0.6 * 0.16);
  const double overlap = iou(gt_box, pred_box);
  out.require(overlap > 0.70 && overlap < 0.75, "sweep fixture overlap drifted");
  const std::vector<std::vector<FinalPrediction>> preds{
      {{pred_box, Verdict::kKnown, 0, 0.9}}};
  const std::vector<std::vector<GroundTruthObject>> gts{{{gt_box, 0}}};
  out.require(std::abs(map_over_thresholds(preds, gts) - 0.5) < 1e-12,
              "mAP sweep fixture is not 0.5");
}

void end_to_end(Outcome& out) {
  RunOptions options;
  options.set_seed(20260809);
  options.scenes = 200;
  options.pipeline.trainer.steps = 3000;
  options.pipeline.postprocess.ips_threshold = 0.62;
  options.validate();

  std::vector<SceneProposals> proposals;
  std::vector<SceneGroundTruth> gts;
  for (SyntheticScene& scene :
       generate_scenes(options.synth, options.scenes)) {
    proposals.push_back(std::move(scene.proposals));
    gts.push_back(std::move(scene.ground_truth));
  }

  const PipelineResult first = run_pipeline(proposals, gts, options.pipeline);
  out.require(first.report.u_rec >= 0.9,
              "U-REC " + std::to_string(first.report.u_rec) + " below 0.9");
  out.require(first.report.u_pre >= 0.9,
              "U-PRE " + std::to_string(first.report.u_pre) + " below 0.9");

  const PipelineResult second = run_pipeline(proposals, gts, options.pipeline);
  const fs::path dir_a = fs::temp_directory_path() / "uodet-acc-a";
  const fs::path dir_b = fs::temp_directory_path() / "uodet-acc-b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  write_pipeline_artifacts(dir_a, first, gts, options.pipeline);
  write_pipeline_artifacts(dir_b, second, gts, options.pipeline);
  for (const char* name :
       {"model.txt", "predictions.jsonl", "report.json", "pr_unknown.txt"}) {
    out.require(slurp(dir_a / name) == slurp(dir_b / name),
                std::string("artifact ") + name + " differs between runs");
  }
  out.detail = "u_rec=" + std::to_string(first.report.u_rec) +
               " u_pre=" + std::to_string(first.report.u_pre);
}

void supervision_ablation(Outcome& out) {
  const auto mean_f1 = [](double alpha, double beta) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      RunOptions options;
      options.set_seed(seed);
      options.scenes = 60;
      options.synth.box_jitter = 0.02;
      options.synth.logit_noise = 0.15;
      options.pipeline.supervision.alpha = alpha;
      options.pipeline.supervision.beta = beta;
      options.pipeline.trainer.steps = 3000;
      options.pipeline.postprocess.ips_threshold = 0.62;
      options.pipeline.postprocess.nms_diou_threshold = 0.6;
      options.validate();

      std::vector<SceneProposals> proposals;
      std::vector<SceneGroundTruth> gts;
      for (SyntheticScene& scene :
           generate_scenes(options.synth, options.scenes)) {
        proposals.push_back(std::move(scene.proposals));
        gts.push_back(std::move(scene.ground_truth));
      }
      sum += run_pipeline(proposals, gts, options.pipeline).report.u_f1;
    }
    return sum / 5.0;
  };

  const double joint = mean_f1(0.6, 0.4);
  const double positional_only = mean_f1(1.0, 0.0);
  const double categorical_only = mean_f1(0.0, 1.0);

  out.require(joint >= positional_only,
              "joint supervision loses to the positional-only variant");
  out.require(joint >= categorical_only,
              "joint supervision loses to the categorical-only variant");
  char buf[96];
  std::snprintf(buf, sizeof(buf), "joint=%.3f pos=%.3f cls=%.3f", joint,
                positional_only, categorical_only);
  out.detail = buf;
}

}  // namespace

int main() {
  run_criterion(1, "geometry agrees with the rasterization oracle",
                geometry_oracle, 10.0);
  run_criterion(2, "hand-computed GIoU/DIoU fixtures", geometry_fixtures);
  run_criterion(3, "assignment matches the exhaustive optimum",
                assignment_exactness, 30.0);
  run_criterion(4, "loss identities and the l_ips fixture", loss_identities);
  run_criterion(5, "analytic gradients match finite differences",
                gradient_check);
  run_criterion(6, "teacher recovery under the default trainer",
                teacher_recovery);
  run_criterion(7, "top-k selection equals the sorting oracle",
                selection_oracle);
  run_criterion(8, "IPS-guided NMS equals the greedy oracle", nms_oracle);
  run_criterion(9, "dual-criteria truth table and monotonicity",
                dual_criteria_truth_table);
  run_criterion(10, "unknown metrics and AP against brute force",
                metric_fixtures);
  run_criterion(11, "end-to-end recall/precision and determinism",
                end_to_end, 120.0);
  run_criterion(12, "joint supervision beats single-signal variants",
                supervision_ablation);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
