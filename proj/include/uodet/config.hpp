// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "uodet/ipp.hpp"
#include "uodet/metrics.hpp"
#include "uodet/postprocess.hpp"
#include "uodet/supervision.hpp"
#include "uodet/synthetic.hpp"

namespace uodet {

/// Every hyperparameter of the algorithmic pipeline in one document.
struct PipelineConfig {
  SupervisionConfig supervision;
  TrainerConfig trainer;
  PostprocessConfig postprocess;
  EvalConfig eval;
  std::size_t topk = 100;
  double lambda_match_cls = 2.0;
  double lambda_match_box = 5.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// The full run document: pipeline hyperparameters plus the synthetic
/// generator knobs. Mirrors the flat key-value config file; every key is
/// also a CLI flag of the same name.
struct RunOptions {
  PipelineConfig pipeline;
  SyntheticSceneSpec synth;
  std::size_t scenes = 50;

  /// One master seed drives scene generation and trainer init.
  void set_seed(std::uint64_t seed) {
    synth.seed = seed;
    pipeline.trainer.seed = seed;
  }

  void validate() const;
};

/// Applies one "key = value" entry. Throws std::invalid_argument for an
/// unknown key or an unparsable value.
void apply_config_entry(RunOptions& options, const std::string& key,
                        const std::string& value);

/// Reads a flat key-value config file ("key = value" lines, '#' comments)
/// on top of the given defaults. Parse and schema problems carry
/// file:line context.
RunOptions read_config_file(const std::filesystem::path& path,
                            RunOptions defaults = {});

void write_config_file(const std::filesystem::path& path,
                       const RunOptions& options);

}  // namespace uodet
