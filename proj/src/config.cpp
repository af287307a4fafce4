// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace uodet {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key +
                                "': expected a number, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config key '" + key +
                                "': expected a nonnegative integer, got '" +
                                value + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& value) {
  return static_cast<std::size_t>(parse_u64(key, value));
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  supervision.validate();
  trainer.validate();
  postprocess.validate();
  eval.validate();
  if (topk < 1) {
    throw std::invalid_argument("pipeline.topk must be >= 1");
  }
  if (!(lambda_match_cls >= 0.0)) {
    throw std::invalid_argument("pipeline.lambda_match_cls must be >= 0");
  }
  if (!(lambda_match_box >= 0.0)) {
    throw std::invalid_argument("pipeline.lambda_match_box must be >= 0");
  }
}

void RunOptions::validate() const {
  pipeline.validate();
  synth.validate();
}

void apply_config_entry(RunOptions& o, const std::string& key,
                        const std::string& value) {
  if (key == "alpha") {
    o.pipeline.supervision.alpha = parse_double(key, value);
  } else if (key == "beta") {
    o.pipeline.supervision.beta = parse_double(key, value);
  } else if (key == "c_const") {
    o.pipeline.supervision.c_const = parse_double(key, value);
  } else if (key == "tau") {
    o.pipeline.supervision.tau = parse_double(key, value);
  } else if (key == "lambda_ips") {
    o.pipeline.supervision.lambda_ips = parse_double(key, value);
  } else if (key == "lambda_cls") {
    o.pipeline.supervision.lambda_cls = parse_double(key, value);
  } else if (key == "lambda_box") {
    o.pipeline.supervision.lambda_box = parse_double(key, value);
  } else if (key == "learning_rate") {
    o.pipeline.trainer.learning_rate = parse_double(key, value);
  } else if (key == "steps") {
    o.pipeline.trainer.steps = parse_size(key, value);
  } else if (key == "batch_size") {
    o.pipeline.trainer.batch_size = parse_size(key, value);
  } else if (key == "init_scale") {
    o.pipeline.trainer.init_scale = parse_double(key, value);
  } else if (key == "nms_diou") {
    o.pipeline.postprocess.nms_diou_threshold = parse_double(key, value);
  } else if (key == "cls_thresh") {
    o.pipeline.postprocess.known_cls_threshold = parse_double(key, value);
  } else if (key == "ips_thresh") {
    o.pipeline.postprocess.ips_threshold = parse_double(key, value);
  } else if (key == "eval_iou") {
    o.pipeline.eval.iou_threshold = parse_double(key, value);
  } else if (key == "topk") {
    o.pipeline.topk = parse_size(key, value);
  } else if (key == "lambda_match_cls") {
    o.pipeline.lambda_match_cls = parse_double(key, value);
  } else if (key == "lambda_match_box") {
    o.pipeline.lambda_match_box = parse_double(key, value);
  } else if (key == "seed") {
    o.set_seed(parse_u64(key, value));
  } else if (key == "scenes") {
    o.scenes = parse_size(key, value);
  } else if (key == "n_known") {
    o.synth.n_known = parse_size(key, value);
  } else if (key == "n_unknown") {
    o.synth.n_unknown = parse_size(key, value);
  } else if (key == "n_background") {
    o.synth.n_background = parse_size(key, value);
  } else if (key == "dim") {
    o.synth.embedding_dim = parse_size(key, value);
  } else if (key == "classes") {
    o.synth.k_classes = parse_size(key, value);
  } else if (key == "box_jitter") {
    o.synth.box_jitter = parse_double(key, value);
  } else if (key == "logit_noise") {
    o.synth.logit_noise = parse_double(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

RunOptions read_config_file(const std::filesystem::path& path,
                            RunOptions defaults) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" +
                                  std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    try {
      apply_config_entry(defaults, key, value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(path.string() + ":" +
                                  std::to_string(line_no) + ": " + err.what());
    }
  }
  return defaults;
}

void write_config_file(const std::filesystem::path& path,
                       const RunOptions& o) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write config file " + path.string());
  }
  out << "# supervision\n";
  out << "alpha = " << format_g9(o.pipeline.supervision.alpha) << "\n";
  out << "beta = " << format_g9(o.pipeline.supervision.beta) << "\n";
  out << "c_const = " << format_g9(o.pipeline.supervision.c_const) << "\n";
  out << "tau = " << format_g9(o.pipeline.supervision.tau) << "\n";
  out << "lambda_ips = " << format_g9(o.pipeline.supervision.lambda_ips)
      << "\n";
  out << "lambda_cls = " << format_g9(o.pipeline.supervision.lambda_cls)
      << "\n";
  out << "lambda_box = " << format_g9(o.pipeline.supervision.lambda_box)
      << "\n";
  out << "# trainer\n";
  out << "learning_rate = " << format_g9(o.pipeline.trainer.learning_rate)
      << "\n";
  out << "steps = " << o.pipeline.trainer.steps << "\n";
  out << "batch_size = " << o.pipeline.trainer.batch_size << "\n";
  out << "init_scale = " << format_g9(o.pipeline.trainer.init_scale) << "\n";
  out << "# post-process\n";
  out << "nms_diou = " << format_g9(o.pipeline.postprocess.nms_diou_threshold)
      << "\n";
  out << "cls_thresh = "
      << format_g9(o.pipeline.postprocess.known_cls_threshold) << "\n";
  out << "ips_thresh = " << format_g9(o.pipeline.postprocess.ips_threshold)
      << "\n";
  out << "# selection / matching / metrics\n";
  out << "topk = " << o.pipeline.topk << "\n";
  out << "lambda_match_cls = " << format_g9(o.pipeline.lambda_match_cls)
      << "\n";
  out << "lambda_match_box = " << format_g9(o.pipeline.lambda_match_box)
      << "\n";
  out << "eval_iou = " << format_g9(o.pipeline.eval.iou_threshold) << "\n";
  out << "# synthetic scenes\n";
  out << "seed = " << o.synth.seed << "\n";
  out << "scenes = " << o.scenes << "\n";
  out << "n_known = " << o.synth.n_known << "\n";
  out << "n_unknown = " << o.synth.n_unknown << "\n";
  out << "n_background = " << o.synth.n_background << "\n";
  out << "dim = " << o.synth.embedding_dim << "\n";
  out << "classes = " << o.synth.k_classes << "\n";
  out << "box_jitter = " << format_g9(o.synth.box_jitter) << "\n";
  out << "logit_noise = " << format_g9(o.synth.logit_noise) << "\n";
  if (!out) {
    throw std::runtime_error("failed writing config file " + path.string());
  }
}

}  // namespace uodet
