// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace uodet {
namespace {

using nlohmann::json;

std::string escape_string(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void append_number_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += format_number(values[i]);
  }
  out += ']';
}

void append_box(std::string& out, const BBox& box) {
  const double values[4] = {box.cx, box.cy, box.w, box.h};
  append_number_array(out, values);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string() + " for reading");
  }
  return in;
}

[[noreturn]] void schema_error(const std::filesystem::path& path,
                               std::size_t line, const std::string& what) {
  throw std::invalid_argument(path.string() + ":" + std::to_string(line) +
                              ": " + what);
}

// Walks a JSONL file, handing each non-empty line to the visitor as a
// parsed object with file:line diagnostics on failure.
template <typename Visitor>
void for_each_record(const std::filesystem::path& path, Visitor&& visit) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& err) {
      schema_error(path, line_no, std::string("malformed JSON: ") + err.what());
    }
    try {
      visit(record);
    } catch (const json::exception& err) {
      schema_error(path, line_no, err.what());
    } catch (const std::invalid_argument& err) {
      schema_error(path, line_no, err.what());
    }
  }
}

BBox parse_box(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 4) {
    throw std::invalid_argument(std::string("field '") + field +
                                "' must be a 4-element number array");
  }
  BBox box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
           j[3].get<double>()};
  if (box.w < 0.0 || box.h < 0.0) {
    throw std::invalid_argument(std::string("field '") + field +
                                "' has negative extent");
  }
  return box;
}

std::vector<double> parse_number_array(const json& j, const char* field) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string("field '") + field +
                                "' must be a number array");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

}  // namespace

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void write_proposals_jsonl(const std::filesystem::path& path,
                           std::span<const SceneProposals> scenes) {
  std::ofstream out = open_out(path);
  std::string line;
  for (const SceneProposals& scene : scenes) {
    line.clear();
    line += "{\"image_id\":\"" + escape_string(scene.image_id) +
            "\",\"proposals\":[";
    for (std::size_t i = 0; i < scene.proposals.size(); ++i) {
      const Proposal& p = scene.proposals[i];
      if (i > 0) line += ',';
      line += "{\"box\":";
      append_box(line, p.box);
      line += ",\"logits\":";
      append_number_array(line, p.logits);
      line += ",\"embedding\":";
      append_number_array(line, p.embedding);
      if (p.ips.has_value()) {
        line += ",\"ips\":" + format_number(*p.ips);
      }
      line += '}';
    }
    line += "]}";
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<SceneProposals> read_proposals_jsonl(
    const std::filesystem::path& path) {
  std::vector<SceneProposals> scenes;
  for_each_record(path, [&](const json& record) {
    SceneProposals scene;
    scene.image_id = record.at("image_id").get<std::string>();
    for (const json& jp : record.at("proposals")) {
      Proposal p;
      p.box = parse_box(jp.at("box"), "box");
      p.logits = parse_number_array(jp.at("logits"), "logits");
      p.embedding = parse_number_array(jp.at("embedding"), "embedding");
      if (p.logits.empty()) {
        throw std::invalid_argument("field 'logits' must not be empty");
      }
      if (jp.contains("ips")) p.ips = jp.at("ips").get<double>();
      scene.proposals.push_back(std::move(p));
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

void write_ground_truth_jsonl(const std::filesystem::path& path,
                              std::span<const SceneGroundTruth> scenes) {
  std::ofstream out = open_out(path);
  std::string line;
  for (const SceneGroundTruth& scene : scenes) {
    line.clear();
    line += "{\"image_id\":\"" + escape_string(scene.image_id) +
            "\",\"objects\":[";
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      const GroundTruthObject& gt = scene.objects[i];
      if (i > 0) line += ',';
      line += "{\"box\":";
      append_box(line, gt.box);
      line += ",\"label\":";
      line += gt.is_unknown() ? "\"unknown\"" : std::to_string(*gt.label);
      line += '}';
    }
    line += "]}";
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<SceneGroundTruth> read_ground_truth_jsonl(
    const std::filesystem::path& path) {
  std::vector<SceneGroundTruth> scenes;
  for_each_record(path, [&](const json& record) {
    SceneGroundTruth scene;
    scene.image_id = record.at("image_id").get<std::string>();
    for (const json& jo : record.at("objects")) {
      GroundTruthObject gt;
      gt.box = parse_box(jo.at("box"), "box");
      const json& label = jo.at("label");
      if (label.is_string()) {
        if (label.get<std::string>() != "unknown") {
          throw std::invalid_argument(
              "field 'label' must be an integer or \"unknown\"");
        }
      } else if (label.is_number_integer()) {
        const int value = label.get<int>();
        if (value < 0) {
          throw std::invalid_argument("field 'label' must be >= 0");
        }
        gt.label = value;
      } else {
        throw std::invalid_argument(
            "field 'label' must be an integer or \"unknown\"");
      }
      scene.objects.push_back(std::move(gt));
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

void write_predictions_jsonl(const std::filesystem::path& path,
                             std::span<const ScenePredictions> scenes) {
  std::ofstream out = open_out(path);
  std::string line;
  for (const ScenePredictions& scene : scenes) {
    line.clear();
    line += "{\"image_id\":\"" + escape_string(scene.image_id) +
            "\",\"predictions\":[";
    for (std::size_t i = 0; i < scene.predictions.size(); ++i) {
      const FinalPrediction& p = scene.predictions[i];
      if (i > 0) line += ',';
      line += "{\"box\":";
      append_box(line, p.box);
      if (p.verdict == Verdict::kKnown) {
        line += ",\"verdict\":\"known\",\"class\":" +
                std::to_string(p.class_index);
      } else {
        line += ",\"verdict\":\"unknown\"";
      }
      line += ",\"confidence\":" + format_number(p.confidence) + "}";
    }
    line += "]}";
    out << line << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<ScenePredictions> read_predictions_jsonl(
    const std::filesystem::path& path) {
  std::vector<ScenePredictions> scenes;
  for_each_record(path, [&](const json& record) {
    ScenePredictions scene;
    scene.image_id = record.at("image_id").get<std::string>();
    for (const json& jp : record.at("predictions")) {
      FinalPrediction p;
      p.box = parse_box(jp.at("box"), "box");
      const std::string verdict = jp.at("verdict").get<std::string>();
      if (verdict == "known") {
        p.verdict = Verdict::kKnown;
        p.class_index = jp.at("class").get<int>();
        if (p.class_index < 0) {
          throw std::invalid_argument("field 'class' must be >= 0");
        }
      } else if (verdict == "unknown") {
        p.verdict = Verdict::kUnknown;
      } else {
        throw std::invalid_argument(
            "field 'verdict' must be \"known\" or \"unknown\"");
      }
      p.confidence = jp.at("confidence").get<double>();
      scene.predictions.push_back(p);
    }
    scenes.push_back(std::move(scene));
  });
  return scenes;
}

void write_report_json(const std::filesystem::path& path,
                       const EvalReport& report) {
  std::ofstream out = open_out(path);
  std::string text = "{\n";
  text += "  \"u_ap\": " + format_number(report.u_ap) + ",\n";
  text += "  \"u_pre\": " + format_number(report.u_pre) + ",\n";
  text += "  \"u_rec\": " + format_number(report.u_rec) + ",\n";
  text += "  \"u_f1\": " + format_number(report.u_f1) + ",\n";
  text += "  \"map_known\": " + format_number(report.map_known) + ",\n";
  text += "  \"counts\": {\n";
  text += "    \"tp_u\": " + std::to_string(report.unknown.tp) + ",\n";
  text += "    \"fp_u\": " + std::to_string(report.unknown.fp) + ",\n";
  text += "    \"fn_u\": " + std::to_string(report.unknown.fn) + ",\n";
  text += "    \"known\": {";
  bool first = true;
  for (const auto& [cls, counts] : report.known) {
    if (!first) text += ",";
    first = false;
    text += "\n      \"" + std::to_string(cls) + "\": {\"tp\": " +
            std::to_string(counts.tp) + ", \"fp\": " +
            std::to_string(counts.fp) + ", \"fn\": " +
            std::to_string(counts.fn) + "}";
  }
  text += first ? "}\n" : "\n    }\n";
  text += "  }\n}\n";
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

EvalReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
    EvalReport report;
    report.u_ap = j.at("u_ap").get<double>();
    report.u_pre = j.at("u_pre").get<double>();
    report.u_rec = j.at("u_rec").get<double>();
    report.u_f1 = j.at("u_f1").get<double>();
    report.map_known = j.at("map_known").get<double>();
    const json& counts = j.at("counts");
    report.unknown.tp = counts.at("tp_u").get<std::int64_t>();
    report.unknown.fp = counts.at("fp_u").get<std::int64_t>();
    report.unknown.fn = counts.at("fn_u").get<std::int64_t>();
    for (const auto& [key, value] : counts.at("known").items()) {
      ClassCounts c;
      c.tp = value.at("tp").get<std::int64_t>();
      c.fp = value.at("fp").get<std::int64_t>();
      c.fn = value.at("fn").get<std::int64_t>();
      report.known[std::stoi(key)] = c;
    }
    return report;
  } catch (const json::exception& err) {
    throw std::invalid_argument(path.string() + ": " + err.what());
  }
}

void write_ipp_model(const std::filesystem::path& path,
                     const IppModel& model) {
  std::ofstream out = open_out(path);
  out << model.dim();
  for (double w : model.weights) out << ' ' << format_number(w);
  out << ' ' << format_number(model.bias) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

IppModel read_ipp_model(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::size_t dim = 0;
  if (!(in >> dim)) {
    throw std::invalid_argument(path.string() +
                                ": model record must start with the dimension");
  }
  IppModel model;
  model.weights.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (!(in >> model.weights[i])) {
      throw std::invalid_argument(path.string() + ": expected " +
                                  std::to_string(dim) + " weights");
    }
  }
  if (!(in >> model.bias)) {
    throw std::invalid_argument(path.string() + ": missing bias value");
  }
  return model;
}

void write_pr_points(const std::filesystem::path& path,
                     std::span<const std::pair<double, double>> points) {
  std::ofstream out = open_out(path);
  out << "# recall precision\n";
  for (const auto& [recall, precision] : points) {
    out << format_number(recall) << ' ' << format_number(precision) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace uodet
