#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "smudge/document.hpp"

namespace smudge {

using Warnings = std::vector<std::string>;

struct GroundTruth {
  std::string dataset;
  std::vector<QASample> samples;
};

struct DatasetBundle {
  std::string name;
  std::map<std::string, DocumentLayout> documents;
  std::vector<QASample> samples;

  [[nodiscard]] const DocumentLayout* find_document(const std::string& doc_id) const;
};

struct PredictionRun {
  std::string model;
  std::map<std::string, Prediction> predictions;
};

// All parse_* functions throw ParseError for schema violations (message names
// the offending field path) and ValidationError for semantic violations.

/// Canonical OCR document. Pages come back sorted by page_num, normalized
/// coordinates are scaled to pixels, boxes are clamped to the page, and empty
/// segments or blank words are dropped with a warning.
[[nodiscard]] DocumentLayout parse_ocr(const nlohmann::json& doc, Warnings* warnings = nullptr);
[[nodiscard]] DocumentLayout load_ocr(const std::filesystem::path& path,
                                      Warnings* warnings = nullptr);
/// Inverse of parse_ocr, always in pixel coordinates.
[[nodiscard]] nlohmann::json ocr_to_json(const DocumentLayout& layout);

[[nodiscard]] GroundTruth parse_ground_truth(const nlohmann::json& doc);
[[nodiscard]] GroundTruth load_ground_truth(const std::filesystem::path& path);

[[nodiscard]] PredictionRun parse_predictions(const nlohmann::json& doc);
[[nodiscard]] PredictionRun load_predictions(const std::filesystem::path& path);

/// Ground truth plus `<ocr_dir>/<doc_id>.json` for every referenced document.
[[nodiscard]] DatasetBundle load_bundle(const std::filesystem::path& gt_path,
                                        const std::filesystem::path& ocr_dir,
                                        Warnings* warnings = nullptr);

/// Reads and parses a JSON file, reporting syntax errors with line and column.
[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace smudge
