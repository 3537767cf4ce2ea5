#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "smudge/grounding.hpp"
#include "smudge/scoring.hpp"

namespace smudge {

/// Shortest decimal string that round-trips to the same double.
[[nodiscard]] std::string format_number(double v);

/// RFC 4180 quoting when the field needs it.
[[nodiscard]] std::string csv_field(std::string_view s);

/// Flat key/value mapping used by config files, report echoes and bindings:
/// alpha, num_weight, str_weight, anls_threshold, scale_factors, lowercase,
/// collapse_whitespace, locate_threshold, backend, window_slack,
/// token_threshold, path_slack.
[[nodiscard]] nlohmann::ordered_json config_to_json(const ScoreConfig& config);

/// Applies the keys present in `mapping` on top of `base`. Unknown keys and
/// ill-typed values raise ValidationError; the result is validated.
[[nodiscard]] ScoreConfig config_from_json(const nlohmann::json& mapping,
                                           const ScoreConfig& base = {});

[[nodiscard]] nlohmann::ordered_json span_to_json(const LocatedSpan& span);
[[nodiscard]] nlohmann::ordered_json sample_to_json(const ScoredSample& sample);
[[nodiscard]] nlohmann::ordered_json aggregates_to_json(const Aggregates& agg);
[[nodiscard]] nlohmann::ordered_json report_to_json(const DatasetReport& report);

/// The full report document, pretty-printed with a trailing newline.
[[nodiscard]] std::string report_document(const DatasetReport& report);

[[nodiscard]] std::string sample_csv_header();
/// One row per sample: qid, doc_id, m, g, d, s, anls, answer type, flags.
[[nodiscard]] std::string sample_csv_row(const ScoredSample& sample);
[[nodiscard]] std::string report_csv(const DatasetReport& report);

[[nodiscard]] std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Debug record for one located query (one JSON object per line).
[[nodiscard]] nlohmann::ordered_json locate_record(std::string_view qid, std::string_view query,
                                                   Backend backend,
                                                   const std::optional<LocatedSpan>& span,
                                                   double locate_threshold);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace smudge
