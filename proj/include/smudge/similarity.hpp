#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace smudge {

enum class AnswerType { Numeric, Textual, Hybrid };

[[nodiscard]] std::string_view to_string(AnswerType type);
[[nodiscard]] std::optional<AnswerType> parse_answer_type(std::string_view name);

struct TextOptions {
  bool lowercase = true;
  bool collapse_whitespace = true;
};

struct SimilarityConfig {
  double num_weight = 10.0;
  double str_weight = 1.0;
  double anls_threshold = 0.5;
  // Integer factors k >= 2. A number matches when equal to the other side
  // multiplied by some k, in either direction (which covers the reciprocals).
  std::vector<std::uint64_t> scale_factors{100, 1000, 1000000, 1000000000};
  TextOptions text;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

struct MatchScore {
  double value = 0.0;
  AnswerType answer_type = AnswerType::Textual;
  std::optional<double> num_score;
  std::optional<double> str_score;
  bool empty_prediction = false;
};

struct HybridParts {
  std::string num_part;
  std::string str_part;
};

/// Decodes UTF-8 into code points. Invalid bytes map to U+DC80..U+DCFF so
/// distinct malformed inputs stay distinct.
[[nodiscard]] std::u32string decode_utf8(std::string_view s);
[[nodiscard]] std::string encode_utf8(std::u32string_view s);

[[nodiscard]] bool is_space(char32_t c);

/// Lowercases ASCII letters and collapses whitespace runs into one space,
/// trimming both ends.
[[nodiscard]] std::u32string normalize_text(std::string_view s, TextOptions opts = {});

[[nodiscard]] std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// NLS over already-normalized strings. Two empty strings score 1.
[[nodiscard]] double nls_normalized(std::u32string_view a, std::u32string_view b);

/// 1 - Levenshtein(a', b') / max(|a'|, |b'|) over normalized code points.
[[nodiscard]] double nls(std::string_view a, std::string_view b, TextOptions opts = {});

/// Baseline ANLS per-pair score: NLS, or 0 when NLS falls below `threshold`.
[[nodiscard]] double anls_flattened(std::string_view a, std::string_view b, double threshold,
                                    TextOptions opts = {});

/// Whitespace is ignored. All digits -> Numeric, all ASCII letters -> Textual,
/// anything else -> Hybrid. Throws ValidationError("empty answer").
[[nodiscard]] AnswerType classify_answer_type(std::string_view s);

/// Compares two digit strings as unbounded non-negative integers, exactly or
/// up to one configured scale factor applied to either side. Two empty strings
/// match each other and nothing else. Throws ValidationError on a non-digit.
[[nodiscard]] bool numeric_match(std::string_view a, std::string_view t,
                                 std::span<const std::uint64_t> scales);

[[nodiscard]] std::string digits_of(std::string_view s);

/// Digits in order, and everything else in order with whitespace collapsed.
[[nodiscard]] HybridParts split_hybrid(std::string_view s);

/// Type-aware match score of `pred` against ground truth `gt`, typed by `gt`.
[[nodiscard]] MatchScore match_score(std::string_view pred, std::string_view gt,
                                     const SimilarityConfig& config);

}  // namespace smudge
