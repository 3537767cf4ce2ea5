#include "smudge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smudge/error.hpp"

namespace smudge {

namespace {

bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

bool is_ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

std::string_view strip_leading_zeros(std::string_view s) {
  auto pos = s.find_first_not_of('0');
  if (pos == std::string_view::npos) {
    return s.empty() ? s : s.substr(s.size() - 1);
  }
  return s.substr(pos);
}

// Canonical decimal string times k, no leading zeros.
std::string multiply(std::string_view canonical, std::uint64_t k) {
  if (canonical == "0" || k == 0) {
    return "0";
  }
  std::string out;
  out.reserve(canonical.size() + 20);
  unsigned __int128 carry = 0;
  for (auto it = canonical.rbegin(); it != canonical.rend(); ++it) {
    unsigned __int128 v = static_cast<unsigned __int128>(*it - '0') * k + carry;
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    carry = v / 10;
  }
  while (carry > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(carry % 10)));
    carry /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void require_digits(std::string_view s) {
  if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ValidationError("numeric_match expects a digit string, got \"" + std::string(s) + "\"");
  }
}

double harmonic(double num_score, double str_score, double wn, double ws) {
  if (num_score <= 0.0 || str_score <= 0.0) {
    return 0.0;
  }
  return (wn + ws) / (wn / num_score + ws / str_score);
}

}  // namespace

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::Numeric:
      return "numeric";
    case AnswerType::Textual:
      return "textual";
    case AnswerType::Hybrid:
      return "hybrid";
  }
  return "unknown";
}

std::optional<AnswerType> parse_answer_type(std::string_view name) {
  for (auto t : {AnswerType::Numeric, AnswerType::Textual, AnswerType::Hybrid}) {
    if (to_string(t) == name) {
      return t;
    }
  }
  return std::nullopt;
}

void SimilarityConfig::validate() const {
  if (!(num_weight > 0.0) || !(str_weight > 0.0) || !std::isfinite(num_weight) ||
      !std::isfinite(str_weight)) {
    throw ValidationError("harmonic weights must be finite and > 0");
  }
  if (!(anls_threshold >= 0.0 && anls_threshold <= 1.0)) {
    throw ValidationError("anls_threshold must lie in [0, 1]");
  }
  for (auto k : scale_factors) {
    if (k < 2) {
      throw ValidationError("scale factors must be integers >= 2");
    }
  }
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  const auto n = s.size();
  auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
  while (i < n) {
    const unsigned char b0 = byte(i);
    std::size_t len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len > 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char bk = byte(i + k);
      if ((bk & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (bk & 0x3F);
      }
    }
    if (ok) {
      // Reject overlong forms, surrogates and out-of-range values.
      static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.push_back(cp);
      i += len;
    } else {
      out.push_back(static_cast<char32_t>(0xDC00 + b0));
      ++i;
    }
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) {
    if (c >= 0xDC80 && c <= 0xDCFF) {
      out.push_back(static_cast<char>(c - 0xDC00));
    } else if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' || c == U'\f' ||
         c == 0x00A0 || c == 0x3000;
}

std::u32string normalize_text(std::string_view s, TextOptions opts) {
  const auto decoded = decode_utf8(s);
  std::u32string out;
  out.reserve(decoded.size());
  bool pending_space = false;
  for (char32_t c : decoded) {
    if (opts.collapse_whitespace && is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    if (opts.lowercase && c >= U'A' && c <= U'Z') {
      c = c - U'A' + U'a';
    }
    out.push_back(c);
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) {
    std::swap(a, b);
  }
  if (b.empty()) {
    return a.size();
  }
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j - 1] + 1, up + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

double nls_normalized(std::u32string_view a, std::u32string_view b) {
  const auto longest = std::max(a.size(), b.size());
  if (longest == 0) {
    return 1.0;
  }
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double nls(std::string_view a, std::string_view b, TextOptions opts) {
  return nls_normalized(normalize_text(a, opts), normalize_text(b, opts));
}

double anls_flattened(std::string_view a, std::string_view b, double threshold, TextOptions opts) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("anls threshold must lie in [0, 1]");
  }
  const double s = nls(a, b, opts);
  return s < threshold ? 0.0 : s;
}

AnswerType classify_answer_type(std::string_view s) {
  bool all_digits = true;
  bool all_alpha = true;
  bool any = false;
  for (char32_t c : decode_utf8(s)) {
    if (is_space(c)) {
      continue;
    }
    any = true;
    all_digits = all_digits && is_digit(c);
    all_alpha = all_alpha && is_ascii_alpha(c);
  }
  if (!any) {
    throw ValidationError("empty answer");
  }
  if (all_digits) {
    return AnswerType::Numeric;
  }
  return all_alpha ? AnswerType::Textual : AnswerType::Hybrid;
}

bool numeric_match(std::string_view a, std::string_view t, std::span<const std::uint64_t> scales) {
  require_digits(a);
  require_digits(t);
  if (a.empty() || t.empty()) {
    return a.empty() && t.empty();
  }
  const auto ca = strip_leading_zeros(a);
  const auto ct = strip_leading_zeros(t);
  if (ca == ct) {
    return true;
  }
  for (auto k : scales) {
    if (multiply(ct, k) == ca || multiply(ca, k) == ct) {
      return true;
    }
  }
  return false;
}

std::string digits_of(std::string_view s) {
  std::string out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out),
               [](char c) { return c >= '0' && c <= '9'; });
  return out;
}

HybridParts split_hybrid(std::string_view s) {
  HybridParts parts;
  std::string rest;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      parts.num_part.push_back(c);
    } else {
      rest.push_back(c);
    }
  }
  parts.str_part = encode_utf8(normalize_text(rest, {.lowercase = false, .collapse_whitespace = true}));
  return parts;
}

MatchScore match_score(std::string_view pred, std::string_view gt, const SimilarityConfig& config) {
  MatchScore out;
  out.answer_type = classify_answer_type(gt);
  if (normalize_text(pred, {.lowercase = false, .collapse_whitespace = true}).empty()) {
    out.empty_prediction = true;
    if (out.answer_type == AnswerType::Hybrid) {
      out.num_score = 0.0;
      out.str_score = 0.0;
    }
    return out;
  }
  switch (out.answer_type) {
    case AnswerType::Textual:
      out.value = nls(pred, gt, config.text);
      break;
    case AnswerType::Numeric:
      out.value = numeric_match(digits_of(pred), digits_of(gt), config.scale_factors) ? 1.0 : 0.0;
      break;
    case AnswerType::Hybrid: {
      const auto p = split_hybrid(pred);
      const auto t = split_hybrid(gt);
      const double num = numeric_match(p.num_part, t.num_part, config.scale_factors) ? 1.0 : 0.0;
      const double str = nls(p.str_part, t.str_part, config.text);
      out.num_score = num;
      out.str_score = str;
      out.value = harmonic(num, str, config.num_weight, config.str_weight);
      break;
    }
  }
  out.value = std::clamp(out.value, 0.0, 1.0);
  return out;
}

}  // namespace smudge
