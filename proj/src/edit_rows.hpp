#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string_view>
#include <vector>

namespace smudge::detail {

// Levenshtein DP against a fixed target, grown one character at a time.
// Rows are kept on a stack so a depth-first search can backtrack for free.
class EditRows {
 public:
  explicit EditRows(std::u32string_view target) : target_(target), width_(target.size() + 1) {
    rows_.resize(width_);
    std::iota(rows_.begin(), rows_.end(), std::size_t{0});
  }

  [[nodiscard]] std::size_t length() const { return rows_.size() / width_ - 1; }

  void push(char32_t c) {
    const std::size_t base = rows_.size() - width_;
    rows_.resize(rows_.size() + width_);
    const std::size_t cur = base + width_;
    rows_[cur] = rows_[base] + 1;
    for (std::size_t j = 1; j < width_; ++j) {
      const std::size_t cost = target_[j - 1] == c ? 0 : 1;
      rows_[cur + j] =
          std::min({rows_[cur + j - 1] + 1, rows_[base + j] + 1, rows_[base + j - 1] + cost});
    }
  }

  void push(std::u32string_view s) {
    for (char32_t c : s) {
      push(c);
    }
  }

  // Drops the last `count` characters.
  void pop(std::size_t count) { rows_.resize(rows_.size() - count * width_); }

  [[nodiscard]] std::size_t distance() const { return rows_.back(); }

  // Lower bound on the distance of any extension of the current text.
  [[nodiscard]] std::size_t row_min() const {
    return *std::min_element(rows_.end() - static_cast<std::ptrdiff_t>(width_), rows_.end());
  }

  [[nodiscard]] double similarity() const {
    const std::size_t longest = std::max(length(), target_.size());
    if (longest == 0) {
      return 1.0;
    }
    return 1.0 - static_cast<double>(distance()) / static_cast<double>(longest);
  }

  // Upper bound on similarity() over every extension of the current text.
  [[nodiscard]] double similarity_bound() const {
    const double q = static_cast<double>(target_.size());
    if (q == 0.0) {
      return length() == 0 ? 1.0 : 0.0;
    }
    const double r = static_cast<double>(row_min());
    const double len = static_cast<double>(length());
    return len <= q + r ? q / (q + r) : q / len;
  }

 private:
  std::u32string_view target_;
  std::size_t width_;
  std::vector<std::size_t> rows_;
};

}  // namespace smudge::detail
