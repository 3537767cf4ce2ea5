#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace smudge {

/// Axis-aligned box in page-pixel coordinates, origin at the top-left corner.
struct BBox {
  double left = 0.0;
  double top = 0.0;
  double right = 0.0;
  double bottom = 0.0;

  [[nodiscard]] bool contains(const BBox& other) const {
    return left <= other.left && top <= other.top && right >= other.right &&
           bottom >= other.bottom;
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

[[nodiscard]] Point centroid(const BBox& box);

/// Smallest box covering every input box (min left/top, max right/bottom).
/// Throws ValidationError("empty box sequence") on an empty input.
[[nodiscard]] BBox merge_bboxes(std::span<const BBox> boxes);

struct Word {
  std::string text;
  BBox bbox;

  friend bool operator==(const Word&, const Word&) = default;
};

/// Words in the OCR provider's reading order.
struct Segment {
  std::vector<Word> words;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct Page {
  int page_num = 0;
  double width = 0.0;
  double height = 0.0;
  std::vector<Segment> segments;

  [[nodiscard]] std::size_t word_count() const;

  friend bool operator==(const Page&, const Page&) = default;
};

struct DocumentLayout {
  std::string doc_id;
  std::vector<Page> pages;

  [[nodiscard]] std::size_t word_count() const;
  [[nodiscard]] const Page* find_page(int page_num) const;

  friend bool operator==(const DocumentLayout&, const DocumentLayout&) = default;
};

struct QASample {
  std::string qid;
  std::string doc_id;
  std::string question;
  std::vector<std::string> answers;
  std::optional<std::string> question_type;
  std::optional<int> answer_page;
};

struct Prediction {
  std::string qid;
  std::string answer;
  std::optional<double> confidence;
};

}  // namespace smudge
