#include "smudge/document.hpp"

#include <algorithm>

#include "smudge/error.hpp"

namespace smudge {

Point centroid(const BBox& box) {
  return {(box.left + box.right) / 2.0, (box.top + box.bottom) / 2.0};
}

BBox merge_bboxes(std::span<const BBox> boxes) {
  if (boxes.empty()) {
    throw ValidationError("empty box sequence");
  }
  BBox merged = boxes.front();
  for (const auto& b : boxes.subspan(1)) {
    merged.left = std::min(merged.left, b.left);
    merged.top = std::min(merged.top, b.top);
    merged.right = std::max(merged.right, b.right);
    merged.bottom = std::max(merged.bottom, b.bottom);
  }
  return merged;
}

std::size_t Page::word_count() const {
  std::size_t n = 0;
  for (const auto& seg : segments) {
    n += seg.words.size();
  }
  return n;
}

std::size_t DocumentLayout::word_count() const {
  std::size_t n = 0;
  for (const auto& p : pages) {
    n += p.word_count();
  }
  return n;
}

const Page* DocumentLayout::find_page(int page_num) const {
  auto it = std::find_if(pages.begin(), pages.end(),
                         [&](const Page& p) { return p.page_num == page_num; });
  return it == pages.end() ? nullptr : &*it;
}

}  // namespace smudge
