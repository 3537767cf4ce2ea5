#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "smudge/document.hpp"

namespace testing_util {

// one segment per line, words laid out left to right at 10px per character
inline smudge::Page make_page(int num, const std::vector<std::string>& lines, double width = 1000,
                              double height = 1000) {
  smudge::Page page{num, width, height, {}};
  double y = 10;
  for (const auto& line : lines) {
    smudge::Segment seg;
    std::istringstream in(line);
    std::string w;
    double x = 10;
    while (in >> w) {
      const double len = 10.0 * static_cast<double>(w.size());
      seg.words.push_back({w, {x, y, x + len, y + 20}});
      x += len + 10;
    }
    page.segments.push_back(seg);
    y += 40;
  }
  return page;
}

inline smudge::DocumentLayout make_doc(std::vector<smudge::Page> pages,
                                       std::string id = "doc") {
  return {std::move(id), std::move(pages)};
}

}  // namespace testing_util
