#include <gtest/gtest.h>

#include "helpers.hpp"
#include "smudge/document.hpp"
#include "smudge/error.hpp"

using namespace smudge;

TEST(BBox, Centroid) {
  const auto c = centroid({0, 10, 100, 30});
  EXPECT_DOUBLE_EQ(c.x, 50);
  EXPECT_DOUBLE_EQ(c.y, 20);
}

TEST(BBox, MergeCoversInputs) {
  std::vector<BBox> boxes{{10, 10, 20, 20}, {5, 15, 12, 40}, {30, 0, 31, 1}};
  const auto m = merge_bboxes(boxes);
  EXPECT_EQ(m, (BBox{5, 0, 31, 40}));
  for (const auto& b : boxes) EXPECT_TRUE(m.contains(b));
}

TEST(BBox, MergeEmptyThrows) {
  EXPECT_THROW((void)merge_bboxes({}), ValidationError);
}

TEST(Layout, WordCountAndFindPage) {
  auto doc = testing_util::make_doc({testing_util::make_page(1, {"a b c", "d"}),
                                     testing_util::make_page(3, {"e f"})});
  EXPECT_EQ(doc.word_count(), 6u);
  EXPECT_EQ(doc.pages[0].word_count(), 4u);
  ASSERT_NE(doc.find_page(3), nullptr);
  EXPECT_EQ(doc.find_page(3)->word_count(), 2u);
  EXPECT_EQ(doc.find_page(2), nullptr);
}
