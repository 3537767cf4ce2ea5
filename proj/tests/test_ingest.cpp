#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "smudge/error.hpp"
#include "smudge/ingest.hpp"

using namespace smudge;
using nlohmann::json;

namespace {

json word(const std::string& text, std::vector<double> box) {
  return {{"text", text}, {"bbox", box}};
}

json one_page(json words, double w = 100, double h = 200) {
  return {{"doc_id", "d1"},
          {"pages", {{{"page_num", 1}, {"width", w}, {"height", h},
                      {"segments", {{{"words", words}}}}}}}};
}

std::string error_of(const json& doc) {
  try {
    (void)parse_ocr(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Ocr, ParsesPixels) {
  const auto layout = parse_ocr(one_page({word("Total", {1, 2, 30, 12}), word("Due", {35, 2, 50, 12})}));
  ASSERT_EQ(layout.pages.size(), 1u);
  EXPECT_EQ(layout.doc_id, "d1");
  EXPECT_EQ(layout.pages[0].segments[0].words[1].text, "Due");
  EXPECT_EQ(layout.pages[0].segments[0].words[1].bbox, (BBox{35, 2, 50, 12}));
}

TEST(Ocr, ScalesNormalizedCoordinates) {
  auto doc = one_page({word("a", {0.1, 0.5, 0.2, 0.75})});
  doc["coords"] = "normalized";
  const auto layout = parse_ocr(doc);
  EXPECT_EQ(layout.pages[0].segments[0].words[0].bbox, (BBox{10, 100, 20, 150}));
}

TEST(Ocr, ClampsToPage) {
  const auto layout = parse_ocr(one_page({word("a", {-5, 10, 120, 250})}));
  EXPECT_EQ(layout.pages[0].segments[0].words[0].bbox, (BBox{0, 10, 100, 200}));
}

TEST(Ocr, FieldPathInErrors) {
  auto doc = one_page({word("a", {1, 1, 2, 2}), {{"text", "b"}}});
  EXPECT_NE(error_of(doc).find("$.pages[0].segments[0].words[1].bbox"), std::string::npos);
  doc = one_page({word("a", {1, 1, 2, 2})});
  doc["pages"][0]["width"] = "wide";
  EXPECT_NE(error_of(doc).find("$.pages[0].width"), std::string::npos);
}

TEST(Ocr, RejectsInvertedBox) {
  EXPECT_THROW((void)parse_ocr(one_page({word("a", {20, 1, 10, 2})})), ValidationError);
}

TEST(Ocr, RejectsLineBreakInWord) {
  EXPECT_THROW((void)parse_ocr(one_page({word("a\nb", {1, 1, 2, 2})})), ValidationError);
}

TEST(Ocr, RejectsNonPositiveExtent) {
  EXPECT_THROW((void)parse_ocr(one_page({word("a", {0, 0, 0, 0})}, 0, 10)), ValidationError);
}

TEST(Ocr, DropsBlankWordsWithWarning) {
  Warnings w;
  const auto layout = parse_ocr(one_page({word("  ", {1, 1, 2, 2}), word("x", {3, 1, 4, 2})}), &w);
  EXPECT_EQ(layout.pages[0].segments[0].words.size(), 1u);
  ASSERT_EQ(w.size(), 1u);
  Warnings w2;
  const auto empty = parse_ocr(one_page({word(" ", {1, 1, 2, 2})}), &w2);
  EXPECT_TRUE(empty.pages[0].segments.empty());
  EXPECT_EQ(w2.size(), 2u);
}

TEST(Ocr, SortsPagesAndRejectsDuplicates) {
  json doc = {{"doc_id", "d"},
              {"pages", {{{"page_num", 2}, {"width", 1}, {"height", 1}, {"segments", json::array()}},
                         {{"page_num", 1}, {"width", 1}, {"height", 1}, {"segments", json::array()}}}}};
  const auto layout = parse_ocr(doc);
  EXPECT_EQ(layout.pages[0].page_num, 1);
  doc["pages"][1]["page_num"] = 2;
  EXPECT_THROW((void)parse_ocr(doc), ValidationError);
}

TEST(Ocr, JsonRoundTrip) {
  auto doc = one_page({word("a", {0.1, 0.5, 0.2, 0.75})});
  doc["coords"] = "normalized";
  const auto layout = parse_ocr(doc);
  EXPECT_EQ(parse_ocr(ocr_to_json(layout)), layout);
}

TEST(GroundTruth, ParsesSamples) {
  const json doc = {{"dataset", "x"},
                    {"samples", {{{"qid", "q1"}, {"doc_id", "d"}, {"question", "?"},
                                  {"answers", {"a", "b"}}, {"question_type", "form"},
                                  {"answer_page", 2}}}}};
  const auto gt = parse_ground_truth(doc);
  ASSERT_EQ(gt.samples.size(), 1u);
  EXPECT_EQ(gt.dataset, "x");
  EXPECT_EQ(gt.samples[0].answers.size(), 2u);
  EXPECT_EQ(gt.samples[0].question_type, "form");
  EXPECT_EQ(gt.samples[0].answer_page, 2);
}

TEST(GroundTruth, RejectsBadAnswers) {
  json doc = {{"samples", {{{"qid", "q7"}, {"doc_id", "d"}, {"answers", json::array()}}}}};
  try {
    (void)parse_ground_truth(doc);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("q7"), std::string::npos);
  }
  doc["samples"][0]["answers"] = {" "};
  EXPECT_THROW((void)parse_ground_truth(doc), ValidationError);
  doc["samples"][0]["answers"] = {"x"};
  doc["samples"].push_back(doc["samples"][0]);
  EXPECT_THROW((void)parse_ground_truth(doc), ValidationError);
}

TEST(Predictions, ParsesAndValidates) {
  json doc = {{"model", "m"},
              {"predictions", {{{"qid", "q1"}, {"answer", ""}}, {{"qid", "q2"}, {"answer", "x"},
                                                                  {"confidence", 0.4}}}}};
  const auto run = parse_predictions(doc);
  EXPECT_EQ(run.model, "m");
  EXPECT_EQ(run.predictions.at("q1").answer, "");
  EXPECT_DOUBLE_EQ(*run.predictions.at("q2").confidence, 0.4);
  doc["predictions"][1]["confidence"] = 1.5;
  EXPECT_THROW((void)parse_predictions(doc), ValidationError);
  doc["predictions"][1]["confidence"] = 0.5;
  doc["predictions"][1]["qid"] = "q1";
  EXPECT_THROW((void)parse_predictions(doc), ValidationError);
}

TEST(Files, MalformedJsonReportsPosition) {
  const auto path = std::filesystem::temp_directory_path() / "smudge_bad.json";
  {
    std::ofstream out(path);
    out << "{\n  \"a\": 1,\n  oops\n}\n";
  }
  try {
    (void)read_json_file(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Files, LoadsFixtureBundle) {
  Warnings w;
  const auto bundle = load_bundle(SMUDGE_FIXTURES "/gt.json", SMUDGE_FIXTURES "/ocr", &w);
  EXPECT_EQ(bundle.name, "fixture");
  EXPECT_GE(bundle.samples.size(), 20u);
  EXPECT_EQ(bundle.documents.size(), 5u);
  EXPECT_TRUE(w.empty());
  ASSERT_NE(bundle.find_document("form_004"), nullptr);
  EXPECT_EQ(bundle.find_document("form_004")->pages[0].width, 800);
}

TEST(Files, MissingOcrFile) {
  EXPECT_THROW((void)load_bundle(SMUDGE_FIXTURES "/gt.json", SMUDGE_FIXTURES, nullptr),
               ValidationError);
}
