#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "smudge/error.hpp"
#include "smudge/grounding.hpp"

using namespace smudge;
using testing_util::make_doc;
using testing_util::make_page;

TEST(Distance, ScenarioA) {
  const double d = answer_distance({0, 0, 500, 10}, BBox{500, 0, 1000, 10}, 1000, 1000);
  EXPECT_NEAR(d, 0.5, 1e-12);
}

TEST(Distance, ScenarioB) {
  const double d = answer_distance({0, 0, 50, 10}, BBox{50, 0, 100, 10}, 1000, 1000);
  EXPECT_NEAR(d, 0.05, 1e-12);
}

TEST(Distance, AbsentAndClamped) {
  EXPECT_DOUBLE_EQ(answer_distance({0, 0, 1, 1}, std::nullopt, 10, 10), 1.0);
  EXPECT_DOUBLE_EQ(answer_distance({0, 0, 2, 2}, BBox{8, 8, 10, 10}, 10, 10), 1.0);
  EXPECT_THROW((void)answer_distance({0, 0, 1, 1}, std::nullopt, 0, 10), ValidationError);
}

TEST(Distance, SymmetricAndZeroOnSelf) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> c(0, 500);
  for (int i = 0; i < 1000; ++i) {
    BBox a{c(rng), c(rng), 0, 0};
    a.right = a.left + 10;
    a.bottom = a.top + 10;
    BBox b{c(rng), c(rng), 0, 0};
    b.right = b.left + 5;
    b.bottom = b.top + 5;
    ASSERT_DOUBLE_EQ(answer_distance(a, b, 600, 800), answer_distance(b, a, 600, 800));
    ASSERT_DOUBLE_EQ(answer_distance(a, a, 600, 800), 0.0);
  }
}

TEST(Decay, EndpointsAndShape) {
  EXPECT_DOUBLE_EQ(decay(0.0), 1.0);
  EXPECT_DOUBLE_EQ(decay(1.0), 0.0);
  EXPECT_NEAR(static_cast<double>(decay(0.5)), std::exp(-1.0), 1e-15);
  EXPECT_THROW((void)decay(-0.1), ValidationError);
  EXPECT_THROW((void)decay(1.1), ValidationError);
  long double prev = 2.0L;
  for (int i = 0; i <= 1000; ++i) {
    const long double v = decay(i / 1000.0);
    ASSERT_LT(v, prev);
    prev = v;
  }
}

TEST(Backend, Names) {
  EXPECT_EQ(parse_backend("reading_order"), Backend::ReadingOrder);
  EXPECT_EQ(parse_backend("beta_skeleton"), Backend::BetaSkeleton);
  EXPECT_FALSE(parse_backend("gabriel"));
  EXPECT_EQ(to_string(Backend::BetaSkeleton), "beta_skeleton");
}

TEST(Locate, ExactPhraseInsideLine) {
  auto doc = make_doc({make_page(1, {"Invoice Number 4471", "Total Due 1250 USD"})});
  GroundingConfig cfg;
  const auto span = locate_reading_order("due 1250", doc, cfg);
  ASSERT_TRUE(span);
  EXPECT_DOUBLE_EQ(span->match_nls, 1.0);
  EXPECT_EQ(span->text, "Due 1250");
  EXPECT_EQ(span->words, (std::vector<WordRef>{{1, 1}, {1, 2}}));
  EXPECT_EQ(span->bbox, (BBox{70, 50, 150, 70}));
}

TEST(Locate, DoesNotCrossSegments) {
  auto doc = make_doc({make_page(1, {"alpha beta", "gamma delta"})});
  const auto span = locate_reading_order("beta gamma", doc, {});
  ASSERT_TRUE(span);
  EXPECT_EQ(span->words.size(), 1u);
  EXPECT_LT(span->match_nls, 1.0);
}

TEST(Locate, TieGoesToEarliestPage) {
  auto doc = make_doc({make_page(1, {"x total"}), make_page(2, {"total y"})});
  const auto span = locate_reading_order("total", doc, {});
  ASSERT_TRUE(span);
  EXPECT_EQ(span->page_num, 1);
  EXPECT_EQ(span->words.front(), (WordRef{0, 1}));
}

TEST(Locate, EmptyDocumentOrQuery) {
  auto doc = make_doc({});
  EXPECT_FALSE(locate_reading_order("x", doc, {}));
  auto doc2 = make_doc({make_page(1, {"a b"})});
  EXPECT_FALSE(locate_reading_order("   ", doc2, {}));
}

TEST(Locate, MatchesBruteForce) {
  const std::vector<std::string> vocab{"the", "total", "due", "12", "1250", "usd", "invoice",
                                       "date", "net", "30", "days", "to", "ab", "a"};
  std::mt19937 rng(21);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> nlines(1, 4), nwords(1, 6), qlen(1, 4), npages(1, 2);
  for (int t = 0; t < 300; ++t) {
    std::vector<Page> pages;
    for (int p = 0, np = npages(rng); p < np; ++p) {
      std::vector<std::string> lines;
      for (int l = 0, nl = nlines(rng); l < nl; ++l) {
        std::string line;
        for (int w = 0, nw = nwords(rng); w < nw; ++w) line += vocab[pick(rng)] + " ";
        lines.push_back(line);
      }
      pages.push_back(make_page(p + 1, lines));
    }
    const auto doc = make_doc(pages);
    std::string q;
    for (int w = 0, nq = qlen(rng); w < nq; ++w) q += vocab[pick(rng)] + " ";
    GroundingConfig cfg;
    const auto got = locate_reading_order(q, doc, cfg);
    const auto want = oracle::locate(q, doc, cfg.window_slack);
    ASSERT_EQ(bool(got), bool(want));
    ASSERT_EQ(got->page_num, want->page_num) << q;
    ASSERT_EQ(got->words.front(), (WordRef{want->segment, want->start})) << q;
    ASSERT_EQ(got->words.size(), want->length) << q;
    ASSERT_EQ(got->match_nls, want->score) << q;
  }
}

TEST(Ground, AlignedPredictionScoresOne) {
  auto doc = make_doc({make_page(1, {"Total Due 1250"})});
  GroundingConfig cfg;
  const DocumentIndex index(doc, cfg);
  const auto r = ground("1250", "1250", index, cfg);
  EXPECT_FALSE(r.hallucinated);
  EXPECT_DOUBLE_EQ(r.distance, 0.0);
  EXPECT_DOUBLE_EQ(r.score, 1.0);
}

TEST(Ground, HallucinationZeroesScore) {
  auto doc = make_doc({make_page(1, {"Total Due 1250"})});
  GroundingConfig cfg;
  const DocumentIndex index(doc, cfg);
  const auto r = ground("zzzzzzzz", "1250", index, cfg);
  EXPECT_TRUE(r.hallucinated);
  EXPECT_DOUBLE_EQ(r.distance, 1.0);
  EXPECT_DOUBLE_EQ(r.score, 0.0);
  ASSERT_TRUE(r.pred_span);
  EXPECT_LE(r.pred_span->match_nls, 0.3);
}

TEST(Ground, DifferentPagesAreFar) {
  auto doc = make_doc({make_page(1, {"alpha"}), make_page(2, {"omega"})});
  GroundingConfig cfg;
  const DocumentIndex index(doc, cfg);
  const auto r = ground("omega", "alpha", index, cfg);
  EXPECT_FALSE(r.hallucinated);
  EXPECT_DOUBLE_EQ(r.distance, 1.0);
  EXPECT_DOUBLE_EQ(r.score, 0.0);
}

TEST(Ground, AnswerPageRestrictsGroundTruth) {
  auto doc = make_doc({make_page(1, {"total 30"}), make_page(2, {"share 30"})});
  GroundingConfig cfg;
  const DocumentIndex index(doc, cfg);
  EXPECT_EQ(ground("30", "30", index, cfg).gt_span->page_num, 1);
  EXPECT_EQ(ground("30", "30", index, cfg, 2).gt_span->page_num, 2);
  // unknown page falls back to the whole document
  EXPECT_EQ(ground("30", "30", index, cfg, 9).gt_span->page_num, 1);
}

TEST(BetaBackend, VerbatimAgreesWithReadingOrder) {
  auto doc = make_doc({make_page(1, {"Payment terms net 30 days"})});
  GroundingConfig ro;
  GroundingConfig bs;
  bs.backend = Backend::BetaSkeleton;
  const DocumentIndex ri(doc, ro);
  const DocumentIndex bi(doc, bs);
  const auto a = locate("net 30 days", ri, ro, false);
  const auto b = locate("net 30 days", bi, bs, false);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->words, b->words);
  EXPECT_DOUBLE_EQ(b->match_nls, 1.0);
}

TEST(BetaBackend, AbsentPredictionIsHallucinated) {
  auto doc = make_doc({make_page(1, {"Payment terms net 30 days"})});
  GroundingConfig bs;
  bs.backend = Backend::BetaSkeleton;
  const DocumentIndex bi(doc, bs);
  const auto r = ground("qqqq", "net 30 days", bi, bs);
  EXPECT_TRUE(r.hallucinated);
  EXPECT_DOUBLE_EQ(r.score, 0.0);
  ASSERT_TRUE(r.gt_span);
}

TEST(GroundingConfig, Validate) {
  GroundingConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.locate_threshold = 2;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = {};
  cfg.window_slack = -1;
  EXPECT_THROW(cfg.validate(), ValidationError);
}
