#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "smudge/cli.hpp"
#include "smudge/ingest.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kFix = SMUDGE_FIXTURES;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = smudge::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("smudge_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::vector<std::string> score_args(const std::string& pred = "pred_model_a.json") {
    return {"score", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
            kFix + "/" + pred, "--out", (dir / "r.json").string()};
  }
  fs::path dir;
};

}  // namespace

TEST_F(Cli, ScoreWritesReport) {
  auto args = score_args();
  args.insert(args.end(), {"--csv", (dir / "r.csv").string()});
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("s: "), std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(doc["model"], "model_a");
  EXPECT_NE(slurp(dir / "r.csv").find("qid,doc_id"), std::string::npos);
}

TEST_F(Cli, ScoreFlagsOverrideConfigFile) {
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"alpha": 0.9, "backend": "beta_skeleton"})";
  }
  auto args = score_args();
  args.insert(args.end(), {"--config", (dir / "cfg.json").string(), "--alpha", "0.5"});
  ASSERT_EQ(run(args).code, 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_DOUBLE_EQ(doc["config"]["alpha"].get<double>(), 0.5);
  EXPECT_EQ(doc["config"]["backend"], "beta_skeleton");
}

TEST_F(Cli, ScoreIsDeterministic) {
  auto args = score_args("pred_model_b.json");
  args.insert(args.end(), {"--threads", "1"});
  ASSERT_EQ(run(args).code, 0);
  const auto first = slurp(dir / "r.json");
  args.back() = "8";
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(first, slurp(dir / "r.json"));
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"bogus"}).code, 2);
  auto args = score_args();
  args.insert(args.end(), {"--alpha", "1.5"});
  EXPECT_EQ(run(args).code, 2);
  args = score_args();
  args.insert(args.end(), {"--backend", "kd_tree"});
  const auto r = run(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("beta_skeleton"), std::string::npos);
  EXPECT_EQ(run({"score", "--gt", kFix + "/nope.json"}).code, 2);
}

TEST_F(Cli, MalformedInputIsUsageError) {
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{ not json";
  }
  auto args = score_args();
  args[6] = (dir / "bad.json").string();
  const auto r = run(args);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("bad.json:1:"), std::string::npos) << r.err;
}

TEST_F(Cli, UnwritableOutputIsRuntimeFailure) {
  auto args = score_args();
  args.back() = (dir / "missing" / "r.json").string();
  EXPECT_EQ(run(args).code, 1);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(run({"--help"}).code, 0); }

TEST_F(Cli, Sweep) {
  auto r = run({"sweep", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
                kFix + "/pred_model_a.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 22);
  r = run({"sweep", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", "--grid", "0, 0.5,1"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, 10), "alpha,s\n0,");
  r = run({"sweep", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", "--grid", "0,abc"});
  EXPECT_EQ(r.code, 2);
  r = run({"sweep", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", "--grid", "0,2"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, Locate) {
  auto r = run({"locate", "--ocr", kFix + "/ocr/invoice_001.json", "--query", "net 30 days",
                "--query", "Globex Industries", "--qid", "t"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  auto first = nlohmann::json::parse(line);
  EXPECT_EQ(first["qid"], "t-0");
  EXPECT_EQ(first["page_num"], 2);
  EXPECT_EQ(first["hallucinated"], false);
  std::getline(lines, line);
  EXPECT_EQ(nlohmann::json::parse(line)["hallucinated"], true);

  r = run({"locate", "--ocr", kFix + "/ocr/invoice_001.json", "--query", "net 30 days",
           "--backend", "beta_skeleton"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["text"], "net 30 days");
}

TEST_F(Cli, Rerank) {
  const auto out = dir / "rr";
  auto r = run({"rerank", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
                kFix + "/pred_model_a.json", kFix + "/pred_model_b.json",
                kFix + "/pred_model_c.json", "--out-dir", out.string(), "--grid", "0,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"rerank.json", "rankings.csv", "movements.csv", "tau.csv",
                        "tau_alpha.csv", "rank_table.csv", "rank_table_baseline.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_NE(r.out.find("model_a"), std::string::npos);

  r = run({"rerank", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", "--out-dir", out.string()});
  EXPECT_EQ(r.code, 2);
  r = run({"rerank", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", kFix + "/pred_model_a.json", "--out-dir", out.string()});
  EXPECT_EQ(r.code, 2);
  r = run({"rerank", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
           kFix + "/pred_model_a.json", kFix + "/pred_model_b.json", "--by", "weird",
           "--out-dir", out.string()});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, AnalyzeRankTable) {
  {
    std::ofstream t(dir / "ranks.csv");
    t << "model,all,form\nA,1,1\nB,2,3\nC,3,2\n";
  }
  auto r = run({"analyze", "--ranks", (dir / "ranks.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "model,volatility,median_rank,robustness");
  {
    std::ofstream t(dir / "empty.csv");
  }
  EXPECT_EQ(run({"analyze", "--ranks", (dir / "empty.csv").string()}).code, 2);
}

TEST_F(Cli, SweepEndpointsMatchScoreAggregates) {
  auto agg = [&](const char* alpha) {
    auto args = score_args("pred_model_b.json");
    args.insert(args.end(), {"--alpha", alpha});
    EXPECT_EQ(run(args).code, 0);
    return nlohmann::json::parse(slurp(dir / "r.json"))["aggregates"];
  };
  const auto at0 = agg("0");
  const auto at1 = agg("1");
  EXPECT_EQ(at0["s"], at0["g"]);
  EXPECT_EQ(at1["s"], at1["m"]);
  const auto r = run({"sweep", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
                      kFix + "/pred_model_b.json", "--grid", "0,1"});
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string header, row0, row1;
  std::getline(in, header);
  std::getline(in, row0);
  std::getline(in, row1);
  EXPECT_DOUBLE_EQ(std::stod(row0.substr(2)), at0["g"].get<double>());
  EXPECT_DOUBLE_EQ(std::stod(row1.substr(2)), at1["m"].get<double>());
}

TEST_F(Cli, RerankTwoRunsOverallOnly) {
  const auto out = dir / "rr";
  const auto r = run({"rerank", "--gt", kFix + "/gt.json", "--ocr-dir", kFix + "/ocr", "--pred",
                      kFix + "/pred_model_a.json", kFix + "/pred_model_b.json", "--by", "none",
                      "--out-dir", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(out / "movements.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
