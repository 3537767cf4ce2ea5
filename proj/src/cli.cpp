#include "smudge/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "smudge/analysis.hpp"
#include "smudge/error.hpp"
#include "smudge/ingest.hpp"
#include "smudge/report.hpp"
#include "smudge/scoring.hpp"

namespace smudge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags mirror the config mapping one to one; a config file supplies the
// base and explicitly given flags override it.
struct ConfigFlags {
  std::string config_path;
  double alpha = 0.0;
  double num_weight = 0.0;
  double str_weight = 0.0;
  double anls_threshold = 0.0;
  double match_threshold = 0.0;
  std::string backend;
  int window_slack = 0;
  double token_threshold = 0.0;
  int path_slack = 0;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config mapping (flags take precedence)")
        ->check(CLI::ExistingFile);
    options["alpha"] = app->add_option("--alpha", alpha, "Weight of the match score (0..1)");
    options["num_weight"] = app->add_option("--num-weight", num_weight, "Hybrid numeric weight");
    options["str_weight"] = app->add_option("--str-weight", str_weight, "Hybrid text weight");
    options["anls_threshold"] =
        app->add_option("--anls-threshold", anls_threshold, "Baseline ANLS flattening threshold");
    options["locate_threshold"] = app->add_option(
        "--match-threshold", match_threshold, "Localization threshold for predictions");
    options["backend"] = app->add_option("--backend", backend, "reading_order | beta_skeleton")
                             ->check(backend_validator());
    options["window_slack"] =
        app->add_option("--window-slack", window_slack, "Extra tokens per search window");
    options["token_threshold"] =
        app->add_option("--token-threshold", token_threshold, "beta-skeleton token threshold");
    options["path_slack"] =
        app->add_option("--path-slack", path_slack, "beta-skeleton extra path nodes");
  }

  static CLI::Validator backend_validator() {
    return CLI::Validator(
        [](std::string& v) -> std::string {
          if (parse_backend(v)) {
            return {};
          }
          return "unknown backend \"" + v + "\"; valid backends: reading_order, beta_skeleton";
        },
        "BACKEND");
  }

  [[nodiscard]] ScoreConfig resolve() const {
    ScoreConfig base;
    if (!config_path.empty()) {
      base = config_from_json(read_json_file(config_path));
    }
    json overrides = json::object();
    auto set = [&](const char* key, const auto& value) {
      if (options.at(key)->count() > 0) {
        overrides[key] = value;
      }
    };
    set("alpha", alpha);
    set("num_weight", num_weight);
    set("str_weight", str_weight);
    set("anls_threshold", anls_threshold);
    set("locate_threshold", match_threshold);
    set("backend", backend);
    set("window_slack", window_slack);
    set("token_threshold", token_threshold);
    set("path_slack", path_slack);
    return config_from_json(overrides, base);
  }
};

struct DatasetFlags {
  std::string gt;
  std::string ocr_dir;
  unsigned threads = 0;

  void attach(CLI::App* app) {
    app->add_option("--gt", gt, "Ground-truth file")->required()->check(CLI::ExistingFile);
    app->add_option("--ocr-dir", ocr_dir, "Directory of <doc_id>.json OCR files")
        ->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--threads", threads, "Scoring threads (default: SMUDGE_THREADS or 1)");
  }
};

void print_warnings(const Warnings& warnings, std::ostream& err) {
  for (const auto& w : warnings) {
    err << "warning: " << w << "\n";
  }
}

PredictionRun load_run(const std::string& path) {
  auto run = load_predictions(path);
  if (run.model.empty()) {
    run.model = fs::path(path).stem().string();
  }
  return run;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw ValidationError("--grid: \"" + item + "\" is not a number");
    }
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("--grid: " + item + " is outside [0, 1]");
    }
    grid.push_back(v);
  }
  if (grid.empty()) {
    throw ValidationError("--grid is empty");
  }
  return grid;
}

void emit(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file_atomic(path, contents);
  }
}

void print_aggregates(const DatasetReport& report, std::ostream& out) {
  const auto& a = report.overall;
  out << "model: " << report.model << "\n"
      << "samples: " << a.count << " (missing " << a.missing << ", hallucinated "
      << a.hallucinated << ")\n"
      << "s: " << format_number(a.s) << "\n"
      << "m: " << format_number(a.m) << "\n"
      << "g: " << format_number(a.g) << "\n"
      << "anls: " << format_number(a.anls) << "\n";
  if (!report.unmatched_predictions.empty()) {
    out << "unmatched predictions: " << report.unmatched_predictions.size() << "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grounding-aware scoring for document VQA predictions", "smudge"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "Score one prediction run");
  DatasetFlags score_data;
  ConfigFlags score_cfg;
  std::string score_pred;
  std::string score_out;
  std::string score_csv;
  score_data.attach(score);
  score_cfg.attach(score);
  score->add_option("--pred", score_pred, "Prediction file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "Report document (JSON)")->required();
  score->add_option("--csv", score_csv, "Per-sample table (CSV)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Aggregate composite score over an alpha grid");
  DatasetFlags sweep_data;
  ConfigFlags sweep_cfg;
  std::string sweep_pred;
  std::string sweep_out;
  std::string sweep_grid;
  sweep_data.attach(sweep);
  sweep_cfg.attach(sweep);
  sweep->add_option("--pred", sweep_pred, "Prediction file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", sweep_grid, "Comma-separated alpha values (default 0,0.05,...,1)");
  sweep->add_option("--out", sweep_out, "Output CSV (default stdout)");

  // locate
  auto* loc = app.add_subcommand("locate", "Locate query strings in one OCR document");
  ConfigFlags locate_cfg;
  std::string locate_ocr;
  std::vector<std::string> locate_queries;
  std::string locate_qid = "query";
  std::string locate_out;
  locate_cfg.attach(loc);
  loc->add_option("--ocr", locate_ocr, "OCR document")->required()->check(CLI::ExistingFile);
  loc->add_option("--query", locate_queries, "Query string (repeatable)")->required();
  loc->add_option("--qid", locate_qid, "Identifier echoed in the records");
  loc->add_option("--out", locate_out, "Output JSON lines (default stdout)");

  // rerank
  auto* rerank = app.add_subcommand("rerank", "Compare leaderboard rankings under two metrics");
  DatasetFlags rerank_data;
  ConfigFlags rerank_cfg;
  std::vector<std::string> rerank_preds;
  std::string rerank_by = "all";
  std::string rerank_baseline = "anls";
  std::string rerank_target = "composite";
  std::string rerank_out_dir;
  std::string rerank_grid;
  rerank_data.attach(rerank);
  rerank_cfg.attach(rerank);
  rerank->add_option("--pred", rerank_preds, "Prediction files, one per model")
      ->required()
      ->check(CLI::ExistingFile);
  rerank->add_option("--by", rerank_by, "Subsets: all | answer_type | question_type | none")
      ->check(CLI::IsMember({"all", "answer_type", "question_type", "none"}));
  rerank->add_option("--baseline", rerank_baseline, "Baseline metric")
      ->check(CLI::IsMember({"anls", "composite", "match", "grounding"}));
  rerank->add_option("--target", rerank_target, "Target metric")
      ->check(CLI::IsMember({"anls", "composite", "match", "grounding"}));
  rerank->add_option("--grid", rerank_grid, "Alpha grid for the tau-vs-alpha table");
  rerank->add_option("--out-dir", rerank_out_dir, "Directory for report files")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Rank volatility and robustness per model");
  std::string analyze_ranks;
  std::string analyze_out;
  analyze->add_option("--ranks", analyze_ranks, "Rank table CSV: model,<subset>...")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--out", analyze_out, "Output CSV (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (score->parsed()) {
      const auto cfg = score_cfg.resolve();
      Warnings warnings;
      const auto bundle = load_bundle(score_data.gt, score_data.ocr_dir, &warnings);
      print_warnings(warnings, err);
      const auto run = load_run(score_pred);
      const auto report =
          score_dataset(bundle, run, cfg, resolve_thread_count(score_data.threads));
      const auto doc = report_document(report);
      const auto csv = report_csv(report);
      write_file_atomic(score_out, doc);
      if (!score_csv.empty()) {
        write_file_atomic(score_csv, csv);
      }
      print_aggregates(report, out);
    } else if (sweep->parsed()) {
      const auto cfg = sweep_cfg.resolve();
      const auto grid = sweep_grid.empty() ? default_alpha_grid() : parse_grid(sweep_grid);
      Warnings warnings;
      const auto bundle = load_bundle(sweep_data.gt, sweep_data.ocr_dir, &warnings);
      print_warnings(warnings, err);
      const auto points = alpha_sweep(bundle, load_run(sweep_pred), cfg, grid,
                                      resolve_thread_count(sweep_data.threads));
      emit(sweep_out, sweep_csv(points), out);
    } else if (loc->parsed()) {
      const auto cfg = locate_cfg.resolve();
      Warnings warnings;
      const auto layout = load_ocr(locate_ocr, &warnings);
      print_warnings(warnings, err);
      const DocumentIndex index(layout, cfg.grounding);
      std::string lines;
      for (std::size_t i = 0; i < locate_queries.size(); ++i) {
        const auto& q = locate_queries[i];
        if (normalize_text(q).empty()) {
          throw ValidationError("--query must not be blank");
        }
        const auto qid =
            locate_queries.size() == 1 ? locate_qid : locate_qid + "-" + std::to_string(i);
        const auto span = locate(q, index, cfg.grounding, false);
        lines += locate_record(qid, q, cfg.grounding.backend, span, cfg.grounding.locate_threshold)
                     .dump() +
                 "\n";
      }
      emit(locate_out, lines, out);
    } else if (rerank->parsed()) {
      if (rerank_preds.size() < 2) {
        throw ValidationError("rerank needs at least 2 prediction files");
      }
      const auto cfg = rerank_cfg.resolve();
      RerankOptions options;
      options.baseline = *parse_metric(rerank_baseline);
      options.target = *parse_metric(rerank_target);
      options.by_answer_type = rerank_by == "all" || rerank_by == "answer_type";
      options.by_question_type = rerank_by == "all" || rerank_by == "question_type";
      options.alpha_grid = rerank_grid.empty() ? default_alpha_grid() : parse_grid(rerank_grid);

      Warnings warnings;
      const auto bundle = load_bundle(rerank_data.gt, rerank_data.ocr_dir, &warnings);
      print_warnings(warnings, err);
      std::vector<PredictionRun> runs;
      for (const auto& p : rerank_preds) {
        runs.push_back(load_run(p));
        for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
          if (runs[k].model == runs.back().model) {
            throw ValidationError("duplicate model name \"" + runs.back().model + "\" in " + p);
          }
        }
      }
      const unsigned threads = resolve_thread_count(rerank_data.threads);
      std::vector<std::pair<std::string, DatasetReport>> reports;
      for (const auto& r : runs) {
        reports.emplace_back(r.model, score_dataset(bundle, r, cfg, threads));
      }
      const auto report = rerank_report(reports, options);
      print_warnings(report.warnings, err);

      const fs::path dir(rerank_out_dir);
      fs::create_directories(dir);
      write_file_atomic(dir / "rerank.json", rerank_document(report));
      write_file_atomic(dir / "rankings.csv", rankings_csv(report));
      write_file_atomic(dir / "movements.csv", movements_csv(report));
      write_file_atomic(dir / "tau.csv", tau_csv(report));
      write_file_atomic(dir / "tau_alpha.csv", tau_alpha_csv(report));
      write_file_atomic(dir / "rank_table.csv", rank_table_csv(report.rank_table(true)));
      write_file_atomic(dir / "rank_table_baseline.csv", rank_table_csv(report.rank_table(false)));

      const auto& overall = report.subsets.front();
      out << "model,baseline_rank,target_rank\n";
      for (const auto& e : overall.baseline.entries) {
        out << e.model << "," << format_number(e.rank) << ","
            << format_number(*overall.target.rank_of(e.model)) << "\n";
      }
    } else if (analyze->parsed()) {
      std::ifstream in(analyze_ranks, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      const auto table = parse_rank_table(buf.str());
      emit(analyze_out, robustness_csv(robustness_table(table)), out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}

}  // namespace smudge::cli
