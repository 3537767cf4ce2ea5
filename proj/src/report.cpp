#include "smudge/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "smudge/error.hpp"

namespace smudge {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) {
    throw Error("cannot format number");
  }
  return std::string(buf, end);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out.push_back('"');
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

ordered_json config_to_json(const ScoreConfig& config) {
  const auto& sim = config.similarity;
  const auto& gr = config.grounding;
  return ordered_json{{"alpha", config.alpha},
                      {"num_weight", sim.num_weight},
                      {"str_weight", sim.str_weight},
                      {"anls_threshold", sim.anls_threshold},
                      {"scale_factors", sim.scale_factors},
                      {"lowercase", sim.text.lowercase},
                      {"collapse_whitespace", sim.text.collapse_whitespace},
                      {"locate_threshold", gr.locate_threshold},
                      {"backend", std::string(to_string(gr.backend))},
                      {"window_slack", gr.window_slack},
                      {"token_threshold", gr.token_threshold},
                      {"path_slack", gr.path_slack}};
}

namespace {

double number_field(const json& v, const std::string& key) {
  if (!v.is_number()) {
    throw ValidationError("config." + key + ": expected a number");
  }
  return v.get<double>();
}

int int_field(const json& v, const std::string& key) {
  if (!v.is_number_integer()) {
    throw ValidationError("config." + key + ": expected an integer");
  }
  return v.get<int>();
}

bool bool_field(const json& v, const std::string& key) {
  if (!v.is_boolean()) {
    throw ValidationError("config." + key + ": expected a boolean");
  }
  return v.get<bool>();
}

}  // namespace

ScoreConfig config_from_json(const json& mapping, const ScoreConfig& base) {
  if (!mapping.is_object()) {
    throw ValidationError("config: expected an object");
  }
  ScoreConfig cfg = base;
  auto& sim = cfg.similarity;
  auto& gr = cfg.grounding;
  for (const auto& [key, v] : mapping.items()) {
    if (key == "alpha") {
      cfg.alpha = number_field(v, key);
    } else if (key == "num_weight") {
      sim.num_weight = number_field(v, key);
    } else if (key == "str_weight") {
      sim.str_weight = number_field(v, key);
    } else if (key == "anls_threshold") {
      sim.anls_threshold = number_field(v, key);
    } else if (key == "scale_factors") {
      if (!v.is_array()) {
        throw ValidationError("config.scale_factors: expected an array of integers");
      }
      sim.scale_factors.clear();
      for (const auto& f : v) {
        if (!f.is_number_unsigned()) {
          throw ValidationError("config.scale_factors: expected an array of integers");
        }
        sim.scale_factors.push_back(f.get<std::uint64_t>());
      }
    } else if (key == "lowercase") {
      sim.text.lowercase = bool_field(v, key);
    } else if (key == "collapse_whitespace") {
      sim.text.collapse_whitespace = bool_field(v, key);
    } else if (key == "locate_threshold") {
      gr.locate_threshold = number_field(v, key);
    } else if (key == "backend") {
      const auto b = v.is_string() ? parse_backend(v.get<std::string>()) : std::nullopt;
      if (!b) {
        throw ValidationError("config.backend: expected \"reading_order\" or \"beta_skeleton\"");
      }
      gr.backend = *b;
    } else if (key == "window_slack") {
      gr.window_slack = int_field(v, key);
    } else if (key == "token_threshold") {
      gr.token_threshold = number_field(v, key);
    } else if (key == "path_slack") {
      gr.path_slack = int_field(v, key);
    } else {
      throw ValidationError("config: unknown key \"" + key + "\"");
    }
  }
  // Grounding and similarity share text normalization.
  gr.text = sim.text;
  cfg.validate();
  return cfg;
}

ordered_json span_to_json(const LocatedSpan& span) {
  ordered_json words = ordered_json::array();
  for (const auto& w : span.words) {
    words.push_back({w.segment, w.offset});
  }
  return ordered_json{{"page_num", span.page_num},
                      {"text", span.text},
                      {"bbox", {span.bbox.left, span.bbox.top, span.bbox.right, span.bbox.bottom}},
                      {"match_nls", span.match_nls},
                      {"words", std::move(words)}};
}

ordered_json sample_to_json(const ScoredSample& s) {
  ordered_json j{{"qid", s.qid},
                 {"doc_id", s.doc_id},
                 {"prediction", s.prediction},
                 {"chosen_answer", s.chosen_answer},
                 {"variant", s.variant},
                 {"answer_type", std::string(to_string(s.answer_type))},
                 {"question_type", s.question_type ? json(*s.question_type) : json(nullptr)},
                 {"m", s.m},
                 {"g", s.g},
                 {"d", s.d},
                 {"s", s.s},
                 {"anls", s.anls}};
  if (s.num_score) {
    j["num_score"] = *s.num_score;
  }
  if (s.str_score) {
    j["str_score"] = *s.str_score;
  }
  j["hallucinated"] = s.hallucinated;
  j["missing"] = s.missing;
  j["empty_prediction"] = s.empty_prediction;
  j["gt_span"] = s.gt_span ? span_to_json(*s.gt_span) : ordered_json(nullptr);
  j["pred_span"] = s.pred_span ? span_to_json(*s.pred_span) : ordered_json(nullptr);
  return j;
}

ordered_json aggregates_to_json(const Aggregates& a) {
  return ordered_json{{"count", a.count},
                      {"s", a.s},
                      {"m", a.m},
                      {"g", a.g},
                      {"d", a.d},
                      {"anls", a.anls},
                      {"missing", a.missing},
                      {"hallucinated", a.hallucinated},
                      {"empty_predictions", a.empty_predictions}};
}

ordered_json report_to_json(const DatasetReport& report) {
  ordered_json by_type = ordered_json::object();
  for (const auto& [k, v] : report.by_answer_type) {
    by_type[k] = aggregates_to_json(v);
  }
  ordered_json by_question = ordered_json::object();
  for (const auto& [k, v] : report.by_question_type) {
    by_question[k] = aggregates_to_json(v);
  }
  ordered_json samples = ordered_json::array();
  for (const auto& s : report.samples) {
    samples.push_back(sample_to_json(s));
  }
  return ordered_json{
      {"dataset", report.dataset},
      {"model", report.model},
      {"config", config_to_json(report.config)},
      {"aggregates", aggregates_to_json(report.overall)},
      {"breakdowns", {{"answer_type", std::move(by_type)}, {"question_type", std::move(by_question)}}},
      {"unmatched_predictions", report.unmatched_predictions},
      {"samples", std::move(samples)}};
}

std::string report_document(const DatasetReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

std::string sample_csv_header() {
  return "qid,doc_id,answer_type,question_type,m,g,d,s,anls,hallucinated,missing,empty_prediction";
}

std::string sample_csv_row(const ScoredSample& s) {
  std::ostringstream row;
  row << csv_field(s.qid) << ',' << csv_field(s.doc_id) << ',' << to_string(s.answer_type) << ','
      << csv_field(s.question_type.value_or("")) << ',' << format_number(s.m) << ','
      << format_number(s.g) << ',' << format_number(s.d) << ',' << format_number(s.s) << ','
      << format_number(s.anls) << ',' << (s.hallucinated ? 1 : 0) << ',' << (s.missing ? 1 : 0)
      << ',' << (s.empty_prediction ? 1 : 0);
  return row.str();
}

std::string report_csv(const DatasetReport& report) {
  std::string out = sample_csv_header() + "\n";
  for (const auto& s : report.samples) {
    out += sample_csv_row(s);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "alpha,s\n";
  for (const auto& p : points) {
    out += format_number(p.alpha) + "," + format_number(p.s) + "\n";
  }
  return out;
}

ordered_json locate_record(std::string_view qid, std::string_view query, Backend backend,
                           const std::optional<LocatedSpan>& span, double locate_threshold) {
  ordered_json j{{"qid", qid}, {"backend", std::string(to_string(backend))}, {"query", query}};
  if (span) {
    j["page_num"] = span->page_num;
    j["text"] = span->text;
    j["bbox"] = {span->bbox.left, span->bbox.top, span->bbox.right, span->bbox.bottom};
    j["match_nls"] = span->match_nls;
  } else {
    j["page_num"] = nullptr;
    j["text"] = nullptr;
    j["bbox"] = nullptr;
    j["match_nls"] = 0.0;
  }
  j["hallucinated"] = !span || span->match_nls <= locate_threshold;
  return j;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + tmp.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw Error("cannot write " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace smudge
