#include "smudge/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "smudge/error.hpp"
#include "smudge/similarity.hpp"

namespace smudge {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  throw ParseError(path + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) {
    schema_error(path, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    schema_error(path + "." + key, "missing required field");
  }
  return *it;
}

const json* optional_member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return nullptr;
  }
  return &*it;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    schema_error(path, "expected a string");
  }
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    schema_error(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    schema_error(path, "expected a finite number");
  }
  return v;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    schema_error(path, "expected an integer");
  }
  return j.get<int>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) {
    schema_error(path, "expected an array");
  }
  return j;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

bool is_blank(std::string_view s) { return normalize_text(s).empty(); }

}  // namespace

const DocumentLayout* DatasetBundle::find_document(const std::string& doc_id) const {
  auto it = documents.find(doc_id);
  return it == documents.end() ? nullptr : &it->second;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const auto nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const auto column = nl == std::string::npos || upto == 0 ? upto + 1 : upto - nl;
    throw ParseError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                     ": malformed JSON (" + e.what() + ")");
  }
}

DocumentLayout parse_ocr(const json& doc, Warnings* warnings) {
  auto warn = [&](std::string msg) {
    if (warnings != nullptr) {
      warnings->push_back(std::move(msg));
    }
  };

  DocumentLayout layout;
  layout.doc_id = as_string(member(doc, "doc_id", "$"), "$.doc_id");
  bool normalized = false;
  if (const json* coords = optional_member(doc, "coords")) {
    const auto mode = as_string(*coords, "$.coords");
    if (mode == "normalized") {
      normalized = true;
    } else if (mode != "pixels") {
      schema_error("$.coords", "expected \"pixels\" or \"normalized\", got \"" + mode + "\"");
    }
  }

  const auto& pages = as_array(member(doc, "pages", "$"), "$.pages");
  std::set<int> seen;
  for (std::size_t pi = 0; pi < pages.size(); ++pi) {
    const std::string ppath = indexed("$.pages", pi);
    const json& pj = pages[pi];
    Page page;
    page.page_num = as_int(member(pj, "page_num", ppath), ppath + ".page_num");
    page.width = as_number(member(pj, "width", ppath), ppath + ".width");
    page.height = as_number(member(pj, "height", ppath), ppath + ".height");
    if (page.page_num < 0) {
      throw ValidationError(ppath + ".page_num: must be >= 0");
    }
    if (page.width <= 0.0 || page.height <= 0.0) {
      throw ValidationError(ppath + ": page extent must be positive (document " + layout.doc_id +
                            ")");
    }
    if (!seen.insert(page.page_num).second) {
      throw ValidationError(ppath + ".page_num: duplicate page " + std::to_string(page.page_num));
    }

    const auto& segments = as_array(member(pj, "segments", ppath), ppath + ".segments");
    for (std::size_t si = 0; si < segments.size(); ++si) {
      const std::string spath = indexed(ppath + ".segments", si);
      const auto& words = as_array(member(segments[si], "words", spath), spath + ".words");
      Segment segment;
      for (std::size_t wi = 0; wi < words.size(); ++wi) {
        const std::string wpath = indexed(spath + ".words", wi);
        const json& wj = words[wi];
        Word word;
        word.text = as_string(member(wj, "text", wpath), wpath + ".text");
        const auto& bj = as_array(member(wj, "bbox", wpath), wpath + ".bbox");
        if (bj.size() != 4) {
          schema_error(wpath + ".bbox", "expected [left, top, right, bottom]");
        }
        double c[4];
        for (std::size_t k = 0; k < 4; ++k) {
          c[k] = as_number(bj[k], indexed(wpath + ".bbox", k));
        }
        if (normalized) {
          c[0] *= page.width;
          c[2] *= page.width;
          c[1] *= page.height;
          c[3] *= page.height;
        }
        if (c[0] > c[2] || c[1] > c[3]) {
          throw ValidationError(wpath + ".bbox: left > right or top > bottom");
        }
        if (word.text.find_first_of("\r\n") != std::string::npos) {
          throw ValidationError(wpath + ".text: word text must not contain a line break");
        }
        if (is_blank(word.text)) {
          warn(wpath + ": blank word dropped");
          continue;
        }
        word.bbox = {std::clamp(c[0], 0.0, page.width), std::clamp(c[1], 0.0, page.height),
                     std::clamp(c[2], 0.0, page.width), std::clamp(c[3], 0.0, page.height)};
        segment.words.push_back(std::move(word));
      }
      if (segment.words.empty()) {
        warn(spath + ": empty segment dropped");
        continue;
      }
      page.segments.push_back(std::move(segment));
    }
    layout.pages.push_back(std::move(page));
  }
  std::sort(layout.pages.begin(), layout.pages.end(),
            [](const Page& a, const Page& b) { return a.page_num < b.page_num; });
  return layout;
}

DocumentLayout load_ocr(const std::filesystem::path& path, Warnings* warnings) {
  const auto doc = read_json_file(path);
  try {
    return parse_ocr(doc, warnings);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

json ocr_to_json(const DocumentLayout& layout) {
  json pages = json::array();
  for (const auto& page : layout.pages) {
    json segments = json::array();
    for (const auto& seg : page.segments) {
      json words = json::array();
      for (const auto& w : seg.words) {
        words.push_back({{"text", w.text},
                         {"bbox", {w.bbox.left, w.bbox.top, w.bbox.right, w.bbox.bottom}}});
      }
      segments.push_back({{"words", std::move(words)}});
    }
    pages.push_back({{"page_num", page.page_num},
                     {"width", page.width},
                     {"height", page.height},
                     {"segments", std::move(segments)}});
  }
  return {{"doc_id", layout.doc_id}, {"coords", "pixels"}, {"pages", std::move(pages)}};
}

GroundTruth parse_ground_truth(const json& doc) {
  GroundTruth gt;
  if (const json* name = optional_member(doc, "dataset")) {
    gt.dataset = as_string(*name, "$.dataset");
  }
  const auto& samples = as_array(member(doc, "samples", "$"), "$.samples");
  std::set<std::string> qids;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string path = indexed("$.samples", i);
    const json& sj = samples[i];
    QASample s;
    s.qid = as_string(member(sj, "qid", path), path + ".qid");
    s.doc_id = as_string(member(sj, "doc_id", path), path + ".doc_id");
    if (const json* q = optional_member(sj, "question")) {
      s.question = as_string(*q, path + ".question");
    }
    const auto& answers = as_array(member(sj, "answers", path), path + ".answers");
    if (answers.empty()) {
      throw ValidationError("sample " + s.qid + ": answers list is empty");
    }
    for (std::size_t a = 0; a < answers.size(); ++a) {
      auto answer = as_string(answers[a], indexed(path + ".answers", a));
      if (is_blank(answer)) {
        throw ValidationError("sample " + s.qid + ": answer " + std::to_string(a) + " is blank");
      }
      s.answers.push_back(std::move(answer));
    }
    if (const json* qt = optional_member(sj, "question_type")) {
      s.question_type = as_string(*qt, path + ".question_type");
    }
    if (const json* ap = optional_member(sj, "answer_page")) {
      s.answer_page = as_int(*ap, path + ".answer_page");
    }
    if (!qids.insert(s.qid).second) {
      throw ValidationError("duplicate qid " + s.qid + " in ground truth");
    }
    gt.samples.push_back(std::move(s));
  }
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return parse_ground_truth(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

PredictionRun parse_predictions(const json& doc) {
  PredictionRun run;
  if (const json* model = optional_member(doc, "model")) {
    run.model = as_string(*model, "$.model");
  }
  const auto& preds = as_array(member(doc, "predictions", "$"), "$.predictions");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const std::string path = indexed("$.predictions", i);
    const json& pj = preds[i];
    Prediction p;
    p.qid = as_string(member(pj, "qid", path), path + ".qid");
    p.answer = as_string(member(pj, "answer", path), path + ".answer");
    if (const json* c = optional_member(pj, "confidence")) {
      const double conf = as_number(*c, path + ".confidence");
      if (conf < 0.0 || conf > 1.0) {
        throw ValidationError(path + ".confidence: " + std::to_string(conf) +
                              " outside [0, 1] for qid " + p.qid);
      }
      p.confidence = conf;
    }
    const auto qid = p.qid;
    if (!run.predictions.emplace(qid, std::move(p)).second) {
      throw ValidationError("duplicate qid " + qid + " in predictions");
    }
  }
  return run;
}

PredictionRun load_predictions(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return parse_predictions(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

DatasetBundle load_bundle(const std::filesystem::path& gt_path,
                          const std::filesystem::path& ocr_dir, Warnings* warnings) {
  auto gt = load_ground_truth(gt_path);
  DatasetBundle bundle;
  bundle.name = std::move(gt.dataset);
  for (const auto& s : gt.samples) {
    if (bundle.documents.contains(s.doc_id)) {
      continue;
    }
    const auto file = ocr_dir / (s.doc_id + ".json");
    if (!std::filesystem::exists(file)) {
      throw ValidationError("document " + s.doc_id + " (qid " + s.qid + ") has no OCR file at " +
                            file.string());
    }
    auto layout = load_ocr(file, warnings);
    if (layout.doc_id != s.doc_id) {
      throw ValidationError(file.string() + ": doc_id \"" + layout.doc_id + "\" does not match \"" +
                            s.doc_id + "\"");
    }
    bundle.documents.emplace(s.doc_id, std::move(layout));
  }
  bundle.samples = std::move(gt.samples);
  return bundle;
}

}  // namespace smudge
