#include "smudge/grounding.hpp"

#include <algorithm>
#include <cmath>

#include "edit_rows.hpp"
#include "smudge/error.hpp"

namespace smudge {

namespace {

std::vector<std::u32string> split_tokens(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t c : s) {
    if (is_space(c)) {
      if (!cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) {
    out.push_back(std::move(cur));
  }
  return out;
}

bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

LocatedSpan make_span(const Page& page, std::vector<WordRef> refs, double score) {
  LocatedSpan span;
  span.page_num = page.page_num;
  span.match_nls = score;
  std::vector<BBox> boxes;
  boxes.reserve(refs.size());
  for (const auto& r : refs) {
    const Word& w = page.segments[r.segment].words[r.offset];
    boxes.push_back(w.bbox);
    if (!span.text.empty()) {
      span.text.push_back(' ');
    }
    span.text += w.text;
  }
  span.bbox = merge_bboxes(boxes);
  span.words = std::move(refs);
  return span;
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::ReadingOrder ? "reading_order" : "beta_skeleton";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "reading_order") {
    return Backend::ReadingOrder;
  }
  if (name == "beta_skeleton") {
    return Backend::BetaSkeleton;
  }
  return std::nullopt;
}

void GroundingConfig::validate() const {
  if (!in_unit_interval(locate_threshold)) {
    throw ValidationError("locate_threshold must lie in [0, 1]");
  }
  if (!in_unit_interval(token_threshold)) {
    throw ValidationError("token_threshold must lie in [0, 1]");
  }
  if (window_slack < 0 || path_slack < 0) {
    throw ValidationError("window_slack and path_slack must be >= 0");
  }
}

DocumentIndex::DocumentIndex(const DocumentLayout& layout, const GroundingConfig& config)
    : layout_(&layout) {
  pages_.reserve(layout.pages.size());
  for (const auto& page : layout.pages) {
    PageEntry entry;
    entry.page = &page;
    entry.segments.reserve(page.segments.size());
    for (std::size_t s = 0; s < page.segments.size(); ++s) {
      auto& seg = entry.segments.emplace_back();
      for (std::size_t o = 0; o < page.segments[s].words.size(); ++o) {
        seg.push_back(normalize_text(page.segments[s].words[o].text, config.text));
        entry.nodes.push_back({s, o});
        entry.node_texts.push_back(seg.back());
      }
    }
    if (config.backend == Backend::BetaSkeleton && !entry.nodes.empty()) {
      entry.graph = build_beta_skeleton(page);
    }
    pages_.push_back(std::move(entry));
  }
}

const DocumentIndex::PageEntry* DocumentIndex::find_page(int page_num) const {
  for (const auto& p : pages_) {
    if (p.page->page_num == page_num) {
      return &p;
    }
  }
  return nullptr;
}

std::optional<LocatedSpan> locate_reading_order(std::string_view query, const DocumentIndex& index,
                                                const GroundingConfig& config,
                                                std::optional<int> only_page) {
  const auto q = normalize_text(query, config.text);
  const auto tokens = split_tokens(q);
  if (tokens.empty()) {
    return std::nullopt;
  }
  const std::size_t max_len = tokens.size() + static_cast<std::size_t>(config.window_slack);

  struct Best {
    const DocumentIndex::PageEntry* page;
    std::size_t segment, start, length;
    double score;
  };
  std::optional<Best> best;

  for (const auto& entry : index.pages()) {
    if (only_page && entry.page->page_num != *only_page) {
      continue;
    }
    for (std::size_t s = 0; s < entry.segments.size(); ++s) {
      const auto& words = entry.segments[s];
      for (std::size_t start = 0; start < words.size(); ++start) {
        detail::EditRows rows(q);
        const std::size_t stop = std::min(words.size(), start + max_len);
        for (std::size_t end = start; end < stop; ++end) {
          if (best && rows.length() > 0 && rows.similarity_bound() <= best->score) {
            break;
          }
          if (!words[end].empty()) {
            if (rows.length() > 0) {
              rows.push(U' ');
            }
            rows.push(words[end]);
          }
          const double score = rows.similarity();
          if (!best || score > best->score) {
            best = Best{&entry, s, start, end - start + 1, score};
          }
        }
      }
    }
  }
  if (!best) {
    return std::nullopt;
  }
  std::vector<WordRef> refs;
  for (std::size_t k = 0; k < best->length; ++k) {
    refs.push_back({best->segment, best->start + k});
  }
  return make_span(*best->page->page, std::move(refs), best->score);
}

std::optional<LocatedSpan> locate_reading_order(std::string_view query, const DocumentLayout& doc,
                                                const GroundingConfig& config) {
  GroundingConfig cfg = config;
  cfg.backend = Backend::ReadingOrder;
  const DocumentIndex index(doc, cfg);
  return locate_reading_order(query, index, cfg);
}

std::optional<LocatedSpan> locate_beta_skeleton(std::string_view query, const DocumentIndex& index,
                                                const GroundingConfig& config, double min_score,
                                                std::optional<int> only_page) {
  const auto tokens = split_tokens(normalize_text(query, config.text));
  if (tokens.empty()) {
    return std::nullopt;
  }
  const WalkOptions opts{config.token_threshold, config.path_slack, min_score};
  std::optional<LocatedSpan> best;
  for (const auto& entry : index.pages()) {
    if (only_page && entry.page->page_num != *only_page) {
      continue;
    }
    if (entry.nodes.empty()) {
      continue;
    }
    std::optional<SkeletonGraph> local;
    const SkeletonGraph* graph = entry.graph ? &*entry.graph : nullptr;
    if (graph == nullptr) {
      local = build_beta_skeleton(*entry.page);
      graph = &*local;
    }
    auto walk = beta_walk(tokens, *graph, entry.node_texts, opts);
    if (walk && (!best || walk->score > best->match_nls)) {
      std::vector<WordRef> refs;
      refs.reserve(walk->path.size());
      for (auto node : walk->path) {
        refs.push_back(entry.nodes[node]);
      }
      best = make_span(*entry.page, std::move(refs), walk->score);
    }
  }
  return best;
}

std::optional<LocatedSpan> locate(std::string_view query, const DocumentIndex& index,
                                  const GroundingConfig& config, bool accept_any,
                                  std::optional<int> only_page) {
  if (config.backend == Backend::BetaSkeleton) {
    auto span = locate_beta_skeleton(query, index, config,
                                     accept_any ? -1.0 : config.locate_threshold, only_page);
    // Ground truth must always land somewhere; without walk candidates the
    // reading-order search supplies the best span.
    if (span || !accept_any) {
      return span;
    }
  }
  return locate_reading_order(query, index, config, only_page);
}

double answer_distance(const BBox& gt_box, const std::optional<BBox>& pred_box, double page_width,
                       double page_height) {
  if (!(page_width > 0.0) || !(page_height > 0.0)) {
    throw ValidationError("page extent must be positive");
  }
  if (!pred_box) {
    return 1.0;
  }
  const Point t = centroid(gt_box);
  const Point a = centroid(*pred_box);
  const double d = std::abs(t.x - a.x) / page_width + std::abs(t.y - a.y) / page_height;
  return std::clamp(d, 0.0, 1.0);
}

long double decay(double d) {
  if (!in_unit_interval(d)) {
    throw ValidationError("decay expects a distance in [0, 1]");
  }
  if (d >= 1.0) {
    return 0.0L;
  }
  const long double x = d;
  return std::exp(-x / (1.0L - x));
}

GroundingResult ground_spans(std::optional<LocatedSpan> gt_span,
                             std::optional<LocatedSpan> pred_span, const DocumentLayout& doc,
                             const GroundingConfig& config) {
  GroundingResult result;
  result.gt_span = std::move(gt_span);
  result.pred_span = std::move(pred_span);
  const bool pred_ok =
      result.pred_span && result.pred_span->match_nls > config.locate_threshold;
  if (!result.gt_span || !pred_ok) {
    return result;
  }
  result.hallucinated = false;
  if (result.gt_span->page_num != result.pred_span->page_num) {
    result.distance = 1.0;
  } else {
    const Page* page = doc.find_page(result.gt_span->page_num);
    result.distance =
        answer_distance(result.gt_span->bbox, result.pred_span->bbox, page->width, page->height);
  }
  result.score = static_cast<double>(decay(result.distance));
  return result;
}

GroundingResult ground(std::string_view pred, std::string_view gt_variant,
                       const DocumentIndex& index, const GroundingConfig& config,
                       std::optional<int> answer_page) {
  std::optional<int> gt_page;
  if (answer_page && index.find_page(*answer_page) != nullptr) {
    gt_page = answer_page;
  }
  auto gt_span = locate(gt_variant, index, config, true, gt_page);
  auto pred_span = locate(pred, index, config, false);
  return ground_spans(std::move(gt_span), std::move(pred_span), index.layout(), config);
}

}  // namespace smudge
