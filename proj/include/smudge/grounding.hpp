#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smudge/document.hpp"
#include "smudge/similarity.hpp"
#include "smudge/skeleton.hpp"

namespace smudge {

enum class Backend { ReadingOrder, BetaSkeleton };

[[nodiscard]] std::string_view to_string(Backend backend);
[[nodiscard]] std::optional<Backend> parse_backend(std::string_view name);

struct GroundingConfig {
  // Predictions whose best span scores at or below this are hallucinated.
  double locate_threshold = 0.3;
  Backend backend = Backend::ReadingOrder;
  int window_slack = 2;
  // beta-skeleton backend only.
  double token_threshold = 0.7;
  int path_slack = 2;
  TextOptions text;

  void validate() const;
};

struct WordRef {
  std::size_t segment = 0;
  std::size_t offset = 0;

  friend bool operator==(const WordRef&, const WordRef&) = default;
  friend auto operator<=>(const WordRef&, const WordRef&) = default;
};

struct LocatedSpan {
  int page_num = 0;
  std::vector<WordRef> words;
  BBox bbox;
  double match_nls = 0.0;
  // Raw word texts joined by single spaces.
  std::string text;
};

struct GroundingResult {
  std::optional<LocatedSpan> gt_span;
  std::optional<LocatedSpan> pred_span;
  double distance = 1.0;
  double score = 0.0;
  bool hallucinated = true;
};

/// Normalized word texts (and skeleton graphs when the backend needs them)
/// for one document. Read-only after construction, so it can be shared by
/// concurrent scorers. The layout must outlive the index.
class DocumentIndex {
 public:
  struct PageEntry {
    const Page* page = nullptr;
    std::vector<std::vector<std::u32string>> segments;
    // Flattened reading-order view used as skeleton nodes.
    std::vector<WordRef> nodes;
    std::vector<std::u32string> node_texts;
    std::optional<SkeletonGraph> graph;
  };

  DocumentIndex(const DocumentLayout& layout, const GroundingConfig& config);

  [[nodiscard]] const DocumentLayout& layout() const { return *layout_; }
  [[nodiscard]] const std::vector<PageEntry>& pages() const { return pages_; }
  [[nodiscard]] const PageEntry* find_page(int page_num) const;

 private:
  const DocumentLayout* layout_;
  std::vector<PageEntry> pages_;
};

/// Best contiguous window inside any segment, scored by NLS against the query.
/// Windows of 1 .. n + window_slack tokens are tried (n = query token count).
/// Ties go to the lowest page, then segment, start offset, and window length.
/// Returns nullopt only when the document has no words or the query is blank.
[[nodiscard]] std::optional<LocatedSpan> locate_reading_order(
    std::string_view query, const DocumentIndex& index, const GroundingConfig& config,
    std::optional<int> only_page = std::nullopt);

[[nodiscard]] std::optional<LocatedSpan> locate_reading_order(std::string_view query,
                                                              const DocumentLayout& doc,
                                                              const GroundingConfig& config);

/// beta-skeleton walk on every page; best path across pages (lowest page on
/// ties). Paths at or below `min_score` are rejected.
[[nodiscard]] std::optional<LocatedSpan> locate_beta_skeleton(
    std::string_view query, const DocumentIndex& index, const GroundingConfig& config,
    double min_score, std::optional<int> only_page = std::nullopt);

/// Dispatches on config.backend. Ground-truth lookups pass
/// `accept_any = true`: the best span is kept whatever its score.
[[nodiscard]] std::optional<LocatedSpan> locate(std::string_view query, const DocumentIndex& index,
                                                const GroundingConfig& config, bool accept_any,
                                                std::optional<int> only_page = std::nullopt);

/// Normalized Manhattan distance between box centroids, clamped to [0, 1].
/// An absent prediction box yields 1.
[[nodiscard]] double answer_distance(const BBox& gt_box, const std::optional<BBox>& pred_box,
                                     double page_width, double page_height);

/// exp(-d / (1 - d)), with decay(1) = 0. Evaluated in extended precision:
/// in double the tail underflows to 0 for d above ~0.9987.
[[nodiscard]] long double decay(double d);

/// Grounding from already located spans. A missing or weak prediction span
/// (match_nls <= threshold) is hallucinated; spans on different pages are a
/// full distance apart.
[[nodiscard]] GroundingResult ground_spans(std::optional<LocatedSpan> gt_span,
                                           std::optional<LocatedSpan> pred_span,
                                           const DocumentLayout& doc,
                                           const GroundingConfig& config);

[[nodiscard]] GroundingResult ground(std::string_view pred, std::string_view gt_variant,
                                     const DocumentIndex& index, const GroundingConfig& config,
                                     std::optional<int> answer_page = std::nullopt);

}  // namespace smudge
