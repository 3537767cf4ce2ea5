#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smudge/document.hpp"

namespace smudge {

/// Undirected proximity graph over points. Adjacency lists are sorted.
struct SkeletonGraph {
  std::vector<Point> points;
  std::vector<std::vector<std::size_t>> adjacency;

  [[nodiscard]] std::size_t size() const { return points.size(); }
  [[nodiscard]] std::size_t edge_count() const;
  [[nodiscard]] bool has_edge(std::size_t a, std::size_t b) const;
};

/// True when `w` lies in the closed region that blocks the edge (u, v) of a
/// lune-based beta skeleton. For beta = 1 the region is the closed disk with
/// diameter uv, tested exactly as (u - w) . (v - w) <= 0.
[[nodiscard]] bool blocks_edge(const Point& u, const Point& v, const Point& w, double beta);

/// Lune-based beta skeleton (beta >= 1; beta = 1 gives the Gabriel graph).
/// A third point blocks an edge when it lies in the closed lune, boundary
/// included. Points coincident with an endpoint never block, and coincident
/// points are always adjacent to each other.
[[nodiscard]] SkeletonGraph build_beta_skeleton(std::span<const Point> points, double beta = 1.0);

/// Graph over the centroids of every word on the page, nodes numbered in
/// reading order (segment by segment).
[[nodiscard]] SkeletonGraph build_beta_skeleton(const Page& page, double beta = 1.0);

struct WalkOptions {
  double token_threshold = 0.7;
  int path_slack = 2;
  // Paths scoring at or below this are treated as a mismatch.
  double min_score = 0.3;
};

struct WalkResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

/// Places a token sequence on the graph. Start nodes resemble the first token
/// and end nodes the last one (NLS above the token threshold); every simple
/// path from a start to an end with at most n + slack nodes is scored by the
/// NLS of its space-joined text against the whole query. Inputs are already
/// normalized. Ties keep the first path found (start nodes ascending,
/// neighbours ascending).
[[nodiscard]] std::optional<WalkResult> beta_walk(std::span<const std::u32string> query_tokens,
                                                  const SkeletonGraph& graph,
                                                  std::span<const std::u32string> node_texts,
                                                  const WalkOptions& options = {});

}  // namespace smudge
