#include "smudge/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "edit_rows.hpp"
#include "smudge/error.hpp"
#include "smudge/similarity.hpp"

namespace smudge {

namespace {

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

std::size_t SkeletonGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& adj : adjacency) {
    twice += adj.size();
  }
  return twice / 2;
}

bool SkeletonGraph::has_edge(std::size_t a, std::size_t b) const {
  const auto& adj = adjacency.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

bool blocks_edge(const Point& u, const Point& v, const Point& w, double beta) {
  if (w == u || w == v) {
    return false;
  }
  if (beta == 1.0) {
    return (u.x - w.x) * (v.x - w.x) + (u.y - w.y) * (v.y - w.y) <= 0.0;
  }
  const double h = beta / 2.0;
  const Point c1{(1.0 - h) * u.x + h * v.x, (1.0 - h) * u.y + h * v.y};
  const Point c2{h * u.x + (1.0 - h) * v.x, h * u.y + (1.0 - h) * v.y};
  const double r2 = h * h * dist2(u, v);
  return dist2(w, c1) <= r2 && dist2(w, c2) <= r2;
}

SkeletonGraph build_beta_skeleton(std::span<const Point> points, double beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) {
    throw ValidationError("beta must be a finite value >= 1");
  }
  const std::size_t n = points.size();
  SkeletonGraph graph;
  graph.points.assign(points.begin(), points.end());
  graph.adjacency.resize(n);

  // Any blocker of (u, v) lies within beta * |uv| of u, so candidates are
  // scanned in order of distance from u and the scan stops past that radius.
  std::vector<std::size_t> order(n);
  for (std::size_t u = 0; u < n; ++u) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double da = dist2(points[u], points[a]);
      const double db = dist2(points[u], points[b]);
      return da != db ? da < db : a < b;
    });
    for (std::size_t v = u + 1; v < n; ++v) {
      const Point& pu = points[u];
      const Point& pv = points[v];
      bool blocked = false;
      if (!(pu == pv)) {
        const double reach = beta * beta * dist2(pu, pv);
        for (std::size_t w : order) {
          if (dist2(pu, points[w]) > reach) {
            break;
          }
          if (w != u && w != v && blocks_edge(pu, pv, points[w], beta)) {
            blocked = true;
            break;
          }
        }
      }
      if (!blocked) {
        graph.adjacency[u].push_back(v);
        graph.adjacency[v].push_back(u);
      }
    }
  }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end());
  }
  return graph;
}

SkeletonGraph build_beta_skeleton(const Page& page, double beta) {
  std::vector<Point> pts;
  pts.reserve(page.word_count());
  for (const auto& seg : page.segments) {
    for (const auto& w : seg.words) {
      pts.push_back(centroid(w.bbox));
    }
  }
  return build_beta_skeleton(pts, beta);
}

namespace {

struct Walker {
  const SkeletonGraph& graph;
  std::span<const std::u32string> texts;
  const std::vector<char>& is_end;
  std::size_t max_nodes;
  detail::EditRows rows;
  std::vector<std::size_t> path;
  std::vector<char> on_path;
  std::optional<WalkResult> best;

  void visit(std::size_t node) {
    if (is_end[node]) {
      const double s = rows.similarity();
      if (!best || s > best->score) {
        best = WalkResult{path, s};
      }
    }
    if (path.size() >= max_nodes) {
      return;
    }
    for (std::size_t next : graph.adjacency[node]) {
      if (on_path[next]) {
        continue;
      }
      if (best && rows.similarity_bound() <= best->score) {
        return;
      }
      const std::size_t added = texts[next].size() + 1;
      rows.push(U' ');
      rows.push(texts[next]);
      path.push_back(next);
      on_path[next] = 1;
      visit(next);
      on_path[next] = 0;
      path.pop_back();
      rows.pop(added);
    }
  }
};

}  // namespace

std::optional<WalkResult> beta_walk(std::span<const std::u32string> query_tokens,
                                    const SkeletonGraph& graph,
                                    std::span<const std::u32string> node_texts,
                                    const WalkOptions& options) {
  if (node_texts.size() != graph.size()) {
    throw ValidationError("beta_walk: node text count does not match graph size");
  }
  if (query_tokens.empty() || graph.size() == 0) {
    return std::nullopt;
  }
  const auto& first = query_tokens.front();
  const auto& last = query_tokens.back();

  std::vector<std::size_t> starts;
  std::vector<char> is_end(graph.size(), 0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (nls_normalized(node_texts[i], first) > options.token_threshold) {
      starts.push_back(i);
    }
    if (nls_normalized(node_texts[i], last) > options.token_threshold) {
      is_end[i] = 1;
    }
  }
  if (starts.empty() || std::none_of(is_end.begin(), is_end.end(), [](char c) { return c; })) {
    return std::nullopt;
  }

  std::u32string query;
  for (const auto& tok : query_tokens) {
    if (!query.empty()) {
      query.push_back(U' ');
    }
    query += tok;
  }

  const std::size_t max_nodes = query_tokens.size() + static_cast<std::size_t>(std::max(0, options.path_slack));
  Walker walker{graph, node_texts, is_end, max_nodes, detail::EditRows(query), {}, std::vector<char>(graph.size(), 0), std::nullopt};
  for (std::size_t s : starts) {
    if (walker.best && walker.best->score >= 1.0) {
      break;
    }
    walker.rows.push(node_texts[s]);
    walker.path.push_back(s);
    walker.on_path[s] = 1;
    walker.visit(s);
    walker.on_path[s] = 0;
    walker.path.pop_back();
    walker.rows.pop(node_texts[s].size());
  }
  if (!walker.best || walker.best->score <= options.min_score) {
    return std::nullopt;
  }
  return walker.best;
}

}  // namespace smudge
