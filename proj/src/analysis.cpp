#include "smudge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"
#include "smudge/error.hpp"
#include "smudge/report.hpp"

namespace smudge {

using nlohmann::ordered_json;

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Sum over i < j of sign(dx) * sign(dy).
long long s_statistic(std::span<const double> x, std::span<const double> y) {
  long long s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      s += sign(x[i] - x[j]) * sign(y[i] - y[j]);
    }
  }
  return s;
}

std::vector<long long> tie_groups(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<long long> groups;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) {
      ++j;
    }
    if (j - i > 1) {
      groups.push_back(static_cast<long long>(j - i));
    }
    i = j;
  }
  return groups;
}

long long tied_pairs(const std::vector<long long>& groups) {
  long long n = 0;
  for (auto t : groups) {
    n += t * (t - 1) / 2;
  }
  return n;
}

// Number of distinct orderings of the multiset.
double arrangements(std::span<const double> v) {
  double total = std::tgamma(static_cast<double>(v.size()) + 1.0);
  for (auto t : tie_groups(v)) {
    total /= std::tgamma(static_cast<double>(t) + 1.0);
  }
  return total;
}

// Two-sided exact p-value by enumerating every distinct arrangement of one
// side against the other.
double exact_p_ties(std::span<const double> fixed, std::span<const double> permuted, long long s_obs) {
  std::vector<double> perm(permuted.begin(), permuted.end());
  std::sort(perm.begin(), perm.end());
  const long long target = std::llabs(s_obs);
  double hits = 0.0;
  double total = 0.0;
  do {
    total += 1.0;
    if (std::llabs(s_statistic(fixed, perm)) >= target) {
      hits += 1.0;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return hits / total;
}

// Two-sided exact p-value without ties from the inversion-count distribution.
double exact_p_no_ties(std::size_t n, long long s_obs) {
  const long long pairs = static_cast<long long>(n * (n - 1) / 2);
  std::vector<double> counts{1.0};
  for (std::size_t m = 2; m <= n; ++m) {
    std::vector<double> next(counts.size() + m - 1, 0.0);
    for (std::size_t k = 0; k < counts.size(); ++k) {
      for (std::size_t add = 0; add < m; ++add) {
        next[k + add] += counts[k];
      }
    }
    counts = std::move(next);
  }
  const long long target = std::llabs(s_obs);
  double hits = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    total += counts[k];
    if (std::llabs(pairs - 2 * static_cast<long long>(k)) >= target) {
      hits += counts[k];
    }
  }
  return hits / total;
}

double normal_p(std::size_t n_items, long long s_obs, const std::vector<long long>& tx,
                const std::vector<long long>& ty) {
  const double n = static_cast<double>(n_items);
  auto sum = [](const std::vector<long long>& g, auto f) {
    double acc = 0.0;
    for (auto t : g) {
      acc += f(static_cast<double>(t));
    }
    return acc;
  };
  const auto v0 = n * (n - 1) * (2 * n + 5);
  const auto vt = sum(tx, [](double t) { return t * (t - 1) * (2 * t + 5); });
  const auto vu = sum(ty, [](double t) { return t * (t - 1) * (2 * t + 5); });
  const auto v1 = sum(tx, [](double t) { return t * (t - 1); }) *
                  sum(ty, [](double t) { return t * (t - 1); }) / (2 * n * (n - 1));
  const auto v2 = sum(tx, [](double t) { return t * (t - 1) * (t - 2); }) *
                  sum(ty, [](double t) { return t * (t - 1) * (t - 2); }) /
                  (9 * n * (n - 1) * (n - 2));
  const double var = (v0 - vt - vu) / 18.0 + v1 + v2;
  const double z = static_cast<double>(s_obs) / std::sqrt(var);
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

std::optional<double> Ranking::rank_of(std::string_view model) const {
  for (const auto& e : entries) {
    if (e.model == model) {
      return e.rank;
    }
  }
  return std::nullopt;
}

Ranking rank_scores(std::vector<std::pair<std::string, double>> scores) {
  std::set<std::string> names;
  for (const auto& [name, score] : scores) {
    if (!std::isfinite(score)) {
      throw ValidationError("score for " + name + " is not finite");
    }
    if (!names.insert(name).second) {
      throw ValidationError("duplicate model name " + name);
    }
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Ranking ranking;
  for (std::size_t i = 0; i < scores.size();) {
    std::size_t j = i;
    while (j < scores.size() && scores[j].second == scores[i].second) {
      ++j;
    }
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      ranking.entries.push_back({scores[k].first, scores[k].second, rank});
    }
    i = j;
  }
  return ranking;
}

TauResult kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("kendall_tau: series lengths differ");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw ValidationError("kendall_tau needs at least 2 items");
  }
  const long long s = s_statistic(x, y);
  const auto tx = tie_groups(x);
  const auto ty = tie_groups(y);
  const long long n0 = static_cast<long long>(n * (n - 1) / 2);
  const long long n1 = tied_pairs(tx);
  const long long n2 = tied_pairs(ty);
  if (n1 == n0 || n2 == n0) {
    throw ValidationError("kendall_tau: a ranking has every item tied");
  }
  TauResult out;
  out.tau = std::clamp(static_cast<double>(s) /
                           std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2)),
                       -1.0, 1.0);
  if (n > 10) {
    out.p_value = normal_p(n, s, tx, ty);
  } else if (tx.empty() && ty.empty()) {
    out.p_value = exact_p_no_ties(n, s);
  } else if (arrangements(x) < arrangements(y)) {
    out.p_value = exact_p_ties(y, x, s);
  } else {
    out.p_value = exact_p_ties(x, y, s);
  }
  out.p_value = std::clamp(out.p_value, 0.0, 1.0);
  return out;
}

TauResult kendall_tau(const Ranking& a, const Ranking& b) {
  std::set<std::string> in_a;
  std::set<std::string> in_b;
  for (const auto& e : a.entries) {
    in_a.insert(e.model);
  }
  for (const auto& e : b.entries) {
    in_b.insert(e.model);
  }
  if (in_a != in_b) {
    std::string only_a;
    std::string only_b;
    for (const auto& m : in_a) {
      if (!in_b.contains(m)) {
        only_a += (only_a.empty() ? "" : ", ") + m;
      }
    }
    for (const auto& m : in_b) {
      if (!in_a.contains(m)) {
        only_b += (only_b.empty() ? "" : ", ") + m;
      }
    }
    throw ValidationError("rankings cover different models; only in first: [" + only_a +
                          "], only in second: [" + only_b + "]");
  }
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& e : a.entries) {
    x.push_back(e.rank);
    y.push_back(*b.rank_of(e.model));
  }
  return kendall_tau(x, y);
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw ValidationError("pearson_r needs two series of equal length >= 2");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw ValidationError("degenerate series");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double volatility(std::span<const double> series) {
  if (series.empty()) {
    throw ValidationError("volatility of an empty series");
  }
  const double mean =
      std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
  double ss = 0.0;
  for (double x : series) {
    ss += (x - mean) * (x - mean);
  }
  // std * sqrt(T) with the population std reduces to sqrt(sum of squares).
  return std::sqrt(ss);
}

double median(std::span<const double> series) {
  if (series.empty()) {
    throw ValidationError("median of an empty series");
  }
  std::vector<double> v(series.begin(), series.end());
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

double robustness_score(std::span<const double> ranks) {
  const double med = median(ranks);
  if (!(med >= 1.0)) {
    throw ValidationError("ranks must be >= 1");
  }
  return 1.0 / ((1.0 + volatility(ranks)) * med);
}

RankTable parse_rank_table(std::string_view csv) {
  RankTable table;
  std::istringstream in{std::string(csv)};
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    auto fields = split_csv_line(line);
    if (header) {
      if (fields.size() < 2) {
        throw ValidationError("rank table header needs a model column and at least one subset");
      }
      table.subsets.assign(fields.begin() + 1, fields.end());
      header = false;
      continue;
    }
    if (fields.size() != table.subsets.size() + 1) {
      throw ValidationError("rank table line " + std::to_string(line_no) + ": expected " +
                            std::to_string(table.subsets.size() + 1) + " fields");
    }
    std::vector<double> ranks;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[i].size() || !(v >= 1.0) || !std::isfinite(v)) {
        throw ValidationError("rank table line " + std::to_string(line_no) + ": invalid rank \"" +
                              fields[i] + "\"");
      }
      ranks.push_back(v);
    }
    table.rows.emplace_back(fields[0], std::move(ranks));
  }
  if (table.rows.empty()) {
    throw ValidationError("rank table has no model rows");
  }
  return table;
}

std::string rank_table_csv(const RankTable& table) {
  std::string out = "model";
  for (const auto& s : table.subsets) {
    out += "," + csv_field(s);
  }
  out += "\n";
  for (const auto& [model, ranks] : table.rows) {
    out += csv_field(model);
    for (double r : ranks) {
      out += "," + format_number(r);
    }
    out += "\n";
  }
  return out;
}

std::vector<RobustnessRecord> robustness_table(const RankTable& table) {
  std::vector<RobustnessRecord> out;
  for (const auto& [model, ranks] : table.rows) {
    RobustnessRecord rec;
    rec.model = model;
    rec.ranks = ranks;
    rec.volatility = volatility(ranks);
    rec.median_rank = median(ranks);
    rec.robustness = robustness_score(ranks);
    out.push_back(std::move(rec));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.robustness != b.robustness ? a.robustness > b.robustness : a.model < b.model;
  });
  return out;
}

std::string robustness_csv(const std::vector<RobustnessRecord>& records) {
  std::string out = "model,volatility,median_rank,robustness\n";
  for (const auto& r : records) {
    out += csv_field(r.model) + "," + format_number(r.volatility) + "," +
           format_number(r.median_rank) + "," + format_number(r.robustness) + "\n";
  }
  return out;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Anls:
      return "anls";
    case Metric::Composite:
      return "composite";
    case Metric::Match:
      return "match";
    case Metric::Grounding:
      return "grounding";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (auto m : {Metric::Anls, Metric::Composite, Metric::Match, Metric::Grounding}) {
    if (to_string(m) == name) {
      return m;
    }
  }
  return std::nullopt;
}

RankTable RerankReport::rank_table(bool use_target) const {
  RankTable table;
  for (const auto& s : subsets) {
    table.subsets.push_back(s.subset);
  }
  for (const auto& model : models) {
    std::vector<double> ranks;
    for (const auto& s : subsets) {
      ranks.push_back(*(use_target ? s.target : s.baseline).rank_of(model));
    }
    table.rows.emplace_back(model, std::move(ranks));
  }
  return table;
}

namespace {

double metric_value(const ScoredSample& s, Metric metric) {
  switch (metric) {
    case Metric::Anls:
      return s.anls;
    case Metric::Composite:
      return s.s;
    case Metric::Match:
      return s.m;
    case Metric::Grounding:
      return s.g;
  }
  return 0.0;
}

template <typename ValueFn>
Ranking subset_ranking(const std::vector<std::pair<std::string, DatasetReport>>& runs,
                       const std::vector<std::size_t>& members, ValueFn value) {
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& [name, report] : runs) {
    double total = 0.0;
    for (auto i : members) {
      total += value(report.samples[i]);
    }
    scores.emplace_back(name, total / static_cast<double>(members.size()));
  }
  return rank_scores(std::move(scores));
}

std::optional<TauResult> try_tau(const Ranking& a, const Ranking& b, const std::string& what,
                                 std::vector<std::string>& warnings) {
  try {
    return kendall_tau(a, b);
  } catch (const ValidationError& e) {
    warnings.push_back(what + ": tau undefined (" + e.what() + ")");
    return std::nullopt;
  }
}

}  // namespace

RerankReport rerank_report(const std::vector<std::pair<std::string, DatasetReport>>& runs,
                           const RerankOptions& options) {
  if (runs.size() < 2) {
    throw ValidationError("reranking needs at least 2 runs");
  }
  RerankReport out;
  out.baseline = options.baseline;
  out.target = options.target;
  std::set<std::string> names;
  for (const auto& [name, report] : runs) {
    if (!names.insert(name).second) {
      throw ValidationError("duplicate model name " + name);
    }
    out.models.push_back(name);
  }
  const auto& reference = runs.front().second.samples;
  for (const auto& [name, report] : runs) {
    bool same = report.samples.size() == reference.size();
    for (std::size_t i = 0; same && i < reference.size(); ++i) {
      same = report.samples[i].qid == reference[i].qid;
    }
    if (!same) {
      throw ValidationError("run " + name + " does not cover the same qids as " + runs.front().first);
    }
  }
  if (reference.empty()) {
    throw ValidationError("runs contain no samples");
  }

  std::vector<std::pair<std::string, std::vector<std::size_t>>> subsets;
  std::vector<std::size_t> all(reference.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  subsets.emplace_back("all", all);
  if (options.by_answer_type) {
    for (auto t : {AnswerType::Numeric, AnswerType::Textual, AnswerType::Hybrid}) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < reference.size(); ++i) {
        if (reference[i].answer_type == t) {
          members.push_back(i);
        }
      }
      if (!members.empty()) {
        subsets.emplace_back("answer_type:" + std::string(to_string(t)), std::move(members));
      }
    }
  }
  if (options.by_question_type) {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (reference[i].question_type) {
        groups[*reference[i].question_type].push_back(i);
      }
    }
    for (auto& [k, v] : groups) {
      subsets.emplace_back("question_type:" + k, std::move(v));
    }
  }

  const auto baseline_value = [&](const ScoredSample& s) { return metric_value(s, options.baseline); };
  const auto target_value = [&](const ScoredSample& s) { return metric_value(s, options.target); };
  const Ranking overall_baseline = subset_ranking(runs, all, baseline_value);

  for (const auto& [name, members] : subsets) {
    if (members.empty()) {
      out.warnings.push_back(name + ": no samples, fewer than 2 models scored; subset skipped");
      continue;
    }
    SubsetRanking sr;
    sr.subset = name;
    sr.samples = members.size();
    sr.baseline = subset_ranking(runs, members, baseline_value);
    sr.target = subset_ranking(runs, members, target_value);
    sr.tau_within = try_tau(sr.target, sr.baseline, name, out.warnings);
    sr.tau_vs_overall = try_tau(sr.target, overall_baseline, name + " vs overall", out.warnings);
    for (const auto& model : out.models) {
      Movement mv;
      mv.model = model;
      mv.subset = name;
      mv.baseline_rank = *overall_baseline.rank_of(model);
      mv.target_rank = *sr.target.rank_of(model);
      mv.delta = mv.baseline_rank - mv.target_rank;
      out.movements.push_back(std::move(mv));
    }
    for (double alpha : options.alpha_grid) {
      const auto at_alpha = subset_ranking(
          runs, members, [alpha](const ScoredSample& s) { return s.composite_at(alpha); });
      out.tau_by_alpha.push_back(
          {alpha, name,
           try_tau(at_alpha, overall_baseline, name + " at alpha " + format_number(alpha),
                   out.warnings)});
    }
    out.subsets.push_back(std::move(sr));
  }
  return out;
}

namespace {

ordered_json ranking_json(const Ranking& r) {
  ordered_json arr = ordered_json::array();
  for (const auto& e : r.entries) {
    arr.push_back({{"model", e.model}, {"score", e.score}, {"rank", e.rank}});
  }
  return arr;
}

ordered_json tau_json(const std::optional<TauResult>& t) {
  if (!t) {
    return nullptr;
  }
  return {{"tau", t->tau}, {"p_value", t->p_value}};
}

}  // namespace

std::string rerank_document(const RerankReport& report) {
  ordered_json subsets = ordered_json::array();
  for (const auto& s : report.subsets) {
    subsets.push_back({{"subset", s.subset},
                       {"samples", s.samples},
                       {"baseline", ranking_json(s.baseline)},
                       {"target", ranking_json(s.target)},
                       {"tau_within", tau_json(s.tau_within)},
                       {"tau_vs_overall", tau_json(s.tau_vs_overall)}});
  }
  ordered_json moves = ordered_json::array();
  for (const auto& m : report.movements) {
    moves.push_back({{"model", m.model},
                     {"subset", m.subset},
                     {"baseline_rank", m.baseline_rank},
                     {"target_rank", m.target_rank},
                     {"delta", m.delta}});
  }
  ordered_json alpha = ordered_json::array();
  for (const auto& p : report.tau_by_alpha) {
    alpha.push_back({{"alpha", p.alpha}, {"subset", p.subset}, {"tau", tau_json(p.tau)}});
  }
  ordered_json doc{{"baseline_metric", std::string(to_string(report.baseline))},
                   {"target_metric", std::string(to_string(report.target))},
                   {"models", report.models},
                   {"subsets", std::move(subsets)},
                   {"movements", std::move(moves)},
                   {"tau_by_alpha", std::move(alpha)},
                   {"warnings", report.warnings}};
  return doc.dump(2) + "\n";
}

std::string rankings_csv(const RerankReport& report) {
  std::string out = "subset,metric,model,score,rank\n";
  for (const auto& s : report.subsets) {
    for (const auto& [metric, ranking] :
         {std::pair{report.baseline, &s.baseline}, std::pair{report.target, &s.target}}) {
      for (const auto& e : ranking->entries) {
        out += csv_field(s.subset) + "," + std::string(to_string(metric)) + "," +
               csv_field(e.model) + "," + format_number(e.score) + "," + format_number(e.rank) +
               "\n";
      }
    }
  }
  return out;
}

std::string movements_csv(const RerankReport& report) {
  std::string out = "subset,model,baseline_rank,target_rank,delta,direction\n";
  for (const auto& m : report.movements) {
    const char* dir = m.delta > 0 ? "up" : (m.delta < 0 ? "down" : "same");
    out += csv_field(m.subset) + "," + csv_field(m.model) + "," + format_number(m.baseline_rank) +
           "," + format_number(m.target_rank) + "," + format_number(m.delta) + "," + dir + "\n";
  }
  return out;
}

std::string tau_csv(const RerankReport& report) {
  std::string out = "subset,samples,tau_within,p_within,tau_vs_overall,p_vs_overall\n";
  for (const auto& s : report.subsets) {
    auto tau = [](const std::optional<TauResult>& t) {
      return optional_number(t ? std::optional(t->tau) : std::nullopt) + "," +
             optional_number(t ? std::optional(t->p_value) : std::nullopt);
    };
    out += csv_field(s.subset) + "," + std::to_string(s.samples) + "," + tau(s.tau_within) + "," +
           tau(s.tau_vs_overall) + "\n";
  }
  return out;
}

std::string tau_alpha_csv(const RerankReport& report) {
  std::string out = "alpha,subset,tau,p_value\n";
  for (const auto& p : report.tau_by_alpha) {
    out += format_number(p.alpha) + "," + csv_field(p.subset) + "," +
           optional_number(p.tau ? std::optional(p.tau->tau) : std::nullopt) + "," +
           optional_number(p.tau ? std::optional(p.tau->p_value) : std::nullopt) + "\n";
  }
  return out;
}

}  // namespace smudge
