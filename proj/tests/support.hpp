#pragma once

// Shared helpers for the unit and acceptance tests. The oracles here are
// deliberately written from the textbook definitions, not from the library
// code, so that a shared mistake is unlikely.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vardt/dtree.hpp"
#include "vardt/evalkit.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"
#include "vardt/profiler.hpp"
#include "vardt/ranker.hpp"

namespace vardt::testing {

inline bool close(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline eval::CorpusBug corpus_bug(const std::string& id) {
  for (auto& b : eval::seed_corpus()) {
    if (b.id == id) return b;
  }
  throw std::runtime_error("no corpus bug " + id);
}

// -- impurity -------------------------------------------------------------------

inline double oracle_gini(const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::map<int, int> freq;
  for (int l : labels) ++freq[l];
  double sum = 0.0;
  for (const auto& [l, c] : freq) {
    const double p = static_cast<double>(c) / static_cast<double>(labels.size());
    sum += p * p;
  }
  return 1.0 - sum;
}

inline double oracle_entropy(const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  std::map<int, int> freq;
  for (int l : labels) ++freq[l];
  double h = 0.0;
  for (const auto& [l, c] : freq) {
    const double p = static_cast<double>(c) / static_cast<double>(labels.size());
    h -= p * std::log(p) / std::log(2.0);
  }
  return h;
}

// Sample correlation through the raw-sums formula.
inline double oracle_pearson(const std::vector<std::optional<double>>& xs, const std::vector<int>& ys) {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (!xs[k]) continue;
    const double x = *xs[k];
    const double y = ys[k];
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
  if (n < 2) return 0.0;
  const double vx = n * sxx - sx * sx;
  const double vy = n * syy - sy * sy;
  if (vx <= 0 || vy <= 0) return 0.0;
  return std::min(1.0, std::abs((n * sxy - sx * sy) / std::sqrt(vx * vy)));
}

// Labels of the rows in each group of a partition.
using Groups = std::vector<std::vector<int>>;

inline double oracle_gain(const Groups& groups) {
  std::vector<int> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  double rem = 0.0;
  for (const auto& g : groups) {
    rem += static_cast<double>(g.size()) / static_cast<double>(all.size()) * oracle_entropy(g);
  }
  return oracle_entropy(all) - rem;
}

inline double oracle_split_info(const Groups& groups) {
  double total = 0.0;
  for (const auto& g : groups) total += static_cast<double>(g.size());
  double si = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const double w = static_cast<double>(g.size()) / total;
    si -= w * std::log(w) / std::log(2.0);
  }
  return si;
}

inline double oracle_ratio(const Groups& groups) {
  const double si = oracle_split_info(groups);
  return si > 0 ? std::max(0.0, oracle_gain(groups)) / si : 0.0;
}

struct OracleCut {
  double value = 0.0;  // rows with x <= value go left
  double gain = 0.0;
  double ratio = 0.0;
};

// Every cut between adjacent distinct observed values; missing cells form a
// group of their own.
inline std::vector<OracleCut> oracle_cuts(const model::Column& c, const std::vector<int>& rows,
                                          const std::vector<profile::Label>& labels) {
  std::set<double> distinct;
  for (int r : rows) {
    if (c.cells[static_cast<std::size_t>(r)].present) distinct.insert(c.cells[static_cast<std::size_t>(r)].number);
  }
  std::vector<OracleCut> out;
  if (distinct.size() < 2) return out;
  std::vector<double> vals(distinct.begin(), distinct.end());
  for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
    Groups g(3);
    for (int r : rows) {
      const auto& cell = c.cells[static_cast<std::size_t>(r)];
      const int y = labels[static_cast<std::size_t>(r)] == profile::Label::kFail ? 1 : 0;
      g[!cell.present ? 2 : (cell.number <= vals[k] ? 0 : 1)].push_back(y);
    }
    out.push_back(OracleCut{vals[k], oracle_gain(g), oracle_ratio(g)});
  }
  return out;
}

// Gain ratio of a column on `rows` from first principles.
inline double oracle_gain_ratio(const model::Column& c, const std::vector<int>& rows,
                                const std::vector<profile::Label>& labels) {
  if (c.kind == model::ColumnKind::kNumeric) {
    const auto cuts = oracle_cuts(c, rows, labels);
    if (cuts.empty()) return 0.0;
    double best_gain = cuts[0].gain;
    double ratio = cuts[0].ratio;
    for (const auto& cut : cuts) {
      if (cut.gain > best_gain + 1e-12) {
        best_gain = cut.gain;
        ratio = cut.ratio;
      }
    }
    return ratio;
  }
  std::map<std::string, std::vector<int>> by_value;
  std::vector<int> missing;
  for (int r : rows) {
    const auto& cell = c.cells[static_cast<std::size_t>(r)];
    const int y = labels[static_cast<std::size_t>(r)] == profile::Label::kFail ? 1 : 0;
    if (!cell.present) {
      missing.push_back(y);
    } else {
      const std::string key = c.kind == model::ColumnKind::kNominal ? cell.text : (cell.number != 0 ? "1" : "0");
      by_value[key].push_back(y);
    }
  }
  if (by_value.size() < 2) return 0.0;
  Groups g;
  for (auto& [k, v] : by_value) g.push_back(v);
  g.push_back(missing);
  return oracle_ratio(g);
}

// -- dependency penalty -------------------------------------------------------

// Warshall closure over the graph; reach[x][y] when x depends on y through a
// path of length >= 1.
inline std::vector<std::vector<bool>> closure(const analysis::DependencyGraph& g) {
  const std::size_t n = g.nodes().size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges()) {
    r[static_cast<std::size_t>(g.index_of(e.from))][static_cast<std::size_t>(g.index_of(e.to))] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

// Number of candidate classes (other than v) with an observed member reaching
// an observed member of v, and factor raised to it by repeated products.
inline double oracle_dep_score(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes,
                               const std::set<VarOccurrence>* observed, double factor, const analysis::ClassId& v,
                               const std::vector<analysis::ClassId>& candidates, int* count_out = nullptr) {
  int count = 0;
  if (v.base >= 0 && v.feature.empty()) {
    const auto reach = closure(g);
    auto ok = [&](const VarOccurrence& o) { return !observed || observed->count(o) > 0; };
    std::set<int> counted;
    for (const auto& x : candidates) {
      if (x.base < 0 || !x.feature.empty() || x.base == v.base || counted.count(x.base)) continue;
      bool hit = false;
      for (const auto& a : classes.members(x.base)) {
        for (const auto& b : classes.members(v.base)) {
          if (ok(a) && ok(b) && reach[static_cast<std::size_t>(g.index_of(a))][static_cast<std::size_t>(g.index_of(b))])
            hit = true;
        }
      }
      if (hit) {
        ++count;
        counted.insert(x.base);
      }
    }
  }
  if (count_out) *count_out = count;
  double p = 1.0;
  for (int k = 0; k < count; ++k) p *= factor;
  return p;
}

// -- discriminative score -----------------------------------------------------

inline std::vector<int> labels_of(const model::FeatureTable& t, const std::vector<int>& rows) {
  std::vector<int> out;
  for (int r : rows) out.push_back(t.labels[static_cast<std::size_t>(r)] == profile::Label::kFail ? 1 : 0);
  return out;
}

// Breadth-first distance from a node to the closest leaf with a failing row.
inline int oracle_fail_distance(const model::FeatureTable& t, const model::TreeNode& n) {
  std::queue<std::pair<const model::TreeNode*, int>> q;
  q.push({&n, 0});
  while (!q.empty()) {
    auto [node, d] = q.front();
    q.pop();
    if (node->children.empty()) {
      const auto ls = labels_of(t, node->rows);
      if (std::count(ls.begin(), ls.end(), 1) > 0) return d;
      continue;
    }
    for (const auto& c : node->children) q.push({&c, d + 1});
  }
  return -1;
}

inline double oracle_ds(const model::FeatureTable& t, int column, const std::vector<model::DecisionTree>& trees,
                        double dep) {
  std::vector<double> terms;
  std::vector<const model::TreeNode*> stack;
  for (const auto& tr : trees) stack.push_back(&tr.root);
  while (!stack.empty()) {
    const model::TreeNode* n = stack.back();
    stack.pop_back();
    for (const auto& c : n->children) stack.push_back(&c);
    if (!n->predicate || n->predicate->column != column) continue;
    const int dist = oracle_fail_distance(t, *n);
    if (dist <= 0) {
      terms.push_back(0.0);
      continue;
    }
    double impurity = 0.0;
    for (const auto& c : n->children) {
      impurity += static_cast<double>(c.rows.size()) / static_cast<double>(n->rows.size()) *
                  oracle_gini(labels_of(t, c.rows));
    }
    terms.push_back((1.0 - impurity) * std::sqrt(static_cast<double>(n->rows.size())) / dist);
  }
  const double best = terms.empty() ? 0.0 : *std::max_element(terms.begin(), terms.end());
  return best + dep;
}

// -- random inputs ------------------------------------------------------------

// Random table with `rows` rows and `cols` columns of mixed kinds, both labels
// present. Columns have no graph class (cls.base = -1).
inline model::FeatureTable random_table(std::mt19937& rng, int rows, int cols, double present = 0.8) {
  model::FeatureTable t;
  t.method = "m";
  std::uniform_int_distribution<int> small(-3, 3);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution here(present);
  for (int r = 0; r < rows; ++r) {
    t.test_ids.push_back("t" + std::to_string(r));
    t.labels.push_back(coin(rng) ? profile::Label::kFail : profile::Label::kPass);
  }
  t.labels[0] = profile::Label::kFail;
  t.labels[1] = profile::Label::kPass;
  std::shuffle(t.labels.begin(), t.labels.end(), rng);
  for (int c = 0; c < cols; ++c) {
    model::Column col;
    col.name = "v" + std::to_string(c);
    col.lines = {c + 1};
    const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
    col.kind = kind == 0 ? model::ColumnKind::kNumeric
                         : (kind == 1 ? model::ColumnKind::kBoolean : model::ColumnKind::kNominal);
    for (int r = 0; r < rows; ++r) {
      model::Cell cell;
      cell.present = here(rng);
      if (cell.present) {
        const int v = small(rng);
        cell.number = col.kind == model::ColumnKind::kBoolean ? (v > 0 ? 1.0 : 0.0) : v;
        cell.text = col.kind == model::ColumnKind::kBoolean ? (v > 0 ? "true" : "false") : std::to_string(v % 3);
      }
      col.cells.push_back(cell);
    }
    t.columns.push_back(std::move(col));
  }
  return t;
}

// Ranking over `n` variables named x0.. with scores drawn from a few levels
// so ties are common.
inline std::vector<rank::RankedVariable> random_ranking(std::mt19937& rng, int n) {
  std::vector<rank::RankedVariable> vars;
  std::uniform_int_distribution<int> level(0, 4);
  for (int k = 0; k < n; ++k) {
    rank::RankedVariable v;
    v.method = "m";
    v.name = "x" + std::to_string(k);
    v.lines = {k + 1};
    v.representative.method = "m";
    v.representative.variable = v.name;
    v.representative.line = k + 1;
    v.fs = level(rng) * 0.25;
    vars.push_back(v);
  }
  return rank::global_rank(std::move(vars));
}

// -- metrics ------------------------------------------------------------------

struct OracleMetrics {
  double top[4];
  std::optional<double> mfr, mar;
};

// Metrics recomputed directly from the definitions.
inline OracleMetrics oracle_metrics(const eval::Rankings& rankings, const eval::Truths& truths) {
  OracleMetrics out{};
  const int ns[4] = {1, 3, 5, 10};
  int hits[4] = {0, 0, 0, 0};
  double first_sum = 0, avg_sum = 0;
  int included = 0;
  for (const auto& [bug, g] : truths) {
    std::vector<double> found;
    if (rankings.count(bug)) {
      for (const auto& e : g.entries) {
        double best = 1e300;
        for (const auto& v : rankings.at(bug)) {
          bool shared = false;
          for (int l : v.lines) shared = shared || e.lines.count(l);
          if (v.name == e.name && shared && (e.method.empty() || e.method == v.method)) best = std::min(best, v.rank);
        }
        if (best < 1e300) found.push_back(best);
      }
    }
    if (found.empty()) continue;
    const double first = *std::min_element(found.begin(), found.end());
    for (int k = 0; k < 4; ++k) hits[k] += first <= ns[k];
    first_sum += first;
    avg_sum += std::accumulate(found.begin(), found.end(), 0.0) / static_cast<double>(found.size());
    ++included;
  }
  for (int k = 0; k < 4; ++k) out.top[k] = truths.empty() ? 0.0 : double(hits[k]) / double(truths.size());
  if (included) {
    out.mfr = first_sum / included;
    out.mar = avg_sum / included;
  }
  return out;
}


// One to five bugs with one to three truth entries each; some bugs have no
// ranking at all.
inline std::pair<eval::Rankings, eval::Truths> random_metrics_case(std::mt19937& rng) {
  std::bernoulli_distribution coin(0.5);
  eval::Rankings rankings;
  eval::Truths truths;
  const int bugs = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int b = 0; b < bugs; ++b) {
    const std::string id = "b" + std::to_string(b);
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    if (coin(rng) || b == 0) rankings[id] = random_ranking(rng, n);
    eval::GroundTruth g{id, {}};
    const int entries = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int e = 0; e < entries; ++e) {
      const int k = std::uniform_int_distribution<int>(0, 12)(rng);
      g.entries.push_back({"x" + std::to_string(k), {k + 1}, 1, ""});
    }
    truths[id] = g;
  }
  return {rankings, truths};
}

}  // namespace vardt::testing
