#include "vardt/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace vardt::rank {

using model::DecisionTree;
using model::FeatureTable;
using model::TreeNode;
using profile::Label;

std::string RankedVariable::display() const {
  std::string out = name + "@[";
  bool first = true;
  for (int l : lines) {
    if (!first) out += ",";
    out += std::to_string(l);
    first = false;
  }
  return out + "]";
}

namespace {

bool has_fail(const FeatureTable& t, const std::vector<int>& rows) {
  return std::any_of(rows.begin(), rows.end(),
                     [&](int r) { return t.labels[static_cast<std::size_t>(r)] == Label::kFail; });
}

std::pair<int, int> counts(const FeatureTable& t, const std::vector<int>& rows) {
  std::pair<int, int> c{0, 0};
  for (int r : rows) (t.labels[static_cast<std::size_t>(r)] == Label::kFail ? c.second : c.first)++;
  return c;
}

template <typename Fn>
void for_each_node(const TreeNode& n, Fn&& fn) {
  fn(n);
  for (const auto& c : n.children) for_each_node(c, fn);
}

}  // namespace

int fail_node_distance(const FeatureTable& t, const TreeNode& n) {
  if (n.is_leaf()) return has_fail(t, n.rows) ? 0 : -1;
  int best = -1;
  for (const auto& c : n.children) {
    const int d = fail_node_distance(t, c);
    if (d >= 0 && (best < 0 || d + 1 < best)) best = d + 1;
  }
  return best;
}

double node_term(const FeatureTable& t, const TreeNode& n) {
  if (n.is_leaf()) return 0.0;
  const int dist = fail_node_distance(t, n);
  if (dist <= 0) return 0.0;
  std::vector<std::pair<int, int>> groups;
  for (const auto& c : n.children) groups.push_back(counts(t, c.rows));
  return (1.0 - model::weighted_gini(groups)) * std::sqrt(static_cast<double>(n.rows.size())) / dist;
}

double discriminative_score(const FeatureTable& t, int column, const std::vector<DecisionTree>& trees,
                            double dep_score, bool* tree_unused) {
  bool used = false;
  double best = 0.0;
  for (const auto& tree : trees) {
    for_each_node(tree.root, [&](const TreeNode& n) {
      if (!n.predicate || n.predicate->column != column) return;
      const double term = node_term(t, n);
      best = used ? std::max(best, term) : term;
      used = true;
    });
  }
  if (tree_unused) *tree_unused = !used;
  return best + dep_score;
}

double final_score(double ds, double method_score) { return ds * method_score * method_score; }

std::vector<RankedVariable> score_method(const FeatureTable& t, const std::vector<DecisionTree>& trees,
                                         const model::DepScorer& dep, double method_score, const RankOptions& opts) {
  std::vector<analysis::ClassId> all;
  for (const auto& c : t.columns) all.push_back(c.cls);
  static const std::vector<DecisionTree> kNoTrees;
  std::vector<RankedVariable> out;
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    const auto& c = t.columns[k];
    RankedVariable v;
    v.method = t.method;
    v.representative = c.representative;
    v.name = c.name;
    v.lines = c.lines;
    v.dep_score = dep.score(c.cls, all);
    v.ds = discriminative_score(t, static_cast<int>(k), opts.use_tree ? trees : kNoTrees, v.dep_score, &v.tree_unused);
    v.method_score = method_score;
    v.fs = opts.use_method_score ? final_score(v.ds, method_score) : v.ds;
    out.push_back(std::move(v));
  }
  return out;
}

namespace {

bool same_score(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

std::vector<RankedVariable> global_rank(std::vector<RankedVariable> vars) {
  std::sort(vars.begin(), vars.end(), [](const RankedVariable& a, const RankedVariable& b) {
    if (a.fs != b.fs) return a.fs > b.fs;
    if (a.method != b.method) return a.method < b.method;
    if (a.representative.line != b.representative.line) return a.representative.line < b.representative.line;
    return a.name < b.name;
  });
  std::size_t i = 0;
  while (i < vars.size()) {
    std::size_t j = i + 1;
    while (j < vars.size() && same_score(vars[j].fs, vars[i].fs)) ++j;
    // Positions i+1 .. j share the mean of their ranks.
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) vars[k].rank = avg;
    i = j;
  }
  return vars;
}

std::string format_rank(double rank) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", rank);
  return buf;
}

void write_ranking(std::ostream& os, const std::vector<RankedVariable>& ranking) {
  char buf[96];
  for (const auto& v : ranking) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f", v.fs, v.ds, v.method_score);
    os << format_rank(v.rank) << ' ' << buf << ' ' << v.method << ' ' << v.display() << '\n';
  }
}

void write_ranking_json(std::ostream& os, const std::vector<RankedVariable>& ranking) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : ranking) {
    arr.push_back({{"rank", v.rank},
                   {"fs", v.fs},
                   {"ds", v.ds},
                   {"dep_score", v.dep_score},
                   {"method_score", v.method_score},
                   {"method", v.method},
                   {"name", v.name},
                   {"variable", v.representative.variable},
                   {"feature", v.representative.feature},
                   {"kind", to_string(v.representative.kind)},
                   {"base_kind", to_string(v.representative.base_kind)},
                   {"line", v.representative.line},
                   {"lines", v.lines},
                   {"tree_unused", v.tree_unused}});
  }
  os << arr.dump(2) << '\n';
}

std::vector<RankedVariable> read_ranking_json(std::istream& is) {
  const auto arr = nlohmann::json::parse(is);
  std::vector<RankedVariable> out;
  for (const auto& j : arr) {
    RankedVariable v;
    v.rank = j.at("rank").get<double>();
    v.fs = j.at("fs").get<double>();
    v.ds = j.at("ds").get<double>();
    v.dep_score = j.at("dep_score").get<double>();
    v.method_score = j.at("method_score").get<double>();
    v.method = j.at("method").get<std::string>();
    v.name = j.at("name").get<std::string>();
    v.representative.method = v.method;
    v.representative.variable = j.at("variable").get<std::string>();
    v.representative.feature = j.at("feature").get<std::string>();
    v.representative.kind = occ_kind_from_string(j.at("kind").get<std::string>());
    v.representative.base_kind = occ_kind_from_string(j.at("base_kind").get<std::string>());
    v.representative.line = j.at("line").get<int>();
    v.lines = j.at("lines").get<std::set<int>>();
    v.tree_unused = j.at("tree_unused").get<bool>();
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vardt::rank
