#include "vardt/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace vardt::model {

using analysis::ClassId;
using profile::Label;

const char* to_string(ColumnKind k) {
  switch (k) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kBoolean: return "boolean";
    case ColumnKind::kNominal: return "nominal";
  }
  return "?";
}

std::string Column::display() const {
  std::string out = name + "@[";
  bool first = true;
  for (int l : lines) {
    if (!first) out += ",";
    out += std::to_string(l);
    first = false;
  }
  return out + "]";
}

std::vector<int> FeatureTable::all_rows() const {
  std::vector<int> r(rows());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = static_cast<int>(k);
  return r;
}

int FeatureTable::column_index(const std::string& n) const {
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].display() == n) return static_cast<int>(k);
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].name == n) return static_cast<int>(k);
  }
  return -1;
}

namespace {

bool is_numeric(const profile::ObservedValue& v) {
  using K = profile::ObservedValue::Kind;
  return v.kind == K::kNumeric || v.kind == K::kSize || (v.kind == K::kElement && !v.elem_is_bool);
}

bool is_boolean(const profile::ObservedValue& v) {
  using K = profile::ObservedValue::Kind;
  return v.kind == K::kBoolean || v.kind == K::kNullCheck || (v.kind == K::kElement && v.elem_is_bool);
}

int label_bit(Label l) { return l == Label::kFail ? 1 : 0; }

}  // namespace

FeatureTable build_feature_table(const std::string& method, const std::vector<profile::TestRunTrace>& traces,
                                 const analysis::EquivalenceClasses& classes) {
  FeatureTable t;
  t.method = method;
  // class -> row -> (sequence, value)
  std::map<ClassId, std::map<int, std::pair<std::int64_t, profile::ObservedValue>>> last;
  for (const auto& tr : traces) {
    if (!tr.covers(method)) continue;
    const int row = static_cast<int>(t.test_ids.size());
    t.test_ids.push_back(tr.test_id);
    t.labels.push_back(tr.label);
    for (const auto& o : tr.observations) {
      if (o.occurrence.method != method) continue;
      const ClassId c = classes.class_of(o.occurrence);
      if (c.base < 0) continue;
      auto& slot = last[c];
      auto it = slot.find(row);
      if (it == slot.end() || it->second.first < o.sequence_index) slot[row] = {o.sequence_index, o.value};
    }
  }
  for (const auto& [cls, values] : last) {
    Column col;
    col.cls = cls;
    col.representative = classes.representative(cls);
    col.name = col.representative.name();
    col.lines = classes.lines(cls);
    bool numeric = true;
    bool boolean = true;
    for (const auto& [row, v] : values) {
      numeric = numeric && is_numeric(v.second);
      boolean = boolean && is_boolean(v.second);
    }
    col.kind = numeric ? ColumnKind::kNumeric : (boolean ? ColumnKind::kBoolean : ColumnKind::kNominal);
    col.cells.assign(t.rows(), Cell{});
    for (const auto& [row, v] : values) {
      Cell& cell = col.cells[static_cast<std::size_t>(row)];
      cell.present = true;
      if (col.kind == ColumnKind::kNumeric) {
        cell.number = static_cast<double>(v.second.number);
      } else if (col.kind == ColumnKind::kBoolean) {
        cell.number = v.second.flag ? 1.0 : 0.0;
      }
      cell.text = v.second.to_string();
    }
    t.columns.push_back(std::move(col));
  }
  std::sort(t.columns.begin(), t.columns.end(), [](const Column& a, const Column& b) {
    if (a.line() != b.line()) return a.line() < b.line();
    return a.display() < b.display();
  });
  return t;
}

DepScorer::DepScorer(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes, double factor)
    : factor_(factor) {
  init(g, classes, nullptr);
}

DepScorer::DepScorer(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes, double factor,
                     const std::set<VarOccurrence>& observed)
    : factor_(factor) {
  init(g, classes, &observed);
}

void DepScorer::init(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes,
                     const std::set<VarOccurrence>* observed) {
  auto counts = [&](const VarOccurrence& o) { return !observed || observed->count(o) > 0; };
  const std::size_t n = classes.size();
  reached_by_.assign(n, std::vector<bool>(n, false));
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<int> targets;
    for (const auto& m : classes.members(static_cast<int>(c))) {
      if (counts(m)) targets.push_back(g.index_of(m));
    }
    if (targets.empty()) continue;
    const auto reach = g.reaching(targets);
    for (std::size_t node = 0; node < reach.size(); ++node) {
      if (!reach[node] || !counts(g.nodes()[node])) continue;
      const ClassId d = classes.class_of(g.nodes()[node]);
      if (d.base >= 0 && static_cast<std::size_t>(d.base) != c) reached_by_[c][static_cast<std::size_t>(d.base)] = true;
    }
  }
}

std::set<VarOccurrence> observed_occurrences(const std::string& method,
                                             const std::vector<profile::TestRunTrace>& traces) {
  std::set<VarOccurrence> out;
  for (const auto& t : traces) {
    for (const auto& o : t.observations) {
      if (o.occurrence.method == method) out.insert(o.occurrence.base());
    }
  }
  return out;
}

int DepScorer::dependents(const ClassId& v, const std::vector<ClassId>& candidates) const {
  // Predicate features are not graph nodes: they reach nothing and nothing reaches them.
  if (v.base < 0 || !v.feature.empty() || static_cast<std::size_t>(v.base) >= reached_by_.size()) return 0;
  std::set<int> seen;
  for (const ClassId& x : candidates) {
    if (x.base < 0 || !x.feature.empty() || x.base == v.base) continue;
    if (reached_by_[static_cast<std::size_t>(v.base)][static_cast<std::size_t>(x.base)]) seen.insert(x.base);
  }
  return static_cast<int>(seen.size());
}

double DepScorer::score(const ClassId& v, const std::vector<ClassId>& candidates) const {
  return dep_penalty(factor_, dependents(v, candidates));
}

double dep_penalty(double factor, int dependents) { return std::pow(factor, dependents); }

double entropy(int pass, int fail) {
  const double n = pass + fail;
  if (n == 0) return 0.0;
  double h = 0.0;
  for (int c : {pass, fail}) {
    if (c == 0) continue;
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

double gini(int pass, int fail) {
  const double n = pass + fail;
  if (n == 0) return 0.0;
  const double p = pass / n;
  const double f = fail / n;
  return 1.0 - p * p - f * f;
}

double weighted_gini(const std::vector<std::pair<int, int>>& groups) {
  double total = 0.0;
  for (const auto& [p, f] : groups) total += p + f;
  if (total == 0.0) return 0.0;
  double g = 0.0;
  for (const auto& [p, f] : groups) g += (p + f) / total * gini(p, f);
  return g;
}

double pearson(const std::vector<std::optional<double>>& values, const std::vector<int>& labels) {
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t k = 0; k < values.size() && k < labels.size(); ++k) {
    if (values[k]) pairs.emplace_back(*values[k], labels[k]);
  }
  if (pairs.size() < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxy += (x - mx) * (y - my);
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::min(1.0, std::abs(sxy / std::sqrt(sxx * syy)));
}

int SplitPredicate::branches() const {
  const int observed = kind == ColumnKind::kNominal ? static_cast<int>(values.size()) : 2;
  return observed + (unobserved ? 1 : 0);
}

int SplitPredicate::branch_of(const Column& c, int row) const {
  const Cell& cell = c.cells[static_cast<std::size_t>(row)];
  const int observed = kind == ColumnKind::kNominal ? static_cast<int>(values.size()) : 2;
  if (!cell.present) return observed;
  switch (kind) {
    case ColumnKind::kNumeric: return cell.number <= threshold ? 0 : 1;
    case ColumnKind::kBoolean: return cell.number != 0.0 ? 0 : 1;
    case ColumnKind::kNominal: {
      auto it = std::lower_bound(values.begin(), values.end(), cell.text);
      if (it == values.end() || *it != cell.text) return observed;  // value unseen at split time
      return static_cast<int>(it - values.begin());
    }
  }
  return observed;
}

std::string SplitPredicate::branch_label(int branch) const {
  const int observed = kind == ColumnKind::kNominal ? static_cast<int>(values.size()) : 2;
  if (branch >= observed) return "UNOBSERVED";
  switch (kind) {
    case ColumnKind::kNumeric: {
      std::ostringstream os;
      os.precision(12);
      os << (branch == 0 ? "<= " : "> ") << threshold;
      return os.str();
    }
    case ColumnKind::kBoolean: return branch == 0 ? "true" : "false";
    case ColumnKind::kNominal: return values[static_cast<std::size_t>(branch)];
  }
  return "?";
}

namespace {

struct Counts {
  int pass = 0;
  int fail = 0;
  int total() const { return pass + fail; }
};

Counts count(const FeatureTable& t, const std::vector<int>& rows) {
  Counts c;
  for (int r : rows) (t.labels[static_cast<std::size_t>(r)] == Label::kFail ? c.fail : c.pass)++;
  return c;
}

// Information gain and split information of a grouping of `rows`.
std::pair<double, double> gain_and_split_info(const FeatureTable& t, const std::vector<std::vector<int>>& groups) {
  Counts all;
  for (const auto& g : groups) {
    const Counts c = count(t, g);
    all.pass += c.pass;
    all.fail += c.fail;
  }
  const double n = all.total();
  if (n == 0) return {0.0, 0.0};
  double remainder = 0.0;
  double split_info = 0.0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    const Counts c = count(t, g);
    const double w = c.total() / n;
    remainder += w * entropy(c.pass, c.fail);
    split_info -= w * std::log2(w);
  }
  return {entropy(all.pass, all.fail) - remainder, split_info};
}

std::vector<std::vector<int>> groups_of(const FeatureTable& t, const std::vector<int>& rows, const SplitPredicate& p) {
  std::vector<std::vector<int>> g(static_cast<std::size_t>(p.branches()));
  const Column& c = t.columns[static_cast<std::size_t>(p.column)];
  for (int r : rows) g[static_cast<std::size_t>(p.branch_of(c, r))].push_back(r);
  return g;
}

constexpr double kTieEps = 1e-12;

bool strictly_greater(double a, double b) { return a > b + kTieEps * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

SplitEval evaluate_split(const FeatureTable& t, int column, const std::vector<int>& rows) {
  const Column& c = t.columns[static_cast<std::size_t>(column)];
  SplitPredicate base;
  base.column = column;
  base.kind = c.kind;
  std::vector<double> numbers;
  std::set<std::string> texts;
  for (int r : rows) {
    const Cell& cell = c.cells[static_cast<std::size_t>(r)];
    if (!cell.present) {
      base.unobserved = true;
      continue;
    }
    numbers.push_back(cell.number);
    texts.insert(c.kind == ColumnKind::kNominal ? cell.text : std::to_string(cell.number));
  }
  SplitEval out;
  if (texts.size() < 2) return out;

  if (c.kind == ColumnKind::kNumeric) {
    std::sort(numbers.begin(), numbers.end());
    numbers.erase(std::unique(numbers.begin(), numbers.end()), numbers.end());
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < numbers.size(); ++k) {
      SplitPredicate p = base;
      p.threshold = numbers[k] + (numbers[k + 1] - numbers[k]) / 2.0;
      const auto [gain, split_info] = gain_and_split_info(t, groups_of(t, rows, p));
      if (!out.predicate || strictly_greater(gain, best_gain)) {
        best_gain = gain;
        out.gain = gain;
        out.gain_ratio = split_info > 0.0 ? std::max(0.0, gain) / split_info : 0.0;
        out.predicate = p;
      }
    }
    return out;
  }
  if (c.kind == ColumnKind::kNominal) base.values.assign(texts.begin(), texts.end());
  const auto [gain, split_info] = gain_and_split_info(t, groups_of(t, rows, base));
  out.gain = gain;
  out.gain_ratio = split_info > 0.0 ? std::max(0.0, gain) / split_info : 0.0;
  out.predicate = base;
  return out;
}

double gain_ratio(const FeatureTable& t, int column, const std::vector<int>& rows) {
  return evaluate_split(t, column, rows).gain_ratio;
}

SplitPredicate calculate_condition(const FeatureTable& t, const std::vector<int>& rows, int column) {
  const Column& c = t.columns[static_cast<std::size_t>(column)];
  bool any = false;
  for (int r : rows) any = any || c.cells[static_cast<std::size_t>(r)].present;
  if (!any) throw UnobservedColumn("column " + c.display() + " is unobserved on every row");
  SplitEval e = evaluate_split(t, column, rows);
  if (e.predicate) return *e.predicate;
  // A single observed value: everything observed goes one way.
  SplitPredicate p;
  p.column = column;
  p.kind = c.kind;
  for (int r : rows) {
    const Cell& cell = c.cells[static_cast<std::size_t>(r)];
    if (!cell.present) {
      p.unobserved = true;
    } else if (c.kind == ColumnKind::kNumeric) {
      p.threshold = cell.number;
    } else if (c.kind == ColumnKind::kNominal && p.values.empty()) {
      p.values.push_back(cell.text);
    }
  }
  return p;
}

std::vector<std::pair<int, std::vector<int>>> partition(const FeatureTable& t, const std::vector<int>& rows,
                                                        const SplitPredicate& p) {
  std::vector<std::pair<int, std::vector<int>>> out;
  auto groups = groups_of(t, rows, p);
  for (std::size_t b = 0; b < groups.size(); ++b) {
    if (!groups[b].empty()) out.emplace_back(static_cast<int>(b), std::move(groups[b]));
  }
  return out;
}

std::vector<PriorityScore> prioritize_vars(const FeatureTable& t, const std::vector<int>& rows,
                                           const std::vector<int>& var_list, const DepScorer& dep) {
  std::vector<ClassId> candidates;
  for (int v : var_list) candidates.push_back(t.columns[static_cast<std::size_t>(v)].cls);
  std::vector<int> labels;
  for (int r : rows) labels.push_back(label_bit(t.labels[static_cast<std::size_t>(r)]));

  auto before = [&](const PriorityScore& a, const PriorityScore& b) {
    if (strictly_greater(a.combined, b.combined)) return true;
    if (strictly_greater(b.combined, a.combined)) return false;
    const Column& ca = t.columns[static_cast<std::size_t>(a.column)];
    const Column& cb = t.columns[static_cast<std::size_t>(b.column)];
    if (ca.line() != cb.line()) return ca.line() < cb.line();
    if (ca.name != cb.name) return ca.name < cb.name;
    return a.column < b.column;
  };

  std::vector<PriorityScore> scored;
  std::map<ClassId, std::size_t> by_class;
  for (int v : var_list) {
    const Column& c = t.columns[static_cast<std::size_t>(v)];
    PriorityScore s;
    s.column = v;
    s.gain_ratio = gain_ratio(t, v, rows);
    if (c.kind != ColumnKind::kNominal) {
      std::vector<std::optional<double>> values;
      for (int r : rows) {
        const Cell& cell = c.cells[static_cast<std::size_t>(r)];
        values.push_back(cell.present ? std::optional<double>(cell.number) : std::nullopt);
      }
      s.correlation = pearson(values, labels);
    }
    s.dep_score = dep.score(c.cls, candidates);
    s.combined = (s.gain_ratio + s.correlation) * s.dep_score;
    if (c.cls.base >= 0) {
      auto [it, inserted] = by_class.emplace(c.cls, scored.size());
      if (!inserted) {
        if (before(s, scored[it->second])) scored[it->second] = s;
        continue;
      }
    }
    scored.push_back(s);
  }
  // Insertion sort: `before` uses a tolerance, so keep the algorithm simple.
  for (std::size_t i = 1; i < scored.size(); ++i) {
    for (std::size_t j = i; j > 0 && before(scored[j], scored[j - 1]); --j) std::swap(scored[j], scored[j - 1]);
  }
  return scored;
}

namespace {

bool mixed(const FeatureTable& t, const std::vector<int>& rows) {
  const Counts c = count(t, rows);
  return c.pass > 0 && c.fail > 0;
}

bool observed_in(const Column& c, const std::vector<int>& rows) {
  return std::any_of(rows.begin(), rows.end(), [&](int r) { return c.cells[static_cast<std::size_t>(r)].present; });
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureTable& t, const DepScorer& dep, const TreeOptions& opts, std::size_t depth_cap)
      : t_(t), dep_(dep), opts_(opts), depth_cap_(depth_cap) {}

  TreeNode build(std::vector<int> rows, const std::vector<int>& vars, std::size_t depth) {
    TreeNode node;
    node.id = next_id_++;
    node.rows = std::move(rows);
    const int min_rows = depth == 0 ? opts_.min_split_rows_root : opts_.min_split_rows;
    if (static_cast<int>(node.rows.size()) < min_rows || !mixed(t_, node.rows) || depth >= depth_cap_) return node;

    for (const PriorityScore& s : prioritize_vars(t_, node.rows, vars, dep_)) {
      const Column& c = t_.columns[static_cast<std::size_t>(s.column)];
      if (!(s.combined > 0.0) || !observed_in(c, node.rows)) continue;
      SplitPredicate p = calculate_condition(t_, node.rows, s.column);
      auto groups = partition(t_, node.rows, p);
      if (groups.size() < 2) return node;  // no progress
      std::vector<int> child_vars;
      for (int v : vars) {
        if (v != s.column || (opts_.reuse_numeric && c.kind == ColumnKind::kNumeric)) child_vars.push_back(v);
      }
      node.predicate = p;
      for (auto& [branch, g] : groups) {
        node.branch_index.push_back(branch);
        node.children.push_back(build(std::move(g), child_vars, depth + 1));
      }
      return node;
    }
    return node;
  }

 private:
  const FeatureTable& t_;
  const DepScorer& dep_;
  const TreeOptions& opts_;
  std::size_t depth_cap_;
  int next_id_ = 0;
};

void collect_used(const TreeNode& n, std::set<int>& out) {
  if (n.predicate) out.insert(n.predicate->column);
  for (const auto& c : n.children) collect_used(c, out);
}

}  // namespace

std::set<int> DecisionTree::used_columns() const {
  std::set<int> out;
  collect_used(root, out);
  return out;
}

DecisionTree build_tree(const FeatureTable& t, const std::vector<int>& rows, const std::vector<int>& var_list,
                        const DepScorer& dep, const TreeOptions& opts) {
  TreeBuilder b(t, dep, opts, var_list.size() + 1);
  return DecisionTree{b.build(rows, var_list, 0)};
}

bool passes_gate(const FeatureTable& t) { return t.rows() >= 3 && mixed(t, t.all_rows()); }

std::vector<DecisionTree> build_model(const FeatureTable& t, const DepScorer& dep, const TreeOptions& opts) {
  if (!passes_gate(t)) throw InsufficientTests();
  std::vector<int> remaining;
  for (std::size_t k = 0; k < t.columns.size(); ++k) remaining.push_back(static_cast<int>(k));
  std::vector<DecisionTree> model;
  while (!remaining.empty()) {
    DecisionTree tree = build_tree(t, t.all_rows(), remaining, dep, opts);
    const std::set<int> used = tree.used_columns();
    if (tree.is_leaf() || used.empty()) break;
    std::erase_if(remaining, [&](int v) { return used.count(v) > 0; });
    model.push_back(std::move(tree));
  }
  return model;
}

std::string predicate_text(const FeatureTable& t, const SplitPredicate& p) {
  const Column& c = t.columns[static_cast<std::size_t>(p.column)];
  std::ostringstream os;
  os.precision(12);
  os << c.display();
  switch (p.kind) {
    case ColumnKind::kNumeric: os << " <= " << p.threshold; break;
    case ColumnKind::kBoolean: os << " == true"; break;
    case ColumnKind::kNominal: {
      os << " in {";
      for (std::size_t k = 0; k < p.values.size(); ++k) os << (k ? "|" : "") << p.values[k];
      os << "}";
      break;
    }
  }
  if (p.unobserved) os << " +UNOBSERVED";
  return os.str();
}

namespace {

void render_node(std::ostream& os, const FeatureTable& t, const TreeNode& n, int depth) {
  os << depth << ' ' << (n.predicate ? predicate_text(t, *n.predicate) : "LEAF") << " tests=[";
  for (std::size_t k = 0; k < n.rows.size(); ++k) {
    os << (k ? "," : "") << t.test_ids[static_cast<std::size_t>(n.rows[k])];
  }
  const Counts c = count(t, n.rows);
  os << "] labels={P:" << c.pass << ",F:" << c.fail << "}\n";
  for (const auto& child : n.children) render_node(os, t, child, depth + 1);
}

}  // namespace

void render(std::ostream& os, const FeatureTable& t, const DecisionTree& tree) { render_node(os, t, tree.root, 0); }

}  // namespace vardt::model
