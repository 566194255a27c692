#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vardt/dependence.hpp"
#include "vardt/profiler.hpp"

namespace vardt::model {

enum class ColumnKind { kNumeric, kBoolean, kNominal };
const char* to_string(ColumnKind k);

struct Cell {
  bool present = false;
  double number = 0.0;  // numeric value, or 0/1 for booleans
  std::string text;     // nominal value
};

struct Column {
  std::string name;               // e.g. `length(str)`
  analysis::ClassId cls;          // base -1 for columns not tied to a graph
  VarOccurrence representative;   // smallest-line member
  std::set<int> lines;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<Cell> cells;        // one per row

  // `name@[l1,l2]`
  std::string display() const;
  int line() const { return lines.empty() ? 0 : *lines.begin(); }
};

struct FeatureTable {
  std::string method;
  std::vector<std::string> test_ids;
  std::vector<profile::Label> labels;
  std::vector<Column> columns;

  std::size_t rows() const { return test_ids.size(); }
  std::vector<int> all_rows() const;
  int column_index(const std::string& name) const;  // by display() or name; -1 if absent
};

// Rows are the tests covering `method`; one column per equivalence class,
// valued by the last observation of any class member in that run.
FeatureTable build_feature_table(const std::string& method, const std::vector<profile::TestRunTrace>& traces,
                                 const analysis::EquivalenceClasses& classes);

// Counts how many other candidate classes depend on a class, and turns that
// into the penalty factor^count.
class DepScorer {
 public:
  DepScorer() = default;  // no graph: nothing depends on anything
  DepScorer(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes, double factor);
  // Only `observed` occurrences stand for their class on either end of a path.
  DepScorer(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes, double factor,
            const std::set<VarOccurrence>& observed);

  double factor() const { return factor_; }
  int dependents(const analysis::ClassId& v, const std::vector<analysis::ClassId>& candidates) const;
  double score(const analysis::ClassId& v, const std::vector<analysis::ClassId>& candidates) const;

 private:
  double factor_ = 1.0;
  // reached_by_[c][d]: some member of class d reaches a member of class c.
  std::vector<std::vector<bool>> reached_by_;

  void init(const analysis::DependencyGraph& g, const analysis::EquivalenceClasses& classes,
            const std::set<VarOccurrence>* observed);
};

// Base occurrences of `method` with at least one observation.
std::set<VarOccurrence> observed_occurrences(const std::string& method,
                                             const std::vector<profile::TestRunTrace>& traces);

double dep_penalty(double factor, int dependents);

// -- impurity and correlation -------------------------------------------------

double entropy(int pass, int fail);
double gini(int pass, int fail);
// Weighted impurity of a partition: sum |D_c|/|D| * gini(D_c).
double weighted_gini(const std::vector<std::pair<int, int>>& groups);

// |r| over rows where the value is present; 0 for constant vectors or fewer
// than two pairs. Labels: PASS=0, FAIL=1.
double pearson(const std::vector<std::optional<double>>& values, const std::vector<int>& labels);

// -- splits -------------------------------------------------------------------

struct SplitPredicate {
  int column = -1;
  ColumnKind kind = ColumnKind::kNumeric;
  double threshold = 0.0;           // numeric: <= threshold / > threshold
  std::vector<std::string> values;  // nominal branches in sorted order
  bool unobserved = false;          // rows without a value get their own branch

  int branches() const;
  // Branch index of a row; the UNOBSERVED branch is last.
  int branch_of(const Column& c, int row) const;
  std::string branch_label(int branch) const;
};

struct SplitEval {
  double gain_ratio = 0.0;
  double gain = 0.0;
  std::optional<SplitPredicate> predicate;  // absent when the column cannot split
};

// C4.5 gain ratio of the column's best split on the given rows. Numeric
// columns try every midpoint between adjacent distinct values and keep the
// one with the highest information gain, smallest threshold on ties.
SplitEval evaluate_split(const FeatureTable& t, int column, const std::vector<int>& rows);
double gain_ratio(const FeatureTable& t, int column, const std::vector<int>& rows);

class UnobservedColumn : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SplitPredicate calculate_condition(const FeatureTable& t, const std::vector<int>& rows, int column);

// Non-empty row groups in branch order, with their branch indices.
std::vector<std::pair<int, std::vector<int>>> partition(const FeatureTable& t, const std::vector<int>& rows,
                                                        const SplitPredicate& p);

// -- prioritization -------------------------------------------------------------

struct PriorityScore {
  int column = -1;
  double gain_ratio = 0.0;
  double correlation = 0.0;
  double dep_score = 1.0;
  double combined = 0.0;
};

// Columns scored on the given rows, best first. Columns sharing a class keep
// only the best-scoring one.
std::vector<PriorityScore> prioritize_vars(const FeatureTable& t, const std::vector<int>& rows,
                                           const std::vector<int>& var_list, const DepScorer& dep);

// -- trees --------------------------------------------------------------------

struct TreeNode {
  int id = 0;
  std::vector<int> rows;
  std::optional<SplitPredicate> predicate;
  std::vector<int> branch_index;  // per child
  std::vector<TreeNode> children;

  bool is_leaf() const { return children.empty(); }
};

struct DecisionTree {
  TreeNode root;
  std::set<int> used_columns() const;
  bool is_leaf() const { return root.is_leaf(); }
};

struct TreeOptions {
  int min_split_rows_root = 3;  // the root needs more than two tests
  int min_split_rows = 2;       // inner nodes split any mixed pair
  bool reuse_numeric = false;   // numeric columns stay available below their split
};

DecisionTree build_tree(const FeatureTable& t, const std::vector<int>& rows, const std::vector<int>& var_list,
                        const DepScorer& dep, const TreeOptions& opts = {});

class InsufficientTests : public std::runtime_error {
 public:
  InsufficientTests() : std::runtime_error("insufficient tests") {}
};

// True when the table has >= 3 rows with both labels present.
bool passes_gate(const FeatureTable& t);

// Trees over disjoint variable sets, in construction order.
std::vector<DecisionTree> build_model(const FeatureTable& t, const DepScorer& dep, const TreeOptions& opts = {});

// One node per line, pre-order:
// `<depth> <predicate|LEAF> tests=[ids] labels={P:x,F:y}`
void render(std::ostream& os, const FeatureTable& t, const DecisionTree& tree);
std::string predicate_text(const FeatureTable& t, const SplitPredicate& p);

}  // namespace vardt::model
