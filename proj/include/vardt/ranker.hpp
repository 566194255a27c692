#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "vardt/dtree.hpp"

namespace vardt::rank {

struct RankedVariable {
  std::string method;
  VarOccurrence representative;
  std::string name;  // column name, e.g. `expPos` or `length(str)`
  std::set<int> lines;
  double dep_score = 1.0;
  double ds = 0.0;
  double method_score = 0.0;
  double fs = 0.0;
  double rank = 0.0;
  bool tree_unused = false;

  // `name@[l1,l2]`
  std::string display() const;
};

// Edges from the node down to the nearest leaf holding a FAIL row; -1 if none.
int fail_node_distance(const model::FeatureTable& t, const model::TreeNode& n);

// (1 - weighted child Gini) * sqrt(|D|) / failNodeDist for a split node, 0
// when no FAIL leaf lies below it.
double node_term(const model::FeatureTable& t, const model::TreeNode& n);

// Best node term over every node splitting on `column`, plus the dependency
// penalty. Columns in no tree get the penalty alone.
double discriminative_score(const model::FeatureTable& t, int column, const std::vector<model::DecisionTree>& trees,
                            double dep_score, bool* tree_unused = nullptr);

double final_score(double ds, double method_score);

struct RankOptions {
  bool use_tree = true;
  bool use_method_score = true;
};

// One entry per table column, unranked.
std::vector<RankedVariable> score_method(const model::FeatureTable& t, const std::vector<model::DecisionTree>& trees,
                                         const model::DepScorer& dep, double method_score, const RankOptions& opts = {});

// Sorted by fs descending; equal scores share their average rank.
std::vector<RankedVariable> global_rank(std::vector<RankedVariable> vars);

// `<rank> <fs> <ds> <methodScore> <method> <var>@[lines]` per line.
void write_ranking(std::ostream& os, const std::vector<RankedVariable>& ranking);
void write_ranking_json(std::ostream& os, const std::vector<RankedVariable>& ranking);
std::vector<RankedVariable> read_ranking_json(std::istream& is);

std::string format_rank(double rank);

}  // namespace vardt::rank
