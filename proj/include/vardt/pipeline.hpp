#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vardt/dependence.hpp"
#include "vardt/dtree.hpp"
#include "vardt/evalkit.hpp"
#include "vardt/profiler.hpp"
#include "vardt/ranker.hpp"
#include "vardt/sbfl.hpp"
#include "vardt/slicer.hpp"

namespace vardt::pipeline {

struct PipelineConfig {
  double dep_factor = 0.8;
  int top_k = 10;
  sbfl::Formula formula = sbfl::Formula::kOchiai;
  bool slicing = true;
  bool tree_model = true;
  bool dep_penalty = true;
  bool method_score = true;
  std::optional<std::string> method_known;
  int jobs = 1;
  std::int64_t step_budget = 1'000'000;
  model::TreeOptions tree;

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
  double effective_factor() const { return dep_penalty ? dep_factor : 1.0; }
};

struct MethodAnalysis {
  std::string method;
  double method_score = 0.0;
  analysis::DependencyGraph graph;
  analysis::EquivalenceClasses classes;
  std::optional<slicing::Slice> slice;
  double reduction = 0.0;
  // Occurrences kept by the slice and occurrences on lines any test
  // executed, for corpus-level reduction ratios.
  std::size_t sliced_occurrences = 0;
  std::size_t covered_occurrences = 0;
  model::FeatureTable table;
  std::vector<model::DecisionTree> trees;
  std::string skipped;  // why the method produced no variables
  double tree_build_ms = 0.0;
};

struct LocalizeResult {
  lang::Program program;  // GSA form
  std::vector<profile::TestRunTrace> coverage;
  std::vector<profile::TestRunTrace> profile;
  std::vector<sbfl::MethodScore> methods;
  std::vector<MethodAnalysis> analyses;
  std::vector<rank::RankedVariable> ranking;
  std::vector<std::string> diagnostics;
};

// No analyzed method met the >= 3 tests / both labels requirement.
class GateFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Method ranking, slicing, profiling of the sliced lines, trees, ranking.
LocalizeResult localize(const lang::Program& program, const std::vector<lang::TestCase>& suite,
                        const PipelineConfig& config);

// Same, from traces recorded for every line (e.g. by the trace command).
LocalizeResult localize_traces(const lang::Program& program, std::vector<profile::TestRunTrace> traces,
                               const PipelineConfig& config);

struct BugOutcome {
  std::string bug_id;
  std::vector<rank::RankedVariable> ranking;
  std::string error;
  std::optional<double> reduction;  // slicing reduction over the analyzed methods
  double tree_build_ms = 0.0;
};

struct EvalResult {
  eval::MetricsReport metrics;
  std::vector<BugOutcome> bugs;
  double mean_tree_build_ms = 0.0;
};

// Localizes every bug (concurrently up to config.jobs) and scores the lists.
EvalResult evaluate_corpus(const std::vector<eval::CorpusBug>& corpus, const PipelineConfig& config);

// Named configurations: full and the four single-component ablations.
std::vector<std::pair<std::string, PipelineConfig>> ablations(const PipelineConfig& base);

// Runs fn(0..n-1) on up to `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace vardt::pipeline
