#include "vardt/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"

namespace vardt::pipeline {

using profile::Label;
using profile::TestRunTrace;

void PipelineConfig::validate() const {
  if (!(dep_factor > 0.0 && dep_factor <= 1.0)) throw std::invalid_argument("dep factor must lie in (0,1]");
  if (top_k < 1) throw std::invalid_argument("top-k must be at least 1");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  if (step_budget < 1) throw std::invalid_argument("step budget must be positive");
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(n);
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (std::size_t w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) {
        try {
          fn(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

using Tracked = std::optional<std::set<std::pair<std::string, int>>>;
using Profiler = std::function<std::vector<TestRunTrace>(const Tracked&)>;

std::vector<sbfl::MethodScore> select_methods(const lang::Program& p, const std::vector<TestRunTrace>& coverage,
                                              const PipelineConfig& c) {
  const auto matrix = sbfl::build_matrix(coverage);
  if (c.method_known) {
    if (!p.find(*c.method_known)) throw std::invalid_argument("unknown method '" + *c.method_known + "'");
    return {sbfl::MethodScore{*c.method_known, 1.0}};
  }
  return sbfl::rank_methods(matrix, c.formula, c.top_k);
}

LocalizeResult run(const lang::Program& transformed, std::vector<TestRunTrace> coverage, const Profiler& profiler,
                   const PipelineConfig& config) {
  config.validate();
  LocalizeResult r;
  r.program = transformed;
  r.coverage = std::move(coverage);
  r.methods = select_methods(r.program, r.coverage, config);

  for (const auto& ms : r.methods) {
    MethodAnalysis a;
    a.method = ms.method;
    a.method_score = ms.score;
    const lang::Method* m = r.program.find(ms.method);
    a.graph = analysis::build_dependence_graph(*m);
    a.classes = analysis::EquivalenceClasses(a.graph, *m);
    r.analyses.push_back(std::move(a));
  }

  Tracked tracked;
  if (config.slicing) {
    tracked.emplace();
    for (auto& a : r.analyses) {
      a.slice = slicing::slice_method(a.graph, r.coverage);
      a.sliced_occurrences = a.slice->occurrences.size();
      a.reduction = slicing::reduction_ratio(*a.slice, a.graph, r.coverage);
      a.covered_occurrences = slicing::covered_occurrences(a.graph, r.coverage);
      for (int l : a.slice->lines) tracked->insert({a.method, l});
    }
  }
  r.profile = profiler(tracked);

  const double factor = config.effective_factor();
  parallel_for(r.analyses.size(), config.jobs, [&](std::size_t k) {
    MethodAnalysis& a = r.analyses[k];
    a.table = model::build_feature_table(a.method, r.profile, a.classes);
    if (!model::passes_gate(a.table)) {
      int failed = 0;
      for (auto l : a.table.labels) failed += l == Label::kFail;
      a.skipped = "method " + a.method + " skipped: insufficient tests (" + std::to_string(a.table.rows()) +
                  " covering, " + std::to_string(failed) + " failed)";
      return;
    }
    const model::DepScorer dep(a.graph, a.classes, factor, model::observed_occurrences(a.method, r.profile));
    if (config.tree_model) {
      const auto start = std::chrono::steady_clock::now();
      a.trees = model::build_model(a.table, dep, config.tree);
      a.tree_build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  });

  std::vector<rank::RankedVariable> all;
  rank::RankOptions opts{config.tree_model, config.method_score};
  bool any = false;
  for (const auto& a : r.analyses) {
    if (!a.skipped.empty()) {
      r.diagnostics.push_back(a.skipped);
      continue;
    }
    any = true;
    const model::DepScorer dep(a.graph, a.classes, factor, model::observed_occurrences(a.method, r.profile));
    auto vars = rank::score_method(a.table, a.trees, dep, a.method_score, opts);
    all.insert(all.end(), vars.begin(), vars.end());
  }
  if (!any) throw GateFailure("no method is covered by at least three tests with both outcomes");
  r.ranking = rank::global_rank(std::move(all));
  return r;
}

}  // namespace

LocalizeResult localize(const lang::Program& program, const std::vector<lang::TestCase>& suite,
                        const PipelineConfig& config) {
  config.validate();
  const lang::Program p = lang::transform_gsa(program);
  profile::RunOptions cov;
  cov.step_budget = config.step_budget;
  cov.record = false;
  auto coverage = profile::run_suite(p, suite, cov, config.jobs);
  return run(p, std::move(coverage),
             [&](const Tracked& tracked) {
               profile::RunOptions opts;
               opts.step_budget = config.step_budget;
               opts.tracked = tracked;
               return profile::run_suite(p, suite, opts, config.jobs);
             },
             config);
}

LocalizeResult localize_traces(const lang::Program& program, std::vector<TestRunTrace> traces,
                               const PipelineConfig& config) {
  const lang::Program p = lang::transform_gsa(program);
  const std::vector<TestRunTrace> full = traces;
  return run(p, std::move(traces),
             [&](const Tracked& tracked) {
               std::vector<TestRunTrace> out = full;
               if (!tracked) return out;
               for (auto& t : out) {
                 std::erase_if(t.observations, [&](const profile::VariableObservation& o) {
                   return !tracked->count({o.occurrence.method, o.occurrence.line});
                 });
               }
               return out;
             },
             config);
}

EvalResult evaluate_corpus(const std::vector<eval::CorpusBug>& corpus, const PipelineConfig& config) {
  config.validate();
  EvalResult result;
  result.bugs.resize(corpus.size());
  PipelineConfig inner = config;
  inner.jobs = 1;
  parallel_for(corpus.size(), config.jobs, [&](std::size_t k) {
    const eval::CorpusBug& bug = corpus[k];
    BugOutcome& out = result.bugs[k];
    out.bug_id = bug.id;
    try {
      const auto program = lang::parse(bug.buggy_source);
      const auto suite = lang::parse_suite(bug.tests_source);
      const auto r = localize(program, suite, inner);
      out.ranking = r.ranking;
      std::size_t sliced = 0;
      std::size_t covered = 0;
      for (const auto& a : r.analyses) {
        out.tree_build_ms += a.tree_build_ms;
        if (a.slice && a.skipped.empty()) {
          sliced += a.sliced_occurrences;
          covered += a.covered_occurrences;
        }
      }
      if (covered > 0) out.reduction = 1.0 - static_cast<double>(sliced) / static_cast<double>(covered);
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  eval::Rankings rankings;
  eval::Truths truths;
  std::map<std::string, std::string> errors;
  double reduction_sum = 0.0;
  int reductions = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& out = result.bugs[k];
    truths[out.bug_id] = corpus[k].truth;
    if (out.error.empty()) {
      rankings[out.bug_id] = out.ranking;
    } else {
      errors[out.bug_id] = out.error;
    }
    if (out.reduction) {
      reduction_sum += *out.reduction;
      ++reductions;
    }
    result.mean_tree_build_ms += out.tree_build_ms;
  }
  if (!corpus.empty()) result.mean_tree_build_ms /= static_cast<double>(corpus.size());
  result.metrics = eval::compute_metrics(rankings, truths, errors);
  if (reductions > 0) result.metrics.mean_reduction = reduction_sum / reductions;
  return result;
}

std::vector<std::pair<std::string, PipelineConfig>> ablations(const PipelineConfig& base) {
  std::vector<std::pair<std::string, PipelineConfig>> out;
  out.emplace_back("full", base);
  PipelineConfig c = base;
  c.slicing = false;
  out.emplace_back("no-slice", c);
  c = base;
  c.tree_model = false;
  out.emplace_back("no-tree", c);
  c = base;
  c.dep_penalty = false;
  out.emplace_back("no-dep", c);
  c = base;
  c.method_score = false;
  out.emplace_back("no-method-score", c);
  return out;
}

}  // namespace vardt::pipeline
