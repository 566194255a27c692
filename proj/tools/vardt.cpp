#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vardt/evalkit.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"
#include "vardt/patch_filter.hpp"
#include "vardt/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vardt;

namespace {

constexpr int kExitParse = 1;
constexpr int kExitGate = 2;
constexpr int kExitOther = 3;

struct Options {
  pipeline::PipelineConfig config;
  std::string sbfl = "ochiai";
  bool no_slice = false;
  bool no_tree = false;
  bool no_dep = false;
  bool no_method_score = false;
  std::string method_known;
  std::string out;
  std::string traces;
  int top_n = 10;
};

// Writes next to the destination first so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

template <typename Fn>
std::string capture(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

pipeline::PipelineConfig resolve(const Options& o) {
  pipeline::PipelineConfig c = o.config;
  c.formula = sbfl::formula_from_string(o.sbfl);
  c.slicing = !o.no_slice;
  c.tree_model = !o.no_tree;
  c.dep_penalty = !o.no_dep;
  c.method_score = !o.no_method_score;
  if (!o.method_known.empty()) c.method_known = o.method_known;
  c.validate();
  return c;
}

void add_config_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--dep-factor", o.config.dep_factor, "dependency penalty factor in (0,1]")
      ->envname("VARDT_DEP_FACTOR")
      ->capture_default_str();
  cmd->add_option("--top-k", o.config.top_k, "suspicious methods kept from the SBFL stage")
      ->envname("VARDT_TOP_K")
      ->capture_default_str();
  cmd->add_option("--sbfl", o.sbfl, "method-level formula: ochiai or dstar")
      ->envname("VARDT_SBFL")
      ->check(CLI::IsMember({"ochiai", "dstar"}))
      ->capture_default_str();
  cmd->add_flag("--no-slice", o.no_slice, "profile every line instead of the slice")->envname("VARDT_NO_SLICE");
  cmd->add_flag("--no-tree", o.no_tree, "rank by dependency penalty and method score only")->envname("VARDT_NO_TREE");
  cmd->add_flag("--no-dep", o.no_dep, "disable the dependency penalty")->envname("VARDT_NO_DEP");
  cmd->add_flag("--no-method-score", o.no_method_score, "rank by DS alone")->envname("VARDT_NO_METHOD_SCORE");
  cmd->add_option("--method-known", o.method_known, "analyze only this method, with score 1")
      ->envname("VARDT_METHOD_KNOWN");
  cmd->add_option("--jobs", o.config.jobs, "parallel work items")->envname("VARDT_JOBS")->capture_default_str();
  cmd->add_option("--step-budget", o.config.step_budget, "interpreter steps per test")
      ->envname("VARDT_STEP_BUDGET")
      ->capture_default_str();
  cmd->add_option("--out", o.out, "directory for reports and stage artifacts")->envname("VARDT_OUT");
}

struct Inputs {
  lang::Program program;
  std::vector<lang::TestCase> suite;
};

Inputs load_inputs(const std::string& program_path, const std::string& tests_path) {
  Inputs in;
  const std::string src = eval::read_file(program_path);
  try {
    in.program = lang::parse(src);
  } catch (const lang::ParseError& e) {
    throw lang::ParseError(program_path + ": " + e.message(), e.line(), e.column());
  }
  if (!tests_path.empty()) {
    try {
      in.suite = lang::parse_suite(eval::read_file(tests_path));
    } catch (const lang::ParseError& e) {
      throw lang::ParseError(tests_path + ": " + e.message(), e.line(), e.column());
    }
  }
  return in;
}

pipeline::LocalizeResult run_localize(const Inputs& in, const Options& o) {
  const auto config = resolve(o);
  if (!o.traces.empty()) {
    std::ifstream is(o.traces);
    if (!is) throw std::runtime_error("cannot read " + o.traces);
    return pipeline::localize_traces(in.program, profile::read_traces(is), config);
  }
  return pipeline::localize(in.program, in.suite, config);
}

void write_stage_artifacts(const fs::path& dir, const pipeline::LocalizeResult& r) {
  write_atomic(dir / "methods.txt", capture([&](std::ostream& os) { sbfl::write_method_ranking(os, r.methods); }));
  write_atomic(dir / "ranking.txt", capture([&](std::ostream& os) { rank::write_ranking(os, r.ranking); }));
  write_atomic(dir / "ranking.json", capture([&](std::ostream& os) { rank::write_ranking_json(os, r.ranking); }));
  write_atomic(dir / "traces.jsonl", capture([&](std::ostream& os) { profile::write_traces(os, r.profile); }));
  write_atomic(dir / "deps.txt", capture([&](std::ostream& os) {
                 for (const auto& a : r.analyses) a.graph.write(os);
               }));
  write_atomic(dir / "slices.txt", capture([&](std::ostream& os) {
                 for (const auto& a : r.analyses) {
                   if (a.slice) slicing::write_slice(os, *a.slice);
                 }
               }));
  write_atomic(dir / "trees.txt", capture([&](std::ostream& os) {
                 for (const auto& a : r.analyses) {
                   for (std::size_t k = 0; k < a.trees.size(); ++k) {
                     os << "TREE " << a.method << ' ' << k + 1 << '\n';
                     model::render(os, a.table, a.trees[k]);
                   }
                 }
               }));
  write_atomic(dir / "diagnostics.txt", capture([&](std::ostream& os) {
                 for (const auto& d : r.diagnostics) os << d << '\n';
               }));
  std::ostringstream timing;
  for (const auto& a : r.analyses) timing << a.method << ' ' << a.tree_build_ms << " ms\n";
  write_atomic(dir / "timing.txt", timing.str());
}

void report_diagnostics(const pipeline::LocalizeResult& r) {
  for (const auto& d : r.diagnostics) std::cerr << "vardt: " << d << '\n';
}

int cmd_localize(const std::string& program, const std::string& tests, const Options& o) {
  const auto in = load_inputs(program, o.traces.empty() ? tests : "");
  const auto r = run_localize(in, o);
  report_diagnostics(r);
  rank::write_ranking(std::cout, r.ranking);
  if (!o.out.empty()) write_stage_artifacts(o.out, r);
  return 0;
}

int cmd_trace(const std::string& program, const std::string& tests, const Options& o) {
  const auto in = load_inputs(program, tests);
  const auto p = lang::transform_gsa(in.program);
  profile::RunOptions opts;
  opts.step_budget = o.config.step_budget;
  const auto traces = profile::run_suite(p, in.suite, opts, o.config.jobs);
  const std::string text = capture([&](std::ostream& os) { profile::write_traces(os, traces); });
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_atomic(fs::path(o.out) / "traces.jsonl", text);
  }
  return 0;
}

int cmd_slice(const std::string& program, const std::string& tests, const Options& o) {
  const auto in = load_inputs(program, o.traces.empty() ? tests : "");
  Options opts = o;
  opts.no_slice = false;
  const auto r = run_localize(in, opts);
  report_diagnostics(r);
  for (const auto& a : r.analyses) {
    if (!a.slice) continue;
    slicing::write_slice(std::cout, *a.slice);
    std::printf("REDUCTION %s %.6f\n", a.method.c_str(), a.reduction);
  }
  if (!o.out.empty()) write_stage_artifacts(o.out, r);
  return 0;
}

int cmd_tree(const std::string& program, const std::string& tests, const Options& o) {
  const auto in = load_inputs(program, o.traces.empty() ? tests : "");
  const auto r = run_localize(in, o);
  report_diagnostics(r);
  for (const auto& a : r.analyses) {
    for (std::size_t k = 0; k < a.trees.size(); ++k) {
      std::cout << "TREE " << a.method << ' ' << k + 1 << '\n';
      model::render(std::cout, a.table, a.trees[k]);
    }
  }
  if (!o.out.empty()) write_stage_artifacts(o.out, r);
  return 0;
}

int cmd_filter(const std::string& program, const std::string& tests, const std::string& patches, const Options& o) {
  const auto in = load_inputs(program, o.traces.empty() ? tests : "");
  const auto r = run_localize(in, o);
  report_diagnostics(r);
  const auto diffs = patch::parse_patches(eval::read_file(patches));
  const auto top = patch::top_variables(r.ranking, o.top_n);
  patch::FilterResult result;
  if (!diffs.empty()) {
    if (top.empty()) throw std::runtime_error("no localized variable to filter with");
    result = patch::filter(diffs, top, r.program);
  }
  patch::write_filter_report(std::cout, result);
  if (!o.out.empty()) {
    write_atomic(fs::path(o.out) / "filter.txt",
                 capture([&](std::ostream& os) { patch::write_filter_report(os, result); }));
    write_atomic(fs::path(o.out) / "filter.json",
                 capture([&](std::ostream& os) { patch::write_filter_json(os, result); }));
  }
  return 0;
}

std::string metrics_text(const eval::MetricsReport& m) {
  return capture([&](std::ostream& os) { eval::write_metrics(os, m); });
}

int cmd_eval(const std::string& corpus_dir, bool with_ablations, bool sweep, const Options& o) {
  const auto corpus = eval::load_corpus(corpus_dir.empty() ? eval::default_corpus_dir() : fs::path(corpus_dir));
  const auto config = resolve(o);
  const auto full = pipeline::evaluate_corpus(corpus, config);
  std::string report = metrics_text(full.metrics);
  std::cerr << "vardt: mean tree build time " << full.mean_tree_build_ms << " ms per bug\n";
  std::string json = capture([&](std::ostream& os) { eval::write_metrics_json(os, full.metrics); });

  std::ostringstream extra;
  if (with_ablations) {
    extra << "ABLATIONS\n";
    for (const auto& [name, c] : pipeline::ablations(config)) {
      const auto r = name == "full" ? full : pipeline::evaluate_corpus(corpus, c);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%-16s top-1 %.3f top-3 %.3f top-5 %.3f top-10 %.3f\n", name.c_str(),
                    r.metrics.top.at(1), r.metrics.top.at(3), r.metrics.top.at(5), r.metrics.top.at(10));
      extra << buf;
    }
  }
  if (sweep) {
    extra << "DEP-FACTOR SWEEP\n";
    for (int k = 1; k <= 10; ++k) {
      pipeline::PipelineConfig c = config;
      c.dep_factor = k / 10.0;
      c.dep_penalty = true;
      const auto r = pipeline::evaluate_corpus(corpus, c);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.1f top-1 %.3f top-3 %.3f top-5 %.3f top-10 %.3f\n", c.dep_factor,
                    r.metrics.top.at(1), r.metrics.top.at(3), r.metrics.top.at(5), r.metrics.top.at(10));
      extra << buf;
    }
  }
  report += extra.str();
  std::cout << report;
  if (!o.out.empty()) {
    write_atomic(fs::path(o.out) / "metrics.txt", report);
    write_atomic(fs::path(o.out) / "metrics.json", json);
    std::ostringstream timing;
    timing << "mean_tree_build_ms " << full.mean_tree_build_ms << '\n';
    write_atomic(fs::path(o.out) / "timing.txt", timing.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-level fault localization with dependency-aware decision trees"};
  app.require_subcommand(1);
  Options o;
  std::string program, tests, patches, corpus;
  bool with_ablations = false;
  bool sweep = false;

  auto* localize = app.add_subcommand("localize", "rank fault-relevant variables");
  auto* trace = app.add_subcommand("trace", "run the suite and dump every observation");
  auto* slice = app.add_subcommand("slice", "dump the backward slices");
  auto* tree = app.add_subcommand("tree", "dump the decision trees");
  auto* filter = app.add_subcommand("filter", "filter candidate patches with the top-N variables");
  auto* evalc = app.add_subcommand("eval", "evaluate the corpus");

  for (auto* cmd : {localize, slice, tree, filter}) {
    cmd->add_option("program", program, "MiniLang program")->required()->check(CLI::ExistingFile);
    cmd->add_option("tests", tests, "test suite")->check(CLI::ExistingFile);
    cmd->add_option("--traces", o.traces, "reuse traces written by the trace command")->check(CLI::ExistingFile);
    add_config_flags(cmd, o);
  }
  trace->add_option("program", program, "MiniLang program")->required()->check(CLI::ExistingFile);
  trace->add_option("tests", tests, "test suite")->required()->check(CLI::ExistingFile);
  trace->add_option("--jobs", o.config.jobs, "parallel tests")->envname("VARDT_JOBS");
  trace->add_option("--step-budget", o.config.step_budget, "interpreter steps per test")->envname("VARDT_STEP_BUDGET");
  trace->add_option("--out", o.out, "output directory")->envname("VARDT_OUT");
  filter->add_option("--patches", patches, "patch file")->required()->check(CLI::ExistingFile);
  filter->add_option("--top-n", o.top_n, "variables used for filtering")->envname("VARDT_TOP_N")->capture_default_str();
  evalc->add_option("corpus", corpus, "corpus directory (default: the shipped corpus)");
  evalc->add_flag("--ablations", with_ablations, "also evaluate the four ablations");
  evalc->add_flag("--sweep", sweep, "also sweep the dependency factor from 0.1 to 1.0");
  add_config_flags(evalc, o);

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto* cmd : {localize, slice, tree, filter}) {
      if (cmd->parsed() && tests.empty() && o.traces.empty()) throw CLI::RequiredError("tests");
    }
    if (localize->parsed()) return cmd_localize(program, tests, o);
    if (trace->parsed()) return cmd_trace(program, tests, o);
    if (slice->parsed()) return cmd_slice(program, tests, o);
    if (tree->parsed()) return cmd_tree(program, tests, o);
    if (filter->parsed()) return cmd_filter(program, tests, patches, o);
    if (evalc->parsed()) return cmd_eval(corpus, with_ablations, sweep, o);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const lang::ParseError& e) {
    std::cerr << "vardt: parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const pipeline::GateFailure& e) {
    std::cerr << "vardt: " << e.what() << '\n';
    return kExitGate;
  } catch (const std::exception& e) {
    std::cerr << "vardt: " << e.what() << '\n';
    return kExitOther;
  }
  return 0;
}
