#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "vardt/dependence.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"
#include "vardt/slicer.hpp"

namespace vardt {
namespace {

using analysis::DependencyGraph;
using profile::Label;

struct Prepared {
  lang::Program program;
  std::vector<profile::TestRunTrace> traces;
};

Prepared prepare(const std::string& bug_id) {
  const auto bug = testing::corpus_bug(bug_id);
  Prepared p{lang::transform_gsa(lang::parse(bug.buggy_source)), {}};
  profile::RunOptions opts;
  opts.record = false;
  p.traces = profile::run_suite(p.program, lang::parse_suite(bug.tests_source), opts);
  return p;
}

TEST(Slicer, Lang27SliceDropsTheDeadBranch) {
  const auto p = prepare("lang27");
  const DependencyGraph g = analysis::build_dependence_graph(*p.program.find("createNumber"));
  const auto s = slicing::slice_method(g, p.traces);
  EXPECT_EQ(s.lines, (std::set<int>{473, 474, 476, 488, 489}));
  ASSERT_EQ(s.criteria.size(), 1u);
  EXPECT_EQ(s.criteria[0].test_id, "t4");
  EXPECT_EQ(s.criteria[0].line, 489);
}

TEST(Slicer, ConstantReturnFallsBackToItsGuards) {
  const auto p = prepare("binary_search");
  const DependencyGraph g = analysis::build_dependence_graph(*p.program.find("search"));
  for (const auto& t : p.traces) {
    if (t.label != Label::kFail) continue;
    const auto c = slicing::slicing_criterion(t, g);
    EXPECT_EQ(c.line, 28);
    ASSERT_FALSE(c.vars.empty());
    const auto s = slicing::backward_slice(g, t, c);
    EXPECT_TRUE(s.lines.count(16));
    EXPECT_FALSE(s.lines.count(18));  // the probe counter
  }
}

TEST(Slicer, KeepsOnlyExecutedLines) {
  for (const auto& bug : eval::seed_corpus()) {
    const auto p = prepare(bug.id);
    for (const auto& m : p.program.methods) {
      const DependencyGraph g = analysis::build_dependence_graph(m);
      for (const auto& t : p.traces) {
        if (t.label != Label::kFail || !t.covers(m.name)) continue;
        const auto s = slicing::backward_slice(g, t, slicing::slicing_criterion(t, g));
        const auto& run = t.per_method.at(m.name);
        const std::set<int> executed(run.begin(), run.end());
        for (int l : s.lines) EXPECT_TRUE(executed.count(l)) << bug.id << ":" << l;
      }
    }
  }
}

TEST(Slicer, MergeIsAUnion) {
  slicing::Slice a;
  a.method = "m";
  a.lines = {1, 2};
  slicing::Slice b;
  b.method = "m";
  b.lines = {2, 5};
  const auto u = slicing::multi_fail_merge({a, b});
  EXPECT_EQ(u.lines, (std::set<int>{1, 2, 5}));
  EXPECT_TRUE(slicing::multi_fail_merge({}).empty());
}

TEST(Slicer, UnreachedMethodIsReported) {
  const auto p = prepare("lcm");
  const DependencyGraph g = analysis::build_dependence_graph(*p.program.find("lcm"));
  for (const auto& t : p.traces) {
    if (t.test_id == "gcd_only") EXPECT_THROW(slicing::slicing_criterion(t, g), slicing::MethodUnreached);
  }
}

TEST(Slicer, ReductionRatio) {
  const auto p = prepare("binary_search");
  const DependencyGraph g = analysis::build_dependence_graph(*p.program.find("search"));
  const auto s = slicing::slice_method(g, p.traces);
  std::set<int> lines;
  for (const auto& t : p.traces) {
    if (t.covers("search")) lines.insert(t.per_method.at("search").begin(), t.per_method.at("search").end());
  }
  std::size_t covered = 0;
  for (const auto& n : g.nodes()) covered += lines.count(n.line);
  EXPECT_EQ(slicing::covered_occurrences(g, p.traces), covered);
  ASSERT_GT(covered, 0u);
  const double expected = 1.0 - static_cast<double>(s.occurrences.size()) / static_cast<double>(covered);
  EXPECT_DOUBLE_EQ(slicing::reduction_ratio(s, g, p.traces), expected);
  EXPECT_GT(expected, 0.0);
  EXPECT_LT(expected, 1.0);
}

TEST(Slicer, WriteFormat) {
  slicing::Slice s;
  s.method = "m";
  s.lines = {3};
  VarOccurrence o;
  o.method = "m";
  o.variable = "x";
  o.line = 3;
  s.occurrences.insert(o);
  std::ostringstream os;
  slicing::write_slice(os, s);
  EXPECT_EQ(os.str(), "m:3\nOCC x@3\n");
}

}  // namespace
}  // namespace vardt
