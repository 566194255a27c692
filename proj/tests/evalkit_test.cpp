#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vardt/evalkit.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"

namespace vardt {
namespace {

using eval::GroundTruth;
using eval::TruthEntry;
using rank::RankedVariable;

RankedVariable ranked(const std::string& name, std::set<int> lines, double rank) {
  RankedVariable v;
  v.method = "m";
  v.name = name;
  v.lines = std::move(lines);
  v.rank = rank;
  return v;
}

GroundTruth truth(const std::string& bug, std::vector<TruthEntry> entries) { return GroundTruth{bug, std::move(entries)}; }

TEST(Truth, ParsesAndRoundTrips) {
  const auto g = eval::parse_truth(
      "# comment\n"
      "METHOD createNumber\n"
      "VAR expPos LINES 474,479 RULE 1\n"
      "VAR length(str) LINES 489 RULE 2  # trailing comment\n",
      "b");
  ASSERT_EQ(g.entries.size(), 2u);
  EXPECT_EQ(g.entries[1].name, "length(str)");
  EXPECT_EQ(g.entries[1].method, "createNumber");
  EXPECT_EQ(g.entries[0].lines, (std::set<int>{474, 479}));
  std::ostringstream os;
  eval::write_truth(os, g);
  const auto again = eval::parse_truth(os.str(), "b");
  ASSERT_EQ(again.entries.size(), 2u);
  EXPECT_EQ(again.entries[0].lines, g.entries[0].lines);
  EXPECT_EQ(again.entries[1].rule, 2);
}

TEST(Truth, RejectsMalformedEntries) {
  EXPECT_THROW(eval::parse_truth("", "b"), eval::TruthError);
  EXPECT_THROW(eval::parse_truth("VAR x LINES 1 RULE 5\n", "b"), eval::TruthError);
  EXPECT_THROW(eval::parse_truth("VAR x LINES a RULE 1\n", "b"), eval::TruthError);
  EXPECT_THROW(eval::parse_truth("VAR x LINES 1\n", "b"), eval::TruthError);
  EXPECT_THROW(eval::parse_truth("VAR x LINES 1 RULE 1 extra\n", "b"), eval::TruthError);
}

TEST(Metrics, MatchingNeedsNameAndSharedLine) {
  const TruthEntry e{"x", {3, 4}, 1, ""};
  EXPECT_TRUE(eval::matches(ranked("x", {4, 9}, 1), e));
  EXPECT_FALSE(eval::matches(ranked("x", {5}, 1), e));
  EXPECT_FALSE(eval::matches(ranked("y", {3}, 1), e));
  const TruthEntry scoped{"x", {3}, 1, "other"};
  EXPECT_FALSE(eval::matches(ranked("x", {3}, 1), scoped));
}

TEST(Metrics, Examples) {
  const eval::Truths one{{"b", truth("b", {{"x", {1}, 1, ""}})}};
  // truth at rank 4: miss at 3, hit at 5
  const eval::Rankings r4{{"b", {ranked("a", {9}, 1), ranked("x", {1}, 4)}}};
  EXPECT_EQ(eval::topn_recall(r4, one, 3), 0.0);
  EXPECT_EQ(eval::topn_recall(r4, one, 5), 1.0);
  // a tie at 1.5 misses Top-1
  const eval::Rankings tie{{"b", {ranked("x", {1}, 1.5), ranked("a", {9}, 1.5), ranked("c", {8}, 3)}}};
  EXPECT_EQ(eval::topn_recall(tie, one, 1), 0.0);
  // ranks {1,3}: MFR 1, MAR 2
  const eval::Truths two{{"b", truth("b", {{"x", {1}, 1, ""}, {"y", {2}, 1, ""}})}};
  const eval::Rankings r13{{"b", {ranked("x", {1}, 1), ranked("a", {9}, 2), ranked("y", {2}, 3)}}};
  EXPECT_EQ(*eval::mfr(r13, two), 1.0);
  EXPECT_EQ(*eval::mar(r13, two), 2.0);
  // excluded bug with another bug at first rank 2: MFR 2
  eval::Truths both = one;
  both["c"] = truth("c", {{"z", {5}, 1, ""}});
  const eval::Rankings ex{{"b", {ranked("a", {9}, 1), ranked("x", {1}, 2)}}, {"c", {ranked("q", {5}, 1)}}};
  EXPECT_EQ(*eval::mfr(ex, both), 2.0);
  const auto report = eval::compute_metrics(ex, both);
  EXPECT_EQ(report.excluded, std::vector<std::string>{"c"});
  // nothing included: undefined
  EXPECT_FALSE(eval::mfr({{"c", {ranked("q", {5}, 1)}}}, {{"c", both["c"]}}));
  // a missing ranking is a miss
  EXPECT_EQ(eval::topn_recall({}, one, 10), 0.0);
}

TEST(Metrics, OneBugAtRankOne) {
  const eval::Truths t{{"b", truth("b", {{"x", {1}, 1, ""}})}};
  const eval::Rankings r{{"b", {ranked("x", {1}, 1)}}};
  const auto m = eval::compute_metrics(r, t);
  EXPECT_EQ(m.top.at(1), 1.0);
  EXPECT_EQ(*m.mfr, 1.0);
  EXPECT_EQ(*m.mar, 1.0);
}

TEST(Metrics, MatchBruteForceOnRandomCases) {
  std::mt19937 rng(987);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto [rankings, truths] = testing::random_metrics_case(rng);
    const auto want = testing::oracle_metrics(rankings, truths);
    const auto got = eval::compute_metrics(rankings, truths);
    EXPECT_EQ(got.top.at(1), want.top[0]);
    EXPECT_EQ(got.top.at(3), want.top[1]);
    EXPECT_EQ(got.top.at(5), want.top[2]);
    EXPECT_EQ(got.top.at(10), want.top[3]);
    EXPECT_EQ(got.mfr, want.mfr);
    EXPECT_EQ(got.mar, want.mar);
    EXPECT_LE(got.top.at(1), got.top.at(3));
    EXPECT_LE(got.top.at(3), got.top.at(5));
    EXPECT_LE(got.top.at(5), got.top.at(10));
    for (const auto& b : got.bugs) {
      if (b.first) EXPECT_LE(*b.first, *b.average);
    }
  }
}

TEST(Metrics, AppendingNonTruthVariablesChangesNothing) {
  std::mt19937 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    auto r = testing::random_ranking(rng, 6);
    const eval::Truths t{{"b", truth("b", {{"x1", {2}, 1, ""}, {"x4", {5}, 1, ""}})}};
    const auto before = eval::compute_metrics({{"b", r}}, t);
    const double below = r.back().rank + 1;
    r.push_back(ranked("extra", {99}, below));
    const auto after = eval::compute_metrics({{"b", r}}, t);
    EXPECT_EQ(before.mfr, after.mfr);
    EXPECT_EQ(before.mar, after.mar);
  }
}

TEST(Metrics, ReportFormats) {
  const eval::Truths t{{"b", truth("b", {{"x", {1}, 1, ""}})}};
  const eval::Rankings r{{"b", {ranked("x", {1}, 2)}}};
  auto m = eval::compute_metrics(r, t);
  std::ostringstream os;
  eval::write_metrics(os, m);
  EXPECT_NE(os.str().find("top-1 0.000\n"), std::string::npos);
  EXPECT_NE(os.str().find("mfr 2.000\n"), std::string::npos);
  EXPECT_NE(os.str().find("bug b first=2 average=2\n"), std::string::npos);
  std::ostringstream js;
  eval::write_metrics_json(js, m);
  EXPECT_NE(js.str().find("\"mfr\": 2.0"), std::string::npos);
}

// The shipped corpus must keep its invariants.
TEST(Corpus, Invariants) {
  const auto corpus = eval::seed_corpus();
  ASSERT_GE(corpus.size(), 20u);
  std::map<int, int> per_rule;
  int multi_var = 0;
  int multi_method = 0;
  bool lang27 = false;
  for (const auto& bug : corpus) {
    const auto suite = lang::parse_suite(bug.tests_source);
    EXPECT_GE(suite.size(), 3u) << bug.id;
    const auto buggy = profile::run_suite(lang::transform_gsa(lang::parse(bug.buggy_source)), suite);
    const auto fixed = profile::run_suite(lang::transform_gsa(lang::parse(bug.fixed_source)), suite);
    int failing = 0;
    for (const auto& t : buggy) failing += t.label == profile::Label::kFail;
    EXPECT_GE(failing, 1) << bug.id;
    for (const auto& t : fixed) EXPECT_EQ(t.label, profile::Label::kPass) << bug.id << " " << t.test_id;
    std::set<int> rules;
    for (const auto& e : bug.truth.entries) rules.insert(e.rule);
    for (int r : rules) ++per_rule[r];
    multi_var += bug.truth.entries.size() > 1;
    multi_method += lang::parse(bug.buggy_source).methods.size() > 1;
    if (bug.id == "lang27") {
      lang27 = true;
      std::set<std::string> names;
      for (const auto& e : bug.truth.entries) names.insert(e.name);
      EXPECT_TRUE(names.count("expPos"));
      EXPECT_TRUE(names.count("length(str)"));
    }
  }
  EXPECT_TRUE(lang27);
  for (int r = 1; r <= 4; ++r) EXPECT_GE(per_rule[r], 3) << "rule " << r;
  EXPECT_GE(multi_var, 5);
  EXPECT_GE(multi_method, 3);
}

}  // namespace
}  // namespace vardt
