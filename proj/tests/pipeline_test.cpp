#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "support.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"
#include "vardt/pipeline.hpp"

namespace vardt {
namespace {

using pipeline::PipelineConfig;

pipeline::LocalizeResult localize_bug(const std::string& id, const PipelineConfig& config = {}) {
  const auto bug = testing::corpus_bug(id);
  return pipeline::localize(lang::parse(bug.buggy_source), lang::parse_suite(bug.tests_source), config);
}

std::string ranking_text(const std::vector<rank::RankedVariable>& r) {
  std::ostringstream os;
  rank::write_ranking(os, r);
  return os.str();
}

TEST(Pipeline, Lang27PutsExpPosFirst) {
  const auto start = std::chrono::steady_clock::now();
  const auto r = localize_bug("lang27");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_FALSE(r.ranking.empty());
  EXPECT_EQ(r.ranking[0].name, "expPos");
  EXPECT_EQ(r.ranking[0].method, "createNumber");
  EXPECT_EQ(r.ranking[0].rank, 1.0);
  EXPECT_LT(seconds, 5.0);
  ASSERT_FALSE(r.methods.empty());
  EXPECT_EQ(r.methods[0].method, "createNumber");
}

TEST(Pipeline, RepeatedRunsAreIdentical) {
  for (const char* id : {"lang27", "binary_search", "luhn"}) {
    const auto a = localize_bug(id);
    PipelineConfig parallel;
    parallel.jobs = 4;
    const auto b = localize_bug(id, parallel);
    EXPECT_EQ(ranking_text(a.ranking), ranking_text(b.ranking)) << id;
    std::ostringstream ja, jb;
    rank::write_ranking_json(ja, a.ranking);
    rank::write_ranking_json(jb, b.ranking);
    EXPECT_EQ(ja.str(), jb.str()) << id;
  }
}

TEST(Pipeline, WithoutTreesScoresAreDependencyTimesMethodSquared) {
  PipelineConfig config;
  config.tree_model = false;
  const auto r = localize_bug("lang27", config);
  for (const auto& v : r.ranking) {
    EXPECT_DOUBLE_EQ(v.ds, v.dep_score);
    EXPECT_DOUBLE_EQ(v.fs, v.dep_score * v.method_score * v.method_score);
  }
}

TEST(Pipeline, FactorOneMatchesDisabledPenalty) {
  PipelineConfig one;
  one.dep_factor = 1.0;
  PipelineConfig off;
  off.dep_penalty = false;
  for (const char* id : {"lang27", "shipping", "word_count"}) {
    EXPECT_EQ(ranking_text(localize_bug(id, one).ranking), ranking_text(localize_bug(id, off).ranking)) << id;
  }
  for (const auto& v : localize_bug("lang27", off).ranking) EXPECT_EQ(v.dep_score, 1.0);
}

TEST(Pipeline, SlicingOnlyRemovesVariables) {
  PipelineConfig full_cfg;
  PipelineConfig no_slice;
  no_slice.slicing = false;
  for (const char* id : {"lang27", "binary_search", "clamp"}) {
    const auto sliced = localize_bug(id, full_cfg);
    const auto full = localize_bug(id, no_slice);
    EXPECT_LE(sliced.ranking.size(), full.ranking.size()) << id;
    for (const auto& a : sliced.analyses) {
      ASSERT_TRUE(a.slice) << id;
      EXPECT_GE(a.reduction, 0.0);
      EXPECT_LE(a.reduction, 1.0);
    }
  }
}

TEST(Pipeline, GateFailureWhenNoMethodQualifies) {
  const auto program = lang::parse("method f(x) {\n  return x + 1;\n}\n");
  const auto suite = lang::parse_suite(
      "test a { assert f(1) == 2; }\n"
      "test b { assert f(2) == 4; }\n");
  EXPECT_THROW(pipeline::localize(program, suite, {}), pipeline::GateFailure);
}

TEST(Pipeline, RecordedTracesGiveTheSameRanking) {
  for (const char* id : {"lang27", "last_word", "sum_to"}) {
    const auto bug = testing::corpus_bug(id);
    const auto program = lang::parse(bug.buggy_source);
    const auto suite = lang::parse_suite(bug.tests_source);
    const auto traces = profile::run_suite(lang::transform_gsa(program), suite);
    const auto direct = pipeline::localize(program, suite, {});
    const auto replayed = pipeline::localize_traces(program, traces, {});
    EXPECT_EQ(ranking_text(direct.ranking), ranking_text(replayed.ranking)) << id;
  }
}

TEST(Pipeline, KnownMethodSkipsMethodRanking) {
  PipelineConfig config;
  config.method_known = "lcm";
  const auto r = localize_bug("lcm", config);
  ASSERT_EQ(r.methods.size(), 1u);
  EXPECT_EQ(r.methods[0].score, 1.0);
  for (const auto& v : r.ranking) EXPECT_EQ(v.method, "lcm");
  config.method_known = "nope";
  EXPECT_THROW(localize_bug("lcm", config), std::invalid_argument);
}

TEST(Pipeline, ConfigValidation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dep_factor = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.dep_factor = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.top_k = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.jobs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  EXPECT_EQ(pipeline::ablations(PipelineConfig{}).size(), 5u);
}

TEST(Pipeline, CorpusEvaluationCoversEveryBug) {
  PipelineConfig config;
  config.jobs = 4;
  const auto corpus = eval::seed_corpus();
  const auto result = pipeline::evaluate_corpus(corpus, config);
  ASSERT_EQ(result.bugs.size(), corpus.size());
  for (const auto& b : result.bugs) EXPECT_TRUE(b.error.empty()) << b.bug_id << ": " << b.error;
  EXPECT_EQ(result.metrics.bugs.size(), corpus.size());
}

}  // namespace
}  // namespace vardt
