#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "vardt/ast.hpp"
#include "vardt/gsa.hpp"
#include "vardt/parser.hpp"
#include "vardt/profiler.hpp"

namespace vardt {
namespace {

using lang::parse;
using lang::parse_suite;
using profile::Arg;
using profile::call_method;

Arg int_arg(std::int64_t v) {
  Arg a;
  a.kind = Arg::Kind::kInt;
  a.i = v;
  return a;
}

Arg str_arg(std::string s) {
  Arg a;
  a.kind = Arg::Kind::kStr;
  a.s = std::move(s);
  return a;
}

TEST(Parser, ReportsLineAndColumn) {
  try {
    parse("method f(x) {\n  y = ;\n}\n");
    FAIL() << "expected a parse error";
  } catch (const lang::ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GT(e.column(), 0);
  }
}

TEST(Parser, RejectsDuplicates) {
  EXPECT_THROW(parse("method f() { return 1; }\nmethod f() { return 2; }"), lang::ParseError);
  EXPECT_THROW(parse("method f(a, a) { return a; }"), lang::ParseError);
  EXPECT_THROW(parse_suite("test a { assert true; }\ntest a { assert true; }"), lang::ParseError);
}

TEST(Parser, ExpressionStatementsMustBeCalls) {
  EXPECT_THROW(parse("method f(x) { x + 1; }"), lang::ParseError);
  EXPECT_NO_THROW(parse("method g() { return 0; }\nmethod f(x) { g(); return x; }"));
}

TEST(Parser, PrintedProgramReparses) {
  const auto bug = testing::corpus_bug("lang27");
  const lang::Program p = parse(bug.buggy_source);
  const lang::Program again = parse(lang::to_string(p));
  EXPECT_EQ(lang::to_string(p), lang::to_string(again));
}

TEST(Gsa, NamesTemporariesPerMethodInPreOrder) {
  const lang::Program p = lang::transform_gsa(parse(
      "method f(a, b) {\n"
      "  if (a > 0 && b > 0) {\n"
      "    return a + b;\n"
      "  }\n"
      "  return a;\n"
      "}\n"));
  ASSERT_TRUE(p.transformed);
  // condition root, its two operands, then the compound return value
  ASSERT_EQ(p.temps.size(), 4u);
  EXPECT_EQ(p.temps.at("__tf_1").line, 2);
  EXPECT_EQ(p.temps.at("__tf_1").kind, lang::TempKind::kCondition);
  EXPECT_EQ(p.temps.at("__tf_4").line, 3);
  EXPECT_EQ(p.temps.at("__tf_4").kind, lang::TempKind::kReturnOrArg);
  // the atomic `return a;` gets no temporary
  for (const auto& [name, info] : p.temps) EXPECT_NE(info.line, 5) << name;
}

TEST(Gsa, Lang27LengthTemporary) {
  const auto bug = testing::corpus_bug("lang27");
  const lang::Program p = lang::transform_gsa(parse(bug.buggy_source));
  bool found = false;
  for (const auto& [name, info] : p.temps) {
    if (info.line == 488 && info.kind == lang::TempKind::kCondition) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(Gsa, ShortCircuitIsPreserved) {
  // charAt would fail on the empty string if the right operand ran.
  const lang::Program src = parse(
      "method f(s) {\n"
      "  if (length(s) > 0 && charAt(s, 0) == 65) {\n"
      "    return 1;\n"
      "  }\n"
      "  return 0;\n"
      "}\n");
  const lang::Program gsa = lang::transform_gsa(src);
  EXPECT_EQ(call_method(src, "f", {str_arg("")}), call_method(gsa, "f", {str_arg("")}));
  EXPECT_TRUE(call_method(gsa, "f", {str_arg("")}).ok);
  EXPECT_EQ(call_method(gsa, "f", {str_arg("A")}).value, "1");
}

TEST(Gsa, DifferentialOnRandomInputs) {
  const lang::Program src = parse(
      "method g(x) { return x * 2 - 1; }\n"
      "method f(a, b) {\n"
      "  s = 0;\n"
      "  while (a > 0 && s < 100) {\n"
      "    if (a % 3 == 0 || b > a) {\n"
      "      s = s + g(a + b);\n"
      "    } else {\n"
      "      s = s - 1;\n"
      "    }\n"
      "    a = a - 1;\n"
      "  }\n"
      "  return s + 10 / (b - 5);\n"
      "}\n");
  const lang::Program gsa = lang::transform_gsa(src);
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> d(-10, 20);
  for (int k = 0; k < 200; ++k) {
    const std::vector<Arg> args{int_arg(d(rng)), int_arg(d(rng))};
    EXPECT_EQ(call_method(src, "f", args), call_method(gsa, "f", args));
  }
}

TEST(Interpreter, BuiltinsFollowJavaBounds) {
  const lang::Program p = parse(
      "method sub(s, b, e) { return substring(s, b, e); }\n"
      "method at(s, i) { return charAt(s, i); }\n"
      "method find(s, t) { return indexOf(s, t); }\n");
  EXPECT_EQ(call_method(p, "sub", {str_arg("hello"), int_arg(1), int_arg(3)}).value, "\"el\"");  // strings print quoted
  EXPECT_EQ(call_method(p, "sub", {str_arg("hello"), int_arg(5), int_arg(5)}).value, "\"\"");
  EXPECT_FALSE(call_method(p, "sub", {str_arg("hello"), int_arg(3), int_arg(6)}).ok);
  EXPECT_FALSE(call_method(p, "sub", {str_arg("hello"), int_arg(3), int_arg(2)}).ok);
  EXPECT_EQ(call_method(p, "at", {str_arg("A"), int_arg(0)}).value, "65");
  EXPECT_FALSE(call_method(p, "at", {str_arg("A"), int_arg(1)}).ok);
  EXPECT_EQ(call_method(p, "find", {str_arg("1eE"), str_arg("E")}).value, "2");
  EXPECT_EQ(call_method(p, "find", {str_arg("abc"), str_arg("x")}).value, "-1");
}

TEST(Interpreter, BudgetExhaustionFailsTheTest) {
  const lang::Program p = parse("method spin(n) { while (true) { n = n + 1; } return n; }");
  const auto suite = parse_suite("test loop { assert spin(0) == 0; }");
  profile::RunOptions opts;
  opts.step_budget = 1000;
  const auto trace = profile::run_test(p, suite[0], opts);
  EXPECT_EQ(trace.label, profile::Label::kFail);
  EXPECT_TRUE(trace.budget_exhausted);
}

TEST(Interpreter, RecordsTableOneProjections) {
  const auto bug = testing::corpus_bug("lang27");
  const lang::Program p = lang::transform_gsa(parse(bug.buggy_source));
  const auto suite = parse_suite(bug.tests_source);
  const auto traces = profile::run_suite(p, suite);
  ASSERT_EQ(traces.size(), 4u);
  EXPECT_EQ(traces[3].label, profile::Label::kFail);
  std::set<std::string> t4_names;
  for (const auto& o : traces[3].observations) t4_names.insert(o.occurrence.name());
  EXPECT_TRUE(t4_names.count("expPos"));
  EXPECT_TRUE(t4_names.count("length(str)"));
  EXPECT_TRUE(t4_names.count("str==null"));
  EXPECT_TRUE(t4_names.count("type(str)"));
  // integers are only recorded as numbers
  for (const auto& o : traces[3].observations) {
    if (o.occurrence.name() == "expPos") EXPECT_EQ(o.value.kind, profile::ObservedValue::Kind::kNumeric);
  }
}

TEST(Interpreter, TrackedLinesLimitRecording) {
  const auto bug = testing::corpus_bug("lang27");
  const lang::Program p = lang::transform_gsa(parse(bug.buggy_source));
  const auto suite = parse_suite(bug.tests_source);
  profile::RunOptions opts;
  opts.tracked = std::set<std::pair<std::string, int>>{{"createNumber", 474}};
  const auto t = profile::run_test(p, suite[0], opts);
  ASSERT_FALSE(t.observations.empty());
  for (const auto& o : t.observations) EXPECT_EQ(o.occurrence.line, 474);
}

TEST(TraceIo, RoundTripsEveryCorpusSuite) {
  for (const auto& bug : eval::seed_corpus()) {
    const lang::Program p = lang::transform_gsa(parse(bug.buggy_source));
    const auto traces = profile::run_suite(p, parse_suite(bug.tests_source));
    std::stringstream ss;
    profile::write_traces(ss, traces);
    EXPECT_EQ(profile::read_traces(ss), traces) << bug.id;
  }
}

TEST(TraceIo, ReportsTheBadLine) {
  std::stringstream ss("{\"test\":\"a\"}\nnot json\n");
  try {
    profile::read_traces(ss);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("trace line"), std::string::npos);
  }
}

TEST(Suite, DuplicateIdsRejectedBeforeRunning) {
  const lang::Program p = parse("method f() { return 1; }");
  lang::TestCase a;
  a.id = "same";
  EXPECT_THROW(profile::run_suite(p, {a, a}), profile::SuiteError);
}

}  // namespace
}  // namespace vardt
