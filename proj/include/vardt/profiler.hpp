#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vardt/ast.hpp"
#include "vardt/occurrence.hpp"

namespace vardt::profile {

// One projection of a runtime value: the number itself, or a null check, type
// tag, size or element of a composite.
struct ObservedValue {
  enum class Kind { kNumeric, kBoolean, kNullCheck, kTypeTag, kSize, kElement, kNominal };

  Kind kind = Kind::kNumeric;
  std::int64_t number = 0;  // numeric / size / element value
  bool flag = false;        // boolean / null check / element value when elem_is_bool
  std::string text;         // type tag / nominal
  std::int64_t index = 0;   // element index
  bool elem_is_bool = false;

  static ObservedValue numeric(std::int64_t v);
  static ObservedValue boolean(bool b);
  static ObservedValue null_check(bool is_null);
  static ObservedValue type_tag(std::string t);
  static ObservedValue size(std::int64_t n);
  static ObservedValue element(std::int64_t i, std::int64_t v);
  static ObservedValue element(std::int64_t i, bool b);
  static ObservedValue nominal(std::string s);

  std::string to_string() const;
  friend bool operator==(const ObservedValue&, const ObservedValue&) = default;
};

const char* to_string(ObservedValue::Kind k);

struct VariableObservation {
  VarOccurrence occurrence;
  std::string test_id;
  std::int64_t sequence_index = 0;
  ObservedValue value;
  friend bool operator==(const VariableObservation&, const VariableObservation&) = default;
};

enum class Label { kPass, kFail };
const char* to_string(Label l);

struct TestRunTrace {
  std::string test_id;
  Label label = Label::kPass;
  std::map<std::string, std::vector<int>> per_method;  // executed lines in order
  std::vector<VariableObservation> observations;
  std::map<std::string, int> failure_site;  // method -> last executed line (FAIL only)
  bool budget_exhausted = false;
  std::string error;  // failure message, empty on PASS

  bool covers(const std::string& method) const { return per_method.count(method) > 0; }
  friend bool operator==(const TestRunTrace&, const TestRunTrace&) = default;
};

struct RunOptions {
  std::int64_t step_budget = 1'000'000;
  // When set, only occurrences on these (method, line) sites are recorded.
  std::optional<std::set<std::pair<std::string, int>>> tracked;
  bool record = true;
  int max_elements = 32;
};

// Executes one test against a (normally GSA-transformed) program.
TestRunTrace run_test(const lang::Program& p, const lang::TestCase& t, const RunOptions& opts = {});

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One trace per test, in suite order. Duplicate ids are rejected before any
// test runs. `jobs` > 1 runs tests concurrently.
std::vector<TestRunTrace> run_suite(const lang::Program& p, const std::vector<lang::TestCase>& suite,
                                    const RunOptions& opts = {}, int jobs = 1);

// For every occurrence of `method`, the last observation per test. Tests that
// never reached an occurrence are absent from its inner map.
std::map<VarOccurrence, std::map<std::string, ObservedValue>> last_value_table(
    const std::vector<TestRunTrace>& traces, const std::string& method);

// Result of calling a single method directly, used for differential checks.
struct CallOutcome {
  bool ok = true;
  std::string value;  // printed return value
  std::string error;
  friend bool operator==(const CallOutcome&, const CallOutcome&) = default;
};

// ints, bools, strings, null and int/string arrays, as used by call_method.
struct Arg {
  enum class Kind { kNull, kInt, kBool, kStr, kIntArray } kind = Kind::kNull;
  std::int64_t i = 0;
  bool b = false;
  std::string s;
  std::vector<std::int64_t> arr;
};

CallOutcome call_method(const lang::Program& p, const std::string& method, const std::vector<Arg>& args,
                        std::int64_t step_budget = 1'000'000);

// Line-delimited trace file: one JSON object per test.
void write_traces(std::ostream& os, const std::vector<TestRunTrace>& traces);
std::vector<TestRunTrace> read_traces(std::istream& is);

}  // namespace vardt::profile
