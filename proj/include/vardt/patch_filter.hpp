#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vardt/ast.hpp"
#include "vardt/ranker.hpp"

namespace vardt::patch {

enum class Correctness { kCorrect, kIncorrect };

struct RemovedLine {
  int line = 0;
  std::string text;
};

struct Hunk {
  std::string method;
  std::vector<RemovedLine> removed;
  std::vector<std::string> inserted;
};

struct PatchDiff {
  std::string id;
  Correctness label = Correctness::kIncorrect;
  std::vector<Hunk> hunks;
};

class PatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `PATCH <id> LABEL <correct|incorrect>` headers, then hunks introduced by
// `METHOD <name>` with `- <line#> <stmt>` and `+ <stmt>` lines.
std::vector<PatchDiff> parse_patches(std::string_view text);

// Identifiers naming variables in a statement fragment (keywords, builtins,
// callees and string contents skipped).
std::vector<std::string> fragment_variables(std::string_view text);

// True iff a hunk in the variable's method removes a line holding it (or its
// temporary's statement) or mentions its base variable in an inserted line.
// `program` is the GSA form of the buggy program.
bool involves(const PatchDiff& p, const std::vector<rank::RankedVariable>& vars, const lang::Program& program);

struct FilterReport {
  int n_fi = 0;  // filtered, incorrect
  int n_fc = 0;  // filtered, correct
  int n_ni = 0;  // kept, incorrect
  int n_nc = 0;  // kept, correct

  std::optional<double> precision() const;
  std::optional<double> recall() const;
  int total() const { return n_fi + n_fc + n_ni + n_nc; }
};

FilterReport report_from_counts(int n_fi, int n_fc, int n_ni, int n_nc);

struct FilterResult {
  std::vector<std::string> kept;
  std::vector<std::string> filtered;
  FilterReport report;
};

// The first n entries of a global ranking. Position rather than rank: with
// tied average ranks the rank <= n set can be empty, and every list has to
// contain the shorter ones.
std::vector<rank::RankedVariable> top_variables(const std::vector<rank::RankedVariable>& ranking, int n);

FilterResult filter(const std::vector<PatchDiff>& patches, const std::vector<rank::RankedVariable>& vars,
                    const lang::Program& program);

void write_filter_report(std::ostream& os, const FilterResult& r);
void write_filter_json(std::ostream& os, const FilterResult& r);

}  // namespace vardt::patch
