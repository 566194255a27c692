#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vardt/ranker.hpp"

namespace vardt::eval {

struct TruthEntry {
  std::string name;    // variable, temporary or feature name as ranked
  std::set<int> lines;
  int rule = 1;        // 1 modified, 2 affected by insertion, 3 data-flow break, 4 rewritten body
  std::string method;  // empty: any method
};

struct GroundTruth {
  std::string bug_id;
  std::vector<TruthEntry> entries;
};

class TruthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lines `VAR <name> LINES <l1,l2,...> RULE <1-4>`, optionally preceded by
// `METHOD <name>` which applies to the entries after it. `#` starts a comment.
GroundTruth parse_truth(std::string_view text, const std::string& bug_id);
void write_truth(std::ostream& os, const GroundTruth& g);

bool matches(const rank::RankedVariable& v, const TruthEntry& e);

// Best rank of any truth entry; nullopt when none is in the list.
std::optional<double> first_rank(const std::vector<rank::RankedVariable>& ranking, const GroundTruth& g);
// Mean over the truth entries found in the list of each entry's best rank.
std::optional<double> average_rank(const std::vector<rank::RankedVariable>& ranking, const GroundTruth& g);

using Rankings = std::map<std::string, std::vector<rank::RankedVariable>>;
using Truths = std::map<std::string, GroundTruth>;

// Fraction of the truth bugs with a truth variable at rank <= n. A bug with
// no ranking counts as a miss.
double topn_recall(const Rankings& rankings, const Truths& truths, double n);
// Means over bugs whose list contains a truth variable; nullopt if none does.
std::optional<double> mfr(const Rankings& rankings, const Truths& truths);
std::optional<double> mar(const Rankings& rankings, const Truths& truths);

struct BugMetrics {
  std::string bug_id;
  std::optional<double> first;
  std::optional<double> average;
  std::string error;  // localization failure, if any
};

struct MetricsReport {
  std::vector<BugMetrics> bugs;
  std::map<int, double> top;  // N -> recall for N in 1,3,5,10
  std::optional<double> mfr;
  std::optional<double> mar;
  std::vector<std::string> excluded;
  std::optional<double> mean_reduction;  // slicing space reduction over bugs
};

MetricsReport compute_metrics(const Rankings& rankings, const Truths& truths,
                              const std::map<std::string, std::string>& errors = {});
void write_metrics(std::ostream& os, const MetricsReport& r);
void write_metrics_json(std::ostream& os, const MetricsReport& r);

struct CorpusBug {
  std::string id;
  std::filesystem::path dir;
  std::string buggy_source;
  std::string fixed_source;
  std::string tests_source;
  std::string patches_source;  // may be empty
  std::string notes;
  GroundTruth truth;
};

// Every subdirectory holding buggy.mini, fixed.mini, tests.mini and
// truth.txt; patches.txt and notes.txt are optional. Sorted by id.
std::vector<CorpusBug> load_corpus(const std::filesystem::path& dir);
std::filesystem::path default_corpus_dir();
std::vector<CorpusBug> seed_corpus();

std::string read_file(const std::filesystem::path& p);

}  // namespace vardt::eval
