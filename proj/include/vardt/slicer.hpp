#pragma once

#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vardt/dependence.hpp"
#include "vardt/profiler.hpp"

namespace vardt::slicing {

struct Criterion {
  std::string test_id;
  int line = 0;
  std::vector<VarOccurrence> vars;
};

struct Slice {
  std::string method;
  std::vector<Criterion> criteria;
  std::set<int> lines;
  std::set<VarOccurrence> occurrences;

  bool empty() const { return lines.empty(); }
};

class MethodUnreached : public std::runtime_error {
 public:
  explicit MethodUnreached(const std::string& method) : std::runtime_error("method unreached: " + method) {}
};

// The last line of the method executed by the failed run, with the
// occurrences at that line.
Criterion slicing_criterion(const profile::TestRunTrace& failed, const analysis::DependencyGraph& g);

// Closure over dependence edges from the criterion, keeping only occurrences
// on lines the run executed in this method.
Slice backward_slice(const analysis::DependencyGraph& g, const profile::TestRunTrace& failed, const Criterion& c);

Slice multi_fail_merge(const std::vector<Slice>& slices);

// Union of the slices of every failed trace that reached the method; empty
// when none did.
Slice slice_method(const analysis::DependencyGraph& g, const std::vector<profile::TestRunTrace>& traces);

// Occurrences on lines any run executed in the graph's method: the candidates
// profiling would see without the slice.
std::size_t covered_occurrences(const analysis::DependencyGraph& g, const std::vector<profile::TestRunTrace>& traces);

// 1 - |sliced occurrences| / |covered occurrences|.
double reduction_ratio(const Slice& s, const analysis::DependencyGraph& g,
                       const std::vector<profile::TestRunTrace>& traces);

// `<method>:<line>` per retained line, then `OCC <occurrence>` lines.
void write_slice(std::ostream& os, const Slice& s);

}  // namespace vardt::slicing
