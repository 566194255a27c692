#include "vardt/slicer.hpp"

#include <deque>
#include <functional>
#include <ostream>

namespace vardt::slicing {

using analysis::DependencyGraph;
using profile::Label;
using profile::TestRunTrace;

namespace {

std::set<int> executed_lines(const TestRunTrace& t, const std::string& method) {
  auto it = t.per_method.find(method);
  if (it == t.per_method.end()) return {};
  return {it->second.begin(), it->second.end()};
}

}  // namespace

Criterion slicing_criterion(const TestRunTrace& failed, const DependencyGraph& g) {
  auto it = failed.per_method.find(g.method());
  if (it == failed.per_method.end() || it->second.empty()) throw MethodUnreached(g.method());
  Criterion c;
  c.test_id = failed.test_id;
  c.line = it->second.back();
  c.vars = g.at_line(c.line);
  // `return -1;` and the like carry no occurrences; what they depend on is
  // the branch that let them run.
  if (c.vars.empty()) {
    for (const auto& o : g.guards(c.line)) c.vars.push_back(o);
  }
  return c;
}

Slice backward_slice(const DependencyGraph& g, const TestRunTrace& failed, const Criterion& c) {
  const std::set<int> executed = executed_lines(failed, g.method());
  Slice s;
  s.method = g.method();
  s.criteria.push_back(c);
  s.lines.insert(c.line);
  std::vector<bool> seen(g.nodes().size(), false);
  std::deque<int> queue;
  for (const auto& v : c.vars) {
    const int n = g.index_of(v);
    if (n >= 0 && !seen[static_cast<std::size_t>(n)]) {
      seen[static_cast<std::size_t>(n)] = true;
      queue.push_back(n);
    }
  }
  auto visit = [&](int d) {
    const auto ud = static_cast<std::size_t>(d);
    if (seen[ud]) return;
    seen[ud] = true;
    queue.push_back(d);
  };
  // A definition that could have reached a use but did not run still tells
  // us something: the executed branch that skipped it decided the value.
  std::set<int> skipped_seen;
  std::function<void(int)> skipped = [&](int line) {
    if (!skipped_seen.insert(line).second) return;
    for (const auto& guard : g.guards(line)) {
      if (executed.count(guard.line)) {
        visit(g.index_of(guard));
      } else {
        skipped(guard.line);
      }
    }
  };
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop_front();
    s.lines.insert(g.nodes()[static_cast<std::size_t>(n)].line);
    for (int d : g.dependencies(n)) {
      const int line = g.nodes()[static_cast<std::size_t>(d)].line;
      if (executed.count(line)) {
        visit(d);
      } else {
        skipped(line);
      }
    }
  }
  for (int l : s.lines) {
    for (auto& o : g.at_line(l)) s.occurrences.insert(std::move(o));
  }
  return s;
}

Slice multi_fail_merge(const std::vector<Slice>& slices) {
  Slice out;
  for (const Slice& s : slices) {
    if (out.method.empty()) out.method = s.method;
    out.criteria.insert(out.criteria.end(), s.criteria.begin(), s.criteria.end());
    out.lines.insert(s.lines.begin(), s.lines.end());
    out.occurrences.insert(s.occurrences.begin(), s.occurrences.end());
  }
  return out;
}

Slice slice_method(const DependencyGraph& g, const std::vector<TestRunTrace>& traces) {
  std::vector<Slice> parts;
  for (const auto& t : traces) {
    if (t.label != Label::kFail || !t.covers(g.method())) continue;
    parts.push_back(backward_slice(g, t, slicing_criterion(t, g)));
  }
  Slice s = multi_fail_merge(parts);
  s.method = g.method();
  return s;
}

std::size_t covered_occurrences(const DependencyGraph& g, const std::vector<TestRunTrace>& traces) {
  std::set<int> covered;
  for (const auto& t : traces) {
    const auto lines = executed_lines(t, g.method());
    covered.insert(lines.begin(), lines.end());
  }
  std::size_t total = 0;
  for (const auto& n : g.nodes()) total += covered.count(n.line);
  return total;
}

double reduction_ratio(const Slice& s, const DependencyGraph& g, const std::vector<TestRunTrace>& traces) {
  const std::size_t total = covered_occurrences(g, traces);
  if (total == 0) return 0.0;
  return 1.0 - static_cast<double>(s.occurrences.size()) / static_cast<double>(total);
}

void write_slice(std::ostream& os, const Slice& s) {
  for (int l : s.lines) os << s.method << ':' << l << '\n';
  for (const auto& o : s.occurrences) os << "OCC " << o.display() << '\n';
}

}  // namespace vardt::slicing
