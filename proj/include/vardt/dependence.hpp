#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vardt/ast.hpp"
#include "vardt/occurrence.hpp"

namespace vardt::analysis {

enum class EdgeKind { kData, kControl };
const char* to_string(EdgeKind k);

// `from` depends on `to`.
struct Edge {
  VarOccurrence from;
  VarOccurrence to;
  EdgeKind kind = EdgeKind::kData;

  friend bool operator<(const Edge& a, const Edge& b) {
    if (a.from < b.from) return true;
    if (b.from < a.from) return false;
    if (a.to < b.to) return true;
    if (b.to < a.to) return false;
    return a.kind < b.kind;
  }
  friend bool operator==(const Edge& a, const Edge& b) {
    return a.from == b.from && a.to == b.to && a.kind == b.kind;
  }
};

// Occurrences of one statement (not its nested bodies), in evaluation order
// and without duplicates.
std::vector<VarOccurrence> statement_occurrences(const std::string& method, const lang::Stmt& s);

// Lines of the branch statements (if, while, assert) each statement line is
// control dependent on.
std::map<int, std::set<int>> control_dependence(const lang::Method& m);

class DependencyGraph {
 public:
  DependencyGraph() = default;
  DependencyGraph(std::string method, std::set<VarOccurrence> nodes, std::set<Edge> edges,
                  std::map<int, std::set<VarOccurrence>> guards = {});

  const std::string& method() const { return method_; }
  const std::vector<VarOccurrence>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // -1 when absent.
  int index_of(const VarOccurrence& o) const;
  bool contains(const VarOccurrence& o) const { return index_of(o) >= 0; }

  // Direct dependencies / direct dependents, as node indices.
  const std::vector<int>& dependencies(int node) const { return out_[static_cast<std::size_t>(node)]; }
  const std::vector<int>& dependents(int node) const { return in_[static_cast<std::size_t>(node)]; }

  // True iff a path of length >= 1 leads from x to v.
  bool depends_on(const VarOccurrence& x, const VarOccurrence& v) const;

  // Every node that reaches one of `targets` by a path of length >= 1.
  std::vector<bool> reaching(const std::vector<int>& targets) const;

  std::vector<VarOccurrence> at_line(int line) const;
  // Condition roots of the branches a statement line is control dependent on.
  std::set<VarOccurrence> guards(int line) const;

  // `EDGE <var>@<line> -> <var>@<line> <data|control>`, one per line, sorted.
  void write(std::ostream& os) const;

 private:
  std::string method_;
  std::vector<VarOccurrence> nodes_;
  std::vector<Edge> edges_;
  std::map<VarOccurrence, int> index_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::map<int, std::set<VarOccurrence>> guards_;
};

DependencyGraph build_dependence_graph(const lang::Method& m);

// Identifies an equivalence class; predicate features form their own class
// per base class.
struct ClassId {
  int base = -1;
  std::string feature;
  friend auto operator<=>(const ClassId&, const ClassId&) = default;
};

class EquivalenceClasses {
 public:
  EquivalenceClasses() = default;

  // Classes over the graph's nodes. Occurrences with the same variable are
  // merged when they observe the same set of reaching definitions.
  EquivalenceClasses(const DependencyGraph& g, const lang::Method& m);

  std::size_t size() const { return members_.size(); }

  // base = -1 when the occurrence (or the base of a feature) is unknown.
  ClassId class_of(const VarOccurrence& o) const;

  // Graph members of the base class; feature classes share their base's members.
  const std::vector<VarOccurrence>& members(int base) const { return members_[static_cast<std::size_t>(base)]; }
  std::vector<VarOccurrence> members(const ClassId& c) const;

  // Smallest-line member.
  VarOccurrence representative(const ClassId& c) const;
  std::set<int> lines(const ClassId& c) const;

 private:
  std::map<VarOccurrence, int> class_of_;
  std::vector<std::vector<VarOccurrence>> members_;
};

}  // namespace vardt::analysis
