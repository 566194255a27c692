#include "vardt/dependence.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <ostream>

namespace vardt::analysis {

using lang::Expr;
using lang::ExprKind;
using lang::Method;
using lang::Stmt;
using lang::StmtKind;

const char* to_string(EdgeKind k) { return k == EdgeKind::kData ? "data" : "control"; }

namespace {

VarOccurrence var_occ(const std::string& method, const std::string& name, int line) {
  return VarOccurrence{method, name, line, OccKind::kProgramVariable, ""};
}

VarOccurrence temp_occ(const std::string& method, const Expr& bind, int line) {
  return VarOccurrence{method, bind.text, line,
                       bind.temp_kind == lang::TempKind::kCondition ? OccKind::kTempCondition : OccKind::kTempReturnArg,
                       ""};
}

void push_unique(std::vector<VarOccurrence>& out, VarOccurrence o) {
  if (std::find(out.begin(), out.end(), o) == out.end()) out.push_back(std::move(o));
}

// Evaluation order: a temporary is recorded after its bound expression.
void walk(const std::string& method, const Expr& e, int line, std::vector<VarOccurrence>& out) {
  if (e.kind == ExprKind::kVar) {
    push_unique(out, var_occ(method, e.text, line));
    return;
  }
  for (const Expr& a : e.args) walk(method, a, line, out);
  if (e.kind == ExprKind::kBind) push_unique(out, temp_occ(method, e, line));
}

// Outermost occurrences: what an expression's value is computed from directly.
void leaves(const std::string& method, const Expr& e, int line, std::vector<VarOccurrence>& out) {
  if (e.kind == ExprKind::kVar) {
    push_unique(out, var_occ(method, e.text, line));
  } else if (e.kind == ExprKind::kBind) {
    push_unique(out, temp_occ(method, e, line));
  } else {
    for (const Expr& a : e.args) leaves(method, a, line, out);
  }
}

template <typename Fn>
void for_each_bind(const Expr& e, Fn&& fn) {
  if (e.kind == ExprKind::kBind) fn(e);
  for (const Expr& a : e.args) for_each_bind(a, fn);
}

template <typename Fn>
void for_each_var(const Expr& e, Fn&& fn) {
  if (e.kind == ExprKind::kVar) fn(e.text);
  for (const Expr& a : e.args) for_each_var(a, fn);
}

bool defines(const Stmt& s) { return s.kind == StmtKind::kAssign || s.kind == StmtKind::kIndexAssign; }

bool is_branch(const Stmt& s) {
  return s.kind == StmtKind::kIf || s.kind == StmtKind::kWhile || s.kind == StmtKind::kAssert;
}

// Statement-level CFG plus the dataflow facts the graph needs.
struct Flow {
  std::vector<const Stmt*> stmts;  // pre-order
  int entry = 0;
  int exit = 0;
  std::vector<std::vector<int>> succ;
  std::vector<std::vector<int>> pred;
  std::vector<std::set<int>> cd;  // statement -> governing branch statements
  // Reaching definitions at statement entry: var -> defining statements
  // (`entry` stands for the method entry).
  std::vector<std::map<std::string, std::set<int>>> rd_in;

  explicit Flow(const Method& m) {
    lang::for_each_stmt(m.body, [&](const Stmt& s) { stmts.push_back(&s); });
    for (std::size_t k = 0; k < stmts.size(); ++k) ids_[stmts[k]] = static_cast<int>(k);
    entry = static_cast<int>(stmts.size());
    exit = entry + 1;
    succ.assign(stmts.size() + 2, {});
    const int first = build(m.body, exit);
    add_edge(entry, first);
    add_edge(entry, exit);
    connect_dead_ends();
    pred.assign(succ.size(), {});
    for (std::size_t n = 0; n < succ.size(); ++n) {
      for (int s : succ[n]) pred[static_cast<std::size_t>(s)].push_back(static_cast<int>(n));
    }
    compute_control_dependence();
    compute_reaching_definitions(m);
  }

  int id(const Stmt& s) const { return ids_.at(&s); }

 private:
  void add_edge(int a, int b) {
    auto& v = succ[static_cast<std::size_t>(a)];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  }

  int build(const std::vector<Stmt>& body, int follow) {
    int next = follow;
    for (auto it = body.rbegin(); it != body.rend(); ++it) {
      const Stmt& s = *it;
      const int n = id(s);
      switch (s.kind) {
        case StmtKind::kIf:
          add_edge(n, build(s.then_body, next));
          add_edge(n, build(s.else_body, next));
          break;
        case StmtKind::kWhile:
          add_edge(n, build(s.then_body, n));
          add_edge(n, next);
          break;
        case StmtKind::kReturn:
        case StmtKind::kThrow: add_edge(n, exit); break;
        case StmtKind::kAssert:
          add_edge(n, next);
          add_edge(n, exit);
          break;
        default: add_edge(n, next); break;
      }
      next = n;
    }
    return next;
  }

  // Nodes with no path to exit get a pseudo edge so post-dominance is total.
  void connect_dead_ends() {
    std::vector<bool> reaches(succ.size(), false);
    bool changed = true;
    reaches[static_cast<std::size_t>(exit)] = true;
    while (changed) {
      changed = false;
      for (std::size_t n = 0; n < succ.size(); ++n) {
        if (reaches[n]) continue;
        for (int s : succ[n]) {
          if (reaches[static_cast<std::size_t>(s)]) {
            reaches[n] = true;
            changed = true;
            break;
          }
        }
      }
    }
    for (std::size_t n = 0; n < succ.size(); ++n) {
      if (!reaches[n]) add_edge(static_cast<int>(n), exit);
    }
  }

  void compute_control_dependence() {
    const std::size_t n = succ.size();
    // Post-dominator sets, iterated to the greatest fixpoint.
    std::vector<std::vector<bool>> pdom(n, std::vector<bool>(n, true));
    pdom[static_cast<std::size_t>(exit)].assign(n, false);
    pdom[static_cast<std::size_t>(exit)][static_cast<std::size_t>(exit)] = true;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<int>(v) == exit) continue;
        std::vector<bool> meet(n, true);
        for (int s : succ[v]) {
          for (std::size_t k = 0; k < n; ++k) meet[k] = meet[k] && pdom[static_cast<std::size_t>(s)][k];
        }
        meet[v] = true;
        if (meet != pdom[v]) {
          pdom[v] = std::move(meet);
          changed = true;
        }
      }
    }
    // The immediate post-dominator is the strict post-dominator with the
    // largest post-dominator set (post-dominators form a chain).
    std::vector<int> ipdom(n, -1);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t v = 0; v < n; ++v) count[v] = static_cast<std::size_t>(std::count(pdom[v].begin(), pdom[v].end(), true));
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t d = 0; d < n; ++d) {
        if (d == v || !pdom[v][d]) continue;
        if (ipdom[v] < 0 || count[d] > count[static_cast<std::size_t>(ipdom[v])]) ipdom[v] = static_cast<int>(d);
      }
    }
    cd.assign(n, {});
    for (std::size_t a = 0; a < stmts.size(); ++a) {
      if (!is_branch(*stmts[a])) continue;
      for (int b : succ[a]) {
        int runner = b;
        while (runner >= 0 && runner != ipdom[a]) {
          cd[static_cast<std::size_t>(runner)].insert(static_cast<int>(a));
          runner = ipdom[static_cast<std::size_t>(runner)];
        }
      }
    }
  }

  void compute_reaching_definitions(const Method& m) {
    const std::size_t n = succ.size();
    std::vector<std::map<std::string, std::set<int>>> out(n);
    rd_in.assign(n, {});
    // Parameters and any read-before-write resolve to the entry pseudo def.
    std::set<std::string> vars(m.params.begin(), m.params.end());
    for (const Stmt* s : stmts) {
      if (defines(*s)) vars.insert(s->target);
      if (s->value) for_each_var(*s->value, [&](const std::string& v) { vars.insert(v); });
      if (s->index) for_each_var(*s->index, [&](const std::string& v) { vars.insert(v); });
    }
    for (const auto& v : vars) out[static_cast<std::size_t>(entry)][v] = {entry};
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t v = 0; v < stmts.size(); ++v) {
        std::map<std::string, std::set<int>> in;
        for (int p : pred[v]) {
          for (const auto& [var, defs] : out[static_cast<std::size_t>(p)]) in[var].insert(defs.begin(), defs.end());
        }
        auto o = in;
        if (defines(*stmts[v])) o[stmts[v]->target] = {static_cast<int>(v)};
        if (in != rd_in[v] || o != out[v]) {
          rd_in[v] = std::move(in);
          out[v] = std::move(o);
          changed = true;
        }
      }
    }
  }

  std::map<const Stmt*, int> ids_;
};

// Root occurrence standing for a branch condition, if the condition has one.
std::optional<VarOccurrence> condition_root(const std::string& method, const Stmt& s) {
  if (!s.value) return std::nullopt;
  const Expr& c = *s.value;
  if (c.kind == ExprKind::kBind) return temp_occ(method, c, s.line);
  if (c.kind == ExprKind::kVar) return var_occ(method, c.text, s.line);
  return std::nullopt;
}

}  // namespace

std::vector<VarOccurrence> statement_occurrences(const std::string& method, const Stmt& s) {
  std::vector<VarOccurrence> out;
  if (s.kind == StmtKind::kIndexAssign) push_unique(out, var_occ(method, s.target, s.line));
  if (s.index) walk(method, *s.index, s.line, out);
  if (s.value) walk(method, *s.value, s.line, out);
  if (s.kind == StmtKind::kAssign) push_unique(out, var_occ(method, s.target, s.line));
  return out;
}

std::map<int, std::set<int>> control_dependence(const Method& m) {
  Flow flow(m);
  std::map<int, std::set<int>> out;
  for (std::size_t k = 0; k < flow.stmts.size(); ++k) {
    auto& lines = out[flow.stmts[k]->line];
    for (int b : flow.cd[k]) lines.insert(flow.stmts[static_cast<std::size_t>(b)]->line);
  }
  return out;
}

DependencyGraph::DependencyGraph(std::string method, std::set<VarOccurrence> nodes, std::set<Edge> edges,
                                 std::map<int, std::set<VarOccurrence>> guards)
    : method_(std::move(method)),
      nodes_(nodes.begin(), nodes.end()),
      edges_(edges.begin(), edges.end()),
      guards_(std::move(guards)) {
  for (std::size_t k = 0; k < nodes_.size(); ++k) index_[nodes_[k]] = static_cast<int>(k);
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (const Edge& e : edges_) {
    const int a = index_of(e.from);
    const int b = index_of(e.to);
    if (a < 0 || b < 0) continue;
    auto& o = out_[static_cast<std::size_t>(a)];
    if (std::find(o.begin(), o.end(), b) == o.end()) {
      o.push_back(b);
      in_[static_cast<std::size_t>(b)].push_back(a);
    }
  }
}

int DependencyGraph::index_of(const VarOccurrence& o) const {
  auto it = index_.find(o);
  return it == index_.end() ? -1 : it->second;
}

bool DependencyGraph::depends_on(const VarOccurrence& x, const VarOccurrence& v) const {
  const int target = index_of(v);
  const int source = index_of(x);
  if (target < 0 || source < 0) return false;
  return reaching({target})[static_cast<std::size_t>(source)];
}

std::vector<bool> DependencyGraph::reaching(const std::vector<int>& targets) const {
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<int> queue;
  for (int t : targets) {
    for (int d : dependents(t)) {
      if (!seen[static_cast<std::size_t>(d)]) {
        seen[static_cast<std::size_t>(d)] = true;
        queue.push_back(d);
      }
    }
  }
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop_front();
    for (int d : dependents(n)) {
      if (!seen[static_cast<std::size_t>(d)]) {
        seen[static_cast<std::size_t>(d)] = true;
        queue.push_back(d);
      }
    }
  }
  return seen;
}

std::vector<VarOccurrence> DependencyGraph::at_line(int line) const {
  std::vector<VarOccurrence> out;
  for (const auto& n : nodes_) {
    if (n.line == line) out.push_back(n);
  }
  return out;
}

std::set<VarOccurrence> DependencyGraph::guards(int line) const {
  auto it = guards_.find(line);
  return it == guards_.end() ? std::set<VarOccurrence>{} : it->second;
}

void DependencyGraph::write(std::ostream& os) const {
  for (const Edge& e : edges_) {
    os << "EDGE " << e.from.display() << " -> " << e.to.display() << ' ' << to_string(e.kind) << '\n';
  }
}

DependencyGraph build_dependence_graph(const Method& m) {
  Flow flow(m);
  std::set<VarOccurrence> nodes;
  std::set<Edge> edges;
  std::map<int, std::set<VarOccurrence>> guards;
  const std::string& name = m.name;
  auto data = [&](const VarOccurrence& a, const VarOccurrence& b) {
    if (!(a == b)) edges.insert(Edge{a, b, EdgeKind::kData});
  };

  for (std::size_t k = 0; k < flow.stmts.size(); ++k) {
    const Stmt& s = *flow.stmts[k];
    const int line = s.line;
    const auto occs = statement_occurrences(name, s);
    nodes.insert(occs.begin(), occs.end());

    auto rd_edges = [&](const std::string& var) {
      auto it = flow.rd_in[k].find(var);
      if (it == flow.rd_in[k].end()) return;
      for (int d : it->second) {
        if (d == flow.entry) continue;
        data(var_occ(name, var, line), var_occ(name, var, flow.stmts[static_cast<std::size_t>(d)]->line));
      }
    };
    auto expr_edges = [&](const Expr& e) {
      for_each_bind(e, [&](const Expr& b) {
        std::vector<VarOccurrence> from;
        leaves(name, b.args[0], line, from);
        for (const auto& f : from) data(temp_occ(name, b, line), f);
      });
      for_each_var(e, rd_edges);
    };
    if (s.index) expr_edges(*s.index);
    if (s.value) expr_edges(*s.value);

    if (defines(s)) {
      const VarOccurrence def = var_occ(name, s.target, line);
      std::vector<VarOccurrence> from;
      if (s.index) leaves(name, *s.index, line, from);
      if (s.value) leaves(name, *s.value, line, from);
      for (const auto& f : from) data(def, f);
      if (s.kind == StmtKind::kIndexAssign) rd_edges(s.target);
    }

    for (int b : flow.cd[k]) {
      const auto root = condition_root(name, *flow.stmts[static_cast<std::size_t>(b)]);
      if (!root) continue;
      guards[line].insert(*root);
      for (const auto& o : occs) {
        if (!(o == *root)) edges.insert(Edge{o, *root, EdgeKind::kControl});
      }
    }
  }
  return DependencyGraph(name, std::move(nodes), std::move(edges), std::move(guards));
}

EquivalenceClasses::EquivalenceClasses(const DependencyGraph& g, const Method& m) {
  Flow flow(m);
  // First statement holding each occurrence.
  std::map<VarOccurrence, int> stmt_of;
  for (std::size_t k = 0; k < flow.stmts.size(); ++k) {
    for (const auto& o : statement_occurrences(m.name, *flow.stmts[k])) stmt_of.emplace(o, static_cast<int>(k));
  }
  std::map<std::pair<std::string, std::set<int>>, int> by_key;
  for (const VarOccurrence& o : g.nodes()) {
    auto it = stmt_of.find(o);
    std::set<int> key;
    if (it == stmt_of.end()) {
      key = {-1};
    } else {
      const int k = it->second;
      const Stmt& s = *flow.stmts[static_cast<std::size_t>(k)];
      if (o.is_temp() || (defines(s) && s.target == o.variable)) {
        key = {k};
      } else {
        auto rd = flow.rd_in[static_cast<std::size_t>(k)].find(o.variable);
        if (rd != flow.rd_in[static_cast<std::size_t>(k)].end()) key = rd->second;
      }
    }
    auto [pos, inserted] = by_key.emplace(std::make_pair(o.variable, key), static_cast<int>(members_.size()));
    if (inserted) members_.emplace_back();
    members_[static_cast<std::size_t>(pos->second)].push_back(o);
    class_of_[o] = pos->second;
  }
  for (auto& ms : members_) {
    std::sort(ms.begin(), ms.end(), [](const VarOccurrence& a, const VarOccurrence& b) {
      return a.line != b.line ? a.line < b.line : a < b;
    });
  }
}

ClassId EquivalenceClasses::class_of(const VarOccurrence& o) const {
  if (o.is_feature()) {
    ClassId c = class_of(o.base());
    if (c.base >= 0) c.feature = o.feature;
    return c;
  }
  auto it = class_of_.find(o);
  return ClassId{it == class_of_.end() ? -1 : it->second, ""};
}

std::vector<VarOccurrence> EquivalenceClasses::members(const ClassId& c) const {
  std::vector<VarOccurrence> out = members(c.base);
  if (!c.feature.empty()) {
    for (auto& o : out) o = o.with_feature(c.feature);
  }
  return out;
}

VarOccurrence EquivalenceClasses::representative(const ClassId& c) const {
  VarOccurrence r = members(c.base).front();
  return c.feature.empty() ? r : r.with_feature(c.feature);
}

std::set<int> EquivalenceClasses::lines(const ClassId& c) const {
  std::set<int> out;
  for (const auto& o : members(c.base)) out.insert(o.line);
  return out;
}

}  // namespace vardt::analysis
