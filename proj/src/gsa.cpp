#include "vardt/gsa.hpp"

namespace vardt::lang {
namespace {

class Transformer {
 public:
  Transformer(const std::string& method, Program& out) : method_(method), out_(out) {}

  void body(std::vector<Stmt>& stmts) {
    for (Stmt& s : stmts) stmt(s);
  }

 private:
  void stmt(Stmt& s) {
    switch (s.kind) {
      case StmtKind::kIf:
      case StmtKind::kWhile:
      case StmtKind::kAssert:
        *s.value = wrap(std::move(*s.value), TempKind::kCondition, s.line);
        break;
      case StmtKind::kReturn:
        if (s.value) *s.value = wrap(std::move(*s.value), TempKind::kReturnOrArg, s.line);
        break;
      case StmtKind::kIndexAssign:
        *s.index = plain(std::move(*s.index), s.line);
        *s.value = plain(std::move(*s.value), s.line);
        break;
      case StmtKind::kAssign:
      case StmtKind::kThrow:
      case StmtKind::kExpr:
        *s.value = plain(std::move(*s.value), s.line);
        break;
    }
    body(s.then_body);
    body(s.else_body);
  }

  // Outside a wrapping context: only call arguments open a new context.
  Expr plain(Expr e, int line) {
    if (e.kind == ExprKind::kCall) {
      for (Expr& a : e.args) a = wrap(std::move(a), TempKind::kReturnOrArg, line);
      return e;
    }
    for (Expr& a : e.args) a = plain(std::move(a), line);
    return e;
  }

  // Inside a wrapping context every compound sub-expression gets a temporary.
  Expr wrap(Expr e, TempKind kind, int line) {
    if (e.is_atomic() || e.kind == ExprKind::kBind) return e;
    const std::string name = "__t" + method_ + "_" + std::to_string(++counter_);
    const std::string printed = to_string(e);
    for (Expr& a : e.args) a = wrap(std::move(a), kind, line);
    Expr bind;
    bind.kind = ExprKind::kBind;
    bind.text = name;
    bind.temp_kind = kind;
    bind.line = e.line;
    bind.column = e.column;
    bind.args.push_back(std::move(e));
    out_.temps[name] = TempInfo{method_, line, kind, printed};
    return bind;
  }

  const std::string& method_;
  Program& out_;
  int counter_ = 0;
};

}  // namespace

Program transform_gsa(const Program& p) {
  if (p.transformed) return p;
  Program out = p;
  out.transformed = true;
  for (Method& m : out.methods) {
    Transformer t(m.name, out);
    t.body(m.body);
  }
  return out;
}

}  // namespace vardt::lang
