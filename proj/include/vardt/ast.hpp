#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vardt::lang {

enum class ExprKind {
  kIntLit,
  kBoolLit,
  kStrLit,
  kNullLit,
  kVar,
  kUnary,   // text = "!" or "-"
  kBinary,  // text = operator
  kCall,    // text = callee; args = arguments
  kIndex,   // args[0][args[1]]
  kArrayLit,
  kBind,    // text = temporary name; args[0] = bound expression
};

// Which code structure a temporary was introduced for.
enum class TempKind { kCondition, kReturnOrArg };

struct Expr {
  ExprKind kind = ExprKind::kNullLit;
  std::string text;
  std::int64_t int_value = 0;
  bool bool_value = false;
  std::vector<Expr> args;
  int line = 0;
  int column = 0;
  TempKind temp_kind = TempKind::kCondition;  // kBind only

  bool is_atomic() const {
    return kind == ExprKind::kIntLit || kind == ExprKind::kBoolLit ||
           kind == ExprKind::kStrLit || kind == ExprKind::kNullLit ||
           kind == ExprKind::kVar;
  }
};

enum class StmtKind {
  kAssign,       // target = value
  kIndexAssign,  // target[index] = value
  kIf,
  kWhile,
  kReturn,       // value optional
  kThrow,
  kAssert,
  kExpr,         // expression statement (calls)
};

struct Stmt {
  StmtKind kind = StmtKind::kExpr;
  int line = 0;
  std::string target;
  std::optional<Expr> index;
  std::optional<Expr> value;  // assignment RHS, return/throw/expr value, condition
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
};

struct Method {
  std::string name;
  std::vector<std::string> params;
  std::vector<Stmt> body;
  int line = 0;      // header line
  int end_line = 0;  // closing brace
};

// Origin of a temporary introduced by the GSA transform.
struct TempInfo {
  std::string method;
  int line = 0;
  TempKind kind = TempKind::kCondition;
  std::string expression;  // printed original sub-expression
};

struct Program {
  std::vector<Method> methods;
  std::map<std::string, TempInfo> temps;  // source map for temporaries
  bool transformed = false;

  const Method* find(const std::string& name) const;
};

struct TestCase {
  std::string id;
  std::vector<Stmt> body;
  int line = 0;
};

std::string to_string(const Expr& e);
std::string to_string(const Stmt& s, int indent = 0);
std::string to_string(const Program& p);

// Visits every statement of a body recursively in program order.
template <typename Fn>
void for_each_stmt(const std::vector<Stmt>& body, Fn&& fn) {
  for (const Stmt& s : body) {
    fn(s);
    for_each_stmt(s.then_body, fn);
    for_each_stmt(s.else_body, fn);
  }
}

bool is_temp_name(const std::string& name);

}  // namespace vardt::lang
