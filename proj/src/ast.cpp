#include "vardt/ast.hpp"

#include <sstream>

namespace vardt::lang {

const Method* Program::find(const std::string& name) const {
  for (const Method& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

bool is_temp_name(const std::string& name) { return name.rfind("__t", 0) == 0; }

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string operand(const Expr& e) {
  if (e.kind == ExprKind::kBinary) return "(" + to_string(e) + ")";
  return to_string(e);
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case ExprKind::kIntLit: return std::to_string(e.int_value);
    case ExprKind::kBoolLit: return e.bool_value ? "true" : "false";
    case ExprKind::kStrLit: return quote(e.text);
    case ExprKind::kNullLit: return "null";
    case ExprKind::kVar: return e.text;
    case ExprKind::kUnary: return e.text + operand(e.args[0]);
    case ExprKind::kBinary:
      return operand(e.args[0]) + " " + e.text + " " + operand(e.args[1]);
    case ExprKind::kCall: {
      std::string out = e.text + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(e.args[i]);
      }
      return out + ")";
    }
    case ExprKind::kIndex: return operand(e.args[0]) + "[" + to_string(e.args[1]) + "]";
    case ExprKind::kArrayLit: {
      std::string out = "[";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(e.args[i]);
      }
      return out + "]";
    }
    case ExprKind::kBind: return "(" + e.text + " = " + to_string(e.args[0]) + ")";
  }
  return "?";
}

std::string to_string(const Stmt& s, int indent) {
  std::ostringstream os;
  const std::string pad(indent * 2, ' ');
  auto body = [&](const std::vector<Stmt>& b) {
    for (const Stmt& c : b) os << to_string(c, indent + 1);
  };
  switch (s.kind) {
    case StmtKind::kAssign:
      os << pad << s.target << " = " << to_string(*s.value) << ";\n";
      break;
    case StmtKind::kIndexAssign:
      os << pad << s.target << "[" << to_string(*s.index) << "] = " << to_string(*s.value) << ";\n";
      break;
    case StmtKind::kIf:
      os << pad << "if (" << to_string(*s.value) << ") {\n";
      body(s.then_body);
      if (!s.else_body.empty()) {
        os << pad << "} else {\n";
        body(s.else_body);
      }
      os << pad << "}\n";
      break;
    case StmtKind::kWhile:
      os << pad << "while (" << to_string(*s.value) << ") {\n";
      body(s.then_body);
      os << pad << "}\n";
      break;
    case StmtKind::kReturn:
      os << pad << "return";
      if (s.value) os << " " << to_string(*s.value);
      os << ";\n";
      break;
    case StmtKind::kThrow: os << pad << "throw " << to_string(*s.value) << ";\n"; break;
    case StmtKind::kAssert: os << pad << "assert " << to_string(*s.value) << ";\n"; break;
    case StmtKind::kExpr: os << pad << to_string(*s.value) << ";\n"; break;
  }
  return os.str();
}

std::string to_string(const Program& p) {
  std::ostringstream os;
  for (const Method& m : p.methods) {
    os << "method " << m.name << "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
      if (i) os << ", ";
      os << m.params[i];
    }
    os << ") {\n";
    for (const Stmt& s : m.body) os << to_string(s, 1);
    os << "}\n";
  }
  return os.str();
}

}  // namespace vardt::lang
