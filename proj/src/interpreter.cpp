#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include "vardt/profiler.hpp"

namespace vardt::profile {

using lang::Expr;
using lang::ExprKind;
using lang::Method;
using lang::Program;
using lang::Stmt;
using lang::StmtKind;

ObservedValue ObservedValue::numeric(std::int64_t v) {
  ObservedValue o;
  o.kind = Kind::kNumeric;
  o.number = v;
  return o;
}
ObservedValue ObservedValue::boolean(bool b) {
  ObservedValue o;
  o.kind = Kind::kBoolean;
  o.flag = b;
  return o;
}
ObservedValue ObservedValue::null_check(bool is_null) {
  ObservedValue o;
  o.kind = Kind::kNullCheck;
  o.flag = is_null;
  return o;
}
ObservedValue ObservedValue::type_tag(std::string t) {
  ObservedValue o;
  o.kind = Kind::kTypeTag;
  o.text = std::move(t);
  return o;
}
ObservedValue ObservedValue::size(std::int64_t n) {
  ObservedValue o;
  o.kind = Kind::kSize;
  o.number = n;
  return o;
}
ObservedValue ObservedValue::element(std::int64_t i, std::int64_t v) {
  ObservedValue o;
  o.kind = Kind::kElement;
  o.index = i;
  o.number = v;
  return o;
}
ObservedValue ObservedValue::element(std::int64_t i, bool b) {
  ObservedValue o;
  o.kind = Kind::kElement;
  o.index = i;
  o.flag = b;
  o.elem_is_bool = true;
  return o;
}
ObservedValue ObservedValue::nominal(std::string s) {
  ObservedValue o;
  o.kind = Kind::kNominal;
  o.text = std::move(s);
  return o;
}

std::string ObservedValue::to_string() const {
  switch (kind) {
    case Kind::kNumeric:
    case Kind::kSize: return std::to_string(number);
    case Kind::kBoolean:
    case Kind::kNullCheck: return flag ? "true" : "false";
    case Kind::kTypeTag:
    case Kind::kNominal: return text;
    case Kind::kElement: return elem_is_bool ? (flag ? "true" : "false") : std::to_string(number);
  }
  return "?";
}

const char* to_string(ObservedValue::Kind k) {
  using K = ObservedValue::Kind;
  switch (k) {
    case K::kNumeric: return "num";
    case K::kBoolean: return "bool";
    case K::kNullCheck: return "null";
    case K::kTypeTag: return "type";
    case K::kSize: return "size";
    case K::kElement: return "elem";
    case K::kNominal: return "nominal";
  }
  return "?";
}

const char* to_string(Label l) { return l == Label::kPass ? "PASS" : "FAIL"; }

namespace {

struct Value {
  enum class Type { kNull, kInt, kBool, kStr, kArr } type = Type::kNull;
  std::int64_t i = 0;
  bool b = false;
  std::string s;
  std::vector<Value> arr;

  static Value integer(std::int64_t v) {
    Value x;
    x.type = Type::kInt;
    x.i = v;
    return x;
  }
  static Value boolean(bool v) {
    Value x;
    x.type = Type::kBool;
    x.b = v;
    return x;
  }
  static Value str(std::string v) {
    Value x;
    x.type = Type::kStr;
    x.s = std::move(v);
    return x;
  }
};

const char* type_name(const Value& v) {
  switch (v.type) {
    case Value::Type::kNull: return "null";
    case Value::Type::kInt: return "int";
    case Value::Type::kBool: return "bool";
    case Value::Type::kStr: return "string";
    case Value::Type::kArr: return "array";
  }
  return "?";
}

std::string display(const Value& v, bool nested = false) {
  switch (v.type) {
    case Value::Type::kNull: return "null";
    case Value::Type::kInt: return std::to_string(v.i);
    case Value::Type::kBool: return v.b ? "true" : "false";
    case Value::Type::kStr: return nested ? "\"" + v.s + "\"" : v.s;
    case Value::Type::kArr: {
      std::string out = "[";
      for (std::size_t k = 0; k < v.arr.size(); ++k) {
        if (k) out += ", ";
        out += display(v.arr[k], true);
      }
      return out + "]";
    }
  }
  return "?";
}

bool equal(const Value& a, const Value& b) {
  if (a.type != b.type) return false;
  switch (a.type) {
    case Value::Type::kNull: return true;
    case Value::Type::kInt: return a.i == b.i;
    case Value::Type::kBool: return a.b == b.b;
    case Value::Type::kStr: return a.s == b.s;
    case Value::Type::kArr:
      return a.arr.size() == b.arr.size() &&
             std::equal(a.arr.begin(), a.arr.end(), b.arr.begin(), [](auto& x, auto& y) { return equal(x, y); });
  }
  return false;
}

std::int64_t wrap_add(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) + static_cast<std::uint64_t>(b));
}
std::int64_t wrap_sub(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b));
}
std::int64_t wrap_mul(std::int64_t a, std::int64_t b) {
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b));
}

// Thrown MiniLang error (runtime error, `throw`, or failed assertion).
struct ScriptError {
  std::string message;
};
struct BudgetExhausted {};

struct Frame {
  std::map<std::string, Value> vars;
  const Method* method = nullptr;  // null for test bodies
  int line = 0;
};

enum class Flow { kNormal, kReturn };

class Interpreter {
 public:
  Interpreter(const Program& p, const RunOptions& opts, TestRunTrace* trace)
      : program_(p), opts_(opts), trace_(trace) {}

  void run_test_body(const std::vector<Stmt>& body) {
    Frame f;
    Value ret;
    exec_block(body, f, ret);
  }

  Value call(const Method& m, std::vector<Value> args) {
    if (args.size() != m.params.size()) {
      fail("method '" + m.name + "' expects " + std::to_string(m.params.size()) + " arguments");
    }
    if (++depth_ > 200) fail("stack overflow");
    Frame f;
    f.method = &m;
    f.line = m.line;
    for (std::size_t k = 0; k < args.size(); ++k) f.vars[m.params[k]] = std::move(args[k]);
    Value ret;
    exec_block(m.body, f, ret);
    --depth_;
    return ret;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ScriptError{msg}; }

 private:
  void step() {
    if (++steps_ > opts_.step_budget) throw BudgetExhausted{};
  }

  bool recording(const Frame& f) const {
    if (!trace_ || !opts_.record || !f.method) return false;
    if (!opts_.tracked) return true;
    return opts_.tracked->count({f.method->name, f.line}) > 0;
  }

  void push(const VarOccurrence& occ, ObservedValue v) {
    trace_->observations.push_back(VariableObservation{occ, trace_->test_id, seq_++, std::move(v)});
  }

  void record(const Frame& f, const std::string& name, OccKind kind, const Value& v) {
    if (!recording(f)) return;
    VarOccurrence occ{f.method->name, name, f.line, kind, ""};
    switch (v.type) {
      case Value::Type::kInt: push(occ, ObservedValue::numeric(v.i)); break;
      case Value::Type::kBool: push(occ, ObservedValue::boolean(v.b)); break;
      case Value::Type::kNull:
        push(occ, ObservedValue::nominal("null"));
        push(occ.with_feature("null"), ObservedValue::null_check(true));
        push(occ.with_feature("type"), ObservedValue::type_tag("null"));
        break;
      case Value::Type::kStr:
        push(occ, ObservedValue::nominal(v.s));
        push(occ.with_feature("null"), ObservedValue::null_check(false));
        push(occ.with_feature("type"), ObservedValue::type_tag("string"));
        push(occ.with_feature("length"), ObservedValue::size(static_cast<std::int64_t>(v.s.size())));
        break;
      case Value::Type::kArr: {
        push(occ, ObservedValue::nominal(display(v)));
        push(occ.with_feature("null"), ObservedValue::null_check(false));
        push(occ.with_feature("type"), ObservedValue::type_tag("array"));
        push(occ.with_feature("length"), ObservedValue::size(static_cast<std::int64_t>(v.arr.size())));
        const std::size_t n = std::min<std::size_t>(v.arr.size(), static_cast<std::size_t>(opts_.max_elements));
        for (std::size_t k = 0; k < n; ++k) {
          const Value& e = v.arr[k];
          const auto idx = static_cast<std::int64_t>(k);
          auto efeat = occ.with_feature("[" + std::to_string(k) + "]");
          if (e.type == Value::Type::kInt) push(efeat, ObservedValue::element(idx, e.i));
          if (e.type == Value::Type::kBool) push(efeat, ObservedValue::element(idx, e.b));
        }
        break;
      }
    }
  }

  void enter(Frame& f, int line) {
    step();
    f.line = line;
    if (trace_ && f.method) trace_->per_method[f.method->name].push_back(line);
  }

  bool truthy(const Value& v, const char* what) {
    if (v.type != Value::Type::kBool) fail(std::string(what) + " must be bool, got " + type_name(v));
    return v.b;
  }

  Flow exec_block(const std::vector<Stmt>& body, Frame& f, Value& ret) {
    for (const Stmt& s : body) {
      if (exec(s, f, ret) == Flow::kReturn) return Flow::kReturn;
    }
    return Flow::kNormal;
  }

  Flow exec(const Stmt& s, Frame& f, Value& ret) {
    enter(f, s.line);
    switch (s.kind) {
      case StmtKind::kAssign: {
        Value v = eval(*s.value, f);
        f.line = s.line;
        record(f, s.target, OccKind::kProgramVariable, v);
        f.vars[s.target] = std::move(v);
        return Flow::kNormal;
      }
      case StmtKind::kIndexAssign: {
        auto it = f.vars.find(s.target);
        if (it == f.vars.end()) fail("undefined variable '" + s.target + "'");
        record(f, s.target, OccKind::kProgramVariable, it->second);
        Value idx = eval(*s.index, f);
        Value v = eval(*s.value, f);
        f.line = s.line;
        Value& arr = f.vars[s.target];
        if (arr.type != Value::Type::kArr) fail("indexing non-array " + std::string(type_name(arr)));
        if (idx.type != Value::Type::kInt) fail("array index must be int");
        if (idx.i < 0 || idx.i >= static_cast<std::int64_t>(arr.arr.size())) {
          fail("ArrayIndexOutOfBounds: index " + std::to_string(idx.i) + ", length " +
               std::to_string(arr.arr.size()));
        }
        arr.arr[static_cast<std::size_t>(idx.i)] = std::move(v);
        record(f, s.target, OccKind::kProgramVariable, arr);
        return Flow::kNormal;
      }
      case StmtKind::kIf: {
        const bool c = truthy(eval(*s.value, f), "if condition");
        if (c) return exec_block(s.then_body, f, ret);
        return exec_block(s.else_body, f, ret);
      }
      case StmtKind::kWhile: {
        while (truthy(eval(*s.value, f), "while condition")) {
          if (exec_block(s.then_body, f, ret) == Flow::kReturn) return Flow::kReturn;
          enter(f, s.line);
        }
        return Flow::kNormal;
      }
      case StmtKind::kReturn:
        ret = s.value ? eval(*s.value, f) : Value{};
        return Flow::kReturn;
      case StmtKind::kThrow: {
        Value v = eval(*s.value, f);
        fail("thrown: " + display(v));
      }
      case StmtKind::kAssert: {
        Value v = eval(*s.value, f);
        if (!truthy(v, "assertion")) fail("assertion failed at line " + std::to_string(s.line));
        return Flow::kNormal;
      }
      case StmtKind::kExpr:
        eval(*s.value, f);
        return Flow::kNormal;
    }
    return Flow::kNormal;
  }

  std::int64_t as_int(const Value& v, const char* what) {
    if (v.type != Value::Type::kInt) fail(std::string(what) + " expects int, got " + type_name(v));
    return v.i;
  }

  const std::string& as_str(const Value& v, const char* what) {
    if (v.type == Value::Type::kNull) fail(std::string("NullPointer: ") + what + " on null");
    if (v.type != Value::Type::kStr) fail(std::string(what) + " expects string, got " + type_name(v));
    return v.s;
  }

  Value builtin(const std::string& name, std::vector<Value>& a, bool& found) {
    found = true;
    auto arity = [&](std::size_t n) {
      if (a.size() != n) fail(name + " expects " + std::to_string(n) + " arguments");
    };
    if (name == "length") {
      arity(1);
      if (a[0].type == Value::Type::kArr) return Value::integer(static_cast<std::int64_t>(a[0].arr.size()));
      return Value::integer(static_cast<std::int64_t>(as_str(a[0], "length").size()));
    }
    if (name == "charAt") {
      arity(2);
      const std::string& s = as_str(a[0], "charAt");
      const std::int64_t i = as_int(a[1], "charAt");
      if (i < 0 || i >= static_cast<std::int64_t>(s.size())) {
        fail("StringIndexOutOfBounds: index " + std::to_string(i) + ", length " + std::to_string(s.size()));
      }
      return Value::integer(static_cast<unsigned char>(s[static_cast<std::size_t>(i)]));
    }
    if (name == "indexOf") {
      arity(2);
      const std::string& s = as_str(a[0], "indexOf");
      std::string needle;
      if (a[1].type == Value::Type::kInt) {
        needle = std::string(1, static_cast<char>(a[1].i));
      } else {
        needle = as_str(a[1], "indexOf");
      }
      const auto pos = s.find(needle);
      return Value::integer(pos == std::string::npos ? -1 : static_cast<std::int64_t>(pos));
    }
    if (name == "substring") {
      if (a.size() != 2 && a.size() != 3) fail("substring expects 2 or 3 arguments");
      const std::string& s = as_str(a[0], "substring");
      const auto len = static_cast<std::int64_t>(s.size());
      const std::int64_t b = as_int(a[1], "substring");
      const std::int64_t e = a.size() == 3 ? as_int(a[2], "substring") : len;
      if (b < 0 || e > len || b > e) {
        fail("StringIndexOutOfBounds: begin " + std::to_string(b) + ", end " + std::to_string(e) + ", length " +
             std::to_string(len));
      }
      return Value::str(s.substr(static_cast<std::size_t>(b), static_cast<std::size_t>(e - b)));
    }
    if (name == "array") {
      arity(1);
      const std::int64_t n = as_int(a[0], "array");
      if (n < 0 || n > 100000) fail("NegativeArraySize: " + std::to_string(n));
      Value v;
      v.type = Value::Type::kArr;
      v.arr.assign(static_cast<std::size_t>(n), Value::integer(0));
      return v;
    }
    if (name == "abs") {
      arity(1);
      const std::int64_t x = as_int(a[0], "abs");
      return Value::integer(x < 0 ? wrap_sub(0, x) : x);
    }
    if (name == "min" || name == "max") {
      arity(2);
      const std::int64_t x = as_int(a[0], name.c_str());
      const std::int64_t y = as_int(a[1], name.c_str());
      return Value::integer(name == "min" ? std::min(x, y) : std::max(x, y));
    }
    found = false;
    return {};
  }

  Value eval(const Expr& e, Frame& f) {
    step();
    switch (e.kind) {
      case ExprKind::kIntLit: return Value::integer(e.int_value);
      case ExprKind::kBoolLit: return Value::boolean(e.bool_value);
      case ExprKind::kStrLit: return Value::str(e.text);
      case ExprKind::kNullLit: return Value{};
      case ExprKind::kVar: {
        auto it = f.vars.find(e.text);
        if (it == f.vars.end()) fail("undefined variable '" + e.text + "'");
        record(f, e.text, OccKind::kProgramVariable, it->second);
        return it->second;
      }
      case ExprKind::kBind: {
        Value v = eval(e.args[0], f);
        record(f, e.text,
               e.temp_kind == lang::TempKind::kCondition ? OccKind::kTempCondition : OccKind::kTempReturnArg, v);
        return v;
      }
      case ExprKind::kUnary: {
        Value v = eval(e.args[0], f);
        if (e.text == "!") return Value::boolean(!truthy(v, "operand of '!'"));
        return Value::integer(wrap_sub(0, as_int(v, "unary '-'")));
      }
      case ExprKind::kBinary: return binary(e, f);
      case ExprKind::kIndex: {
        Value base = eval(e.args[0], f);
        Value idx = eval(e.args[1], f);
        const std::int64_t i = as_int(idx, "index");
        if (base.type == Value::Type::kStr) {
          if (i < 0 || i >= static_cast<std::int64_t>(base.s.size())) {
            fail("StringIndexOutOfBounds: index " + std::to_string(i) + ", length " + std::to_string(base.s.size()));
          }
          return Value::integer(static_cast<unsigned char>(base.s[static_cast<std::size_t>(i)]));
        }
        if (base.type == Value::Type::kNull) fail("NullPointer: index on null");
        if (base.type != Value::Type::kArr) fail(std::string("indexing non-array ") + type_name(base));
        if (i < 0 || i >= static_cast<std::int64_t>(base.arr.size())) {
          fail("ArrayIndexOutOfBounds: index " + std::to_string(i) + ", length " + std::to_string(base.arr.size()));
        }
        return base.arr[static_cast<std::size_t>(i)];
      }
      case ExprKind::kArrayLit: {
        Value v;
        v.type = Value::Type::kArr;
        for (const Expr& a : e.args) v.arr.push_back(eval(a, f));
        return v;
      }
      case ExprKind::kCall: {
        std::vector<Value> args;
        args.reserve(e.args.size());
        for (const Expr& a : e.args) args.push_back(eval(a, f));
        bool found = false;
        Value r = builtin(e.text, args, found);
        if (found) return r;
        const Method* m = program_.find(e.text);
        if (!m) fail("unknown method '" + e.text + "'");
        const int line = f.line;
        Value out = call(*m, std::move(args));
        f.line = line;
        return out;
      }
    }
    return {};
  }

  Value binary(const Expr& e, Frame& f) {
    const std::string& op = e.text;
    if (op == "&&" || op == "||") {
      const bool l = truthy(eval(e.args[0], f), "operand of logical operator");
      if (op == "&&" && !l) return Value::boolean(false);
      if (op == "||" && l) return Value::boolean(true);
      return Value::boolean(truthy(eval(e.args[1], f), "operand of logical operator"));
    }
    Value l = eval(e.args[0], f);
    Value r = eval(e.args[1], f);
    if (op == "==") return Value::boolean(equal(l, r));
    if (op == "!=") return Value::boolean(!equal(l, r));
    if (op == "+") {
      if (l.type == Value::Type::kStr || r.type == Value::Type::kStr) return Value::str(display(l) + display(r));
      return Value::integer(wrap_add(as_int(l, "'+'"), as_int(r, "'+'")));
    }
    if (op == "<" || op == "<=" || op == ">" || op == ">=") {
      int cmp = 0;
      if (l.type == Value::Type::kStr && r.type == Value::Type::kStr) {
        cmp = l.s.compare(r.s);
      } else {
        const std::int64_t a = as_int(l, "comparison");
        const std::int64_t b = as_int(r, "comparison");
        cmp = a < b ? -1 : (a > b ? 1 : 0);
      }
      if (op == "<") return Value::boolean(cmp < 0);
      if (op == "<=") return Value::boolean(cmp <= 0);
      if (op == ">") return Value::boolean(cmp > 0);
      return Value::boolean(cmp >= 0);
    }
    const std::int64_t a = as_int(l, op.c_str());
    const std::int64_t b = as_int(r, op.c_str());
    if (op == "-") return Value::integer(wrap_sub(a, b));
    if (op == "*") return Value::integer(wrap_mul(a, b));
    if (b == 0) fail("ArithmeticException: division by zero");
    if (a == INT64_MIN && b == -1) return Value::integer(op == "/" ? a : 0);
    if (op == "/") return Value::integer(a / b);
    return Value::integer(a % b);
  }

  const Program& program_;
  const RunOptions& opts_;
  TestRunTrace* trace_;
  std::int64_t steps_ = 0;
  std::int64_t seq_ = 0;
  int depth_ = 0;
};

void finish_failure(TestRunTrace& t) {
  t.label = Label::kFail;
  for (const auto& [m, lines] : t.per_method) {
    if (!lines.empty()) t.failure_site[m] = lines.back();
  }
}

}  // namespace

TestRunTrace run_test(const Program& p, const lang::TestCase& t, const RunOptions& opts) {
  TestRunTrace trace;
  trace.test_id = t.id;
  Interpreter in(p, opts, &trace);
  try {
    in.run_test_body(t.body);
  } catch (const ScriptError& e) {
    trace.error = e.message;
    finish_failure(trace);
  } catch (const BudgetExhausted&) {
    trace.error = "step budget exhausted";
    trace.budget_exhausted = true;
    finish_failure(trace);
  }
  return trace;
}

std::vector<TestRunTrace> run_suite(const Program& p, const std::vector<lang::TestCase>& suite,
                                    const RunOptions& opts, int jobs) {
  std::set<std::string> ids;
  for (const auto& t : suite) {
    if (!ids.insert(t.id).second) throw SuiteError("duplicate test id '" + t.id + "'");
  }
  std::vector<TestRunTrace> out(suite.size());
  if (jobs <= 1 || suite.size() <= 1) {
    for (std::size_t k = 0; k < suite.size(); ++k) out[k] = run_test(p, suite[k], opts);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int n = std::min<int>(jobs, static_cast<int>(suite.size()));
  for (int w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (std::size_t k = next++; k < suite.size(); k = next++) out[k] = run_test(p, suite[k], opts);
    });
  }
  for (auto& w : workers) w.join();
  return out;
}

std::map<VarOccurrence, std::map<std::string, ObservedValue>> last_value_table(
    const std::vector<TestRunTrace>& traces, const std::string& method) {
  std::map<VarOccurrence, std::map<std::string, ObservedValue>> table;
  for (const TestRunTrace& t : traces) {
    for (const VariableObservation& o : t.observations) {
      if (o.occurrence.method != method) continue;
      // Observations are appended in sequence order, so the last write wins.
      table[o.occurrence][t.test_id] = o.value;
    }
  }
  return table;
}

namespace {

Value to_value(const Arg& a) {
  switch (a.kind) {
    case Arg::Kind::kNull: return Value{};
    case Arg::Kind::kInt: return Value::integer(a.i);
    case Arg::Kind::kBool: return Value::boolean(a.b);
    case Arg::Kind::kStr: return Value::str(a.s);
    case Arg::Kind::kIntArray: {
      Value v;
      v.type = Value::Type::kArr;
      for (std::int64_t x : a.arr) v.arr.push_back(Value::integer(x));
      return v;
    }
  }
  return {};
}

}  // namespace

CallOutcome call_method(const Program& p, const std::string& method, const std::vector<Arg>& args,
                        std::int64_t step_budget) {
  RunOptions opts;
  opts.step_budget = step_budget;
  opts.record = false;
  CallOutcome out;
  const Method* m = p.find(method);
  if (!m) {
    out.ok = false;
    out.error = "unknown method '" + method + "'";
    return out;
  }
  Interpreter in(p, opts, nullptr);
  std::vector<Value> vals;
  for (const Arg& a : args) vals.push_back(to_value(a));
  try {
    out.value = display(in.call(*m, std::move(vals)), true);
  } catch (const ScriptError& e) {
    out.ok = false;
    out.error = e.message;
  } catch (const BudgetExhausted&) {
    out.ok = false;
    out.error = "step budget exhausted";
  }
  return out;
}

}  // namespace vardt::profile
