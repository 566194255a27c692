#include "vardt/parser.hpp"

#include <cctype>
#include <set>
#include <unordered_set>

namespace vardt::lang {
namespace {

enum class Tok { kIdent, kInt, kString, kPunct, kEnd };

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;
  std::int64_t value = 0;
  int line = 0;
  int column = 0;
};

const std::unordered_set<std::string> kKeywords = {
    "method", "test", "if", "else", "while", "return", "throw", "assert", "true", "false", "null"};

std::vector<Token> lex(std::string_view src, int first_line) {
  std::vector<Token> out;
  int line = first_line;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&]() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  };
  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      const int l0 = line, c0 = col;
      advance();
      advance();
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/')) advance();
      if (i + 1 >= src.size()) throw ParseError("unterminated comment", l0, c0);
      advance();
      advance();
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string word;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        word += src[i];
        advance();
      }
      t.kind = Tok::kIdent;
      t.text = std::move(word);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string digits;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        digits += src[i];
        advance();
      }
      t.kind = Tok::kInt;
      t.text = digits;
      try {
        t.value = std::stoll(digits);
      } catch (const std::out_of_range&) {
        throw ParseError("integer literal out of range", t.line, t.column);
      }
    } else if (c == '"') {
      advance();
      std::string s;
      while (true) {
        if (i >= src.size() || src[i] == '\n') throw ParseError("unterminated string", t.line, t.column);
        if (src[i] == '"') {
          advance();
          break;
        }
        if (src[i] == '\\') {
          advance();
          if (i >= src.size()) throw ParseError("unterminated string", t.line, t.column);
          switch (src[i]) {
            case 'n': s += '\n'; break;
            case 't': s += '\t'; break;
            case '\\': s += '\\'; break;
            case '"': s += '"'; break;
            default: throw ParseError("bad escape sequence", line, col);
          }
          advance();
          continue;
        }
        s += src[i];
        advance();
      }
      t.kind = Tok::kString;
      t.text = std::move(s);
    } else {
      static const char* two[] = {"==", "!=", "<=", ">=", "&&", "||"};
      std::string op(1, c);
      if (i + 1 < src.size()) {
        const std::string pair{c, src[i + 1]};
        for (const char* p : two) {
          if (pair == p) op = pair;
        }
      }
      static const std::string singles = "(){}[];,=<>+-*/%!";
      if (op.size() == 1 && singles.find(c) == std::string::npos) {
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      for (std::size_t k = 0; k < op.size(); ++k) advance();
      t.kind = Tok::kPunct;
      t.text = op;
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Tok::kEnd;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  bool at_end() const { return peek().kind == Tok::kEnd; }

  Program program() {
    Program p;
    std::set<std::string> names;
    if (at_end()) throw ParseError("empty program", 0, 0);
    while (!at_end()) {
      const Token& kw = peek();
      if (!is_word("method")) throw error("expected 'method'");
      Method m = method();
      if (!names.insert(m.name).second) {
        throw ParseError("duplicate method name '" + m.name + "'", kw.line, kw.column);
      }
      p.methods.push_back(std::move(m));
    }
    return p;
  }

  std::vector<TestCase> suite() {
    std::vector<TestCase> out;
    std::set<std::string> ids;
    while (!at_end()) {
      const Token kw = peek();
      if (!is_word("test")) throw error("expected 'test'");
      next();
      TestCase t;
      t.line = kw.line;
      t.id = ident("test id");
      if (!ids.insert(t.id).second) {
        throw ParseError("duplicate test id '" + t.id + "'", kw.line, kw.column);
      }
      t.body = block(nullptr);
      out.push_back(std::move(t));
    }
    return out;
  }

  std::vector<Stmt> statements() {
    std::vector<Stmt> out;
    while (!at_end()) out.push_back(statement());
    return out;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[k];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is_punct(const char* p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kPunct && peek(ahead).text == p;
  }
  bool is_word(const char* w) const { return peek().kind == Tok::kIdent && peek().text == w; }

  ParseError error(const std::string& msg) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::kEnd ? "end of input" : "'" + t.text + "'";
    return ParseError(msg + ", found " + found, t.line, t.column);
  }

  void expect(const char* p) {
    if (!is_punct(p)) throw error(std::string("expected '") + p + "'");
    next();
  }

  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::kIdent || kKeywords.count(t.text)) throw error(std::string("expected ") + what);
    return next().text;
  }

  Method method() {
    Method m;
    m.line = next().line;  // 'method'
    m.name = ident("method name");
    expect("(");
    if (!is_punct(")")) {
      std::set<std::string> seen;
      do {
        const Token& pt = peek();
        std::string p = ident("parameter name");
        if (!seen.insert(p).second) throw ParseError("duplicate parameter '" + p + "'", pt.line, pt.column);
        m.params.push_back(std::move(p));
      } while (is_punct(",") && (next(), true));
    }
    expect(")");
    m.body = block(&m.end_line);
    return m;
  }

  std::vector<Stmt> block(int* close_line) {
    expect("{");
    std::vector<Stmt> body;
    while (!is_punct("}")) {
      if (at_end()) throw error("expected '}'");
      body.push_back(statement());
    }
    if (close_line) *close_line = peek().line;
    next();
    return body;
  }

  Stmt statement() {
    const Token& t = peek();
    Stmt s;
    s.line = t.line;
    if (is_word("if")) {
      next();
      s.kind = StmtKind::kIf;
      expect("(");
      s.value = expr();
      expect(")");
      s.then_body = block(nullptr);
      if (is_word("else")) {
        next();
        if (is_word("if")) {
          s.else_body.push_back(statement());
        } else {
          s.else_body = block(nullptr);
        }
      }
      return s;
    }
    if (is_word("while")) {
      next();
      s.kind = StmtKind::kWhile;
      expect("(");
      s.value = expr();
      expect(")");
      s.then_body = block(nullptr);
      return s;
    }
    if (is_word("return")) {
      next();
      s.kind = StmtKind::kReturn;
      if (!is_punct(";")) s.value = expr();
      expect(";");
      return s;
    }
    if (is_word("throw")) {
      next();
      s.kind = StmtKind::kThrow;
      s.value = expr();
      expect(";");
      return s;
    }
    if (is_word("assert")) {
      next();
      s.kind = StmtKind::kAssert;
      s.value = expr();
      expect(";");
      return s;
    }
    if (t.kind == Tok::kIdent && !kKeywords.count(t.text)) {
      if (is_punct("=", 1)) {
        s.kind = StmtKind::kAssign;
        s.target = next().text;
        next();
        s.value = expr();
        expect(";");
        return s;
      }
      if (is_punct("[", 1)) {
        // Either `a[i] = v;` or an expression statement starting with an index.
        const std::size_t save = pos_;
        std::string name = next().text;
        next();
        Expr index = expr();
        if (is_punct("]") && is_punct("=", 1)) {
          next();
          next();
          s.kind = StmtKind::kIndexAssign;
          s.target = std::move(name);
          s.index = std::move(index);
          s.value = expr();
          expect(";");
          return s;
        }
        pos_ = save;
      }
    }
    s.kind = StmtKind::kExpr;
    s.value = expr();
    if (s.value->kind != ExprKind::kCall) {
      throw ParseError("expression statement must be a call", t.line, t.column);
    }
    expect(";");
    return s;
  }

  Expr make(ExprKind k, const Token& at) {
    Expr e;
    e.kind = k;
    e.line = at.line;
    e.column = at.column;
    return e;
  }

  Expr binary(ExprKind, const Token& at, std::string op, Expr l, Expr r) {
    Expr e = make(ExprKind::kBinary, at);
    e.text = std::move(op);
    e.args.push_back(std::move(l));
    e.args.push_back(std::move(r));
    return e;
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr l = and_expr();
    while (is_punct("||")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, "||", std::move(l), and_expr());
    }
    return l;
  }
  Expr and_expr() {
    Expr l = eq_expr();
    while (is_punct("&&")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, "&&", std::move(l), eq_expr());
    }
    return l;
  }
  Expr eq_expr() {
    Expr l = rel_expr();
    while (is_punct("==") || is_punct("!=")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, at.text, std::move(l), rel_expr());
    }
    return l;
  }
  Expr rel_expr() {
    Expr l = add_expr();
    while (is_punct("<") || is_punct("<=") || is_punct(">") || is_punct(">=")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, at.text, std::move(l), add_expr());
    }
    return l;
  }
  Expr add_expr() {
    Expr l = mul_expr();
    while (is_punct("+") || is_punct("-")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, at.text, std::move(l), mul_expr());
    }
    return l;
  }
  Expr mul_expr() {
    Expr l = unary();
    while (is_punct("*") || is_punct("/") || is_punct("%")) {
      const Token at = next();
      l = binary(ExprKind::kBinary, at, at.text, std::move(l), unary());
    }
    return l;
  }
  Expr unary() {
    if (is_punct("!") || is_punct("-")) {
      const Token at = next();
      // Negative integer literals fold into a single atomic literal.
      if (at.text == "-" && peek().kind == Tok::kInt) {
        const Token& lit = next();
        Expr e = make(ExprKind::kIntLit, at);
        e.int_value = -lit.value;
        return postfix(std::move(e));
      }
      Expr e = make(ExprKind::kUnary, at);
      e.text = at.text;
      e.args.push_back(unary());
      return e;
    }
    return postfix(primary());
  }
  Expr postfix(Expr base) {
    while (is_punct("[")) {
      const Token at = next();
      Expr e = make(ExprKind::kIndex, at);
      e.args.push_back(std::move(base));
      e.args.push_back(expr());
      expect("]");
      base = std::move(e);
    }
    return base;
  }
  Expr primary() {
    const Token& t = peek();
    if (t.kind == Tok::kInt) {
      Expr e = make(ExprKind::kIntLit, t);
      e.int_value = next().value;
      return e;
    }
    if (t.kind == Tok::kString) {
      Expr e = make(ExprKind::kStrLit, t);
      e.text = next().text;
      return e;
    }
    if (is_word("true") || is_word("false")) {
      Expr e = make(ExprKind::kBoolLit, t);
      e.bool_value = next().text == "true";
      return e;
    }
    if (is_word("null")) {
      Expr e = make(ExprKind::kNullLit, t);
      next();
      return e;
    }
    if (is_punct("(")) {
      next();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (is_punct("[")) {
      Expr e = make(ExprKind::kArrayLit, t);
      next();
      if (!is_punct("]")) {
        do {
          e.args.push_back(expr());
        } while (is_punct(",") && (next(), true));
      }
      expect("]");
      return e;
    }
    if (t.kind == Tok::kIdent && !kKeywords.count(t.text)) {
      const Token at = next();
      if (is_punct("(")) {
        next();
        Expr e = make(ExprKind::kCall, at);
        e.text = at.text;
        if (!is_punct(")")) {
          do {
            e.args.push_back(expr());
          } while (is_punct(",") && (next(), true));
        }
        expect(")");
        return e;
      }
      Expr e = make(ExprKind::kVar, at);
      e.text = at.text;
      return e;
    }
    throw error("expected expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

Program parse(std::string_view source) {
  Parser p(lex(source, 1));
  return p.program();
}

std::vector<TestCase> parse_suite(std::string_view source) {
  Parser p(lex(source, 1));
  return p.suite();
}

std::vector<Stmt> parse_statements(std::string_view source, int first_line) {
  Parser p(lex(source, first_line));
  return p.statements();
}

}  // namespace vardt::lang
