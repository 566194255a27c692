#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vardt/ast.hpp"

namespace vardt::lang {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(format(message, line, column)),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& m, int line, int column) {
    if (line <= 0) return m;
    return std::to_string(line) + ":" + std::to_string(column) + ": " + m;
  }

  std::string message_;
  int line_;
  int column_;
};

// Parses a MiniLang program (a sequence of `method` declarations).
Program parse(std::string_view source);

// Parses a test suite: a sequence of `test <id> { ... }` blocks.
// Duplicate ids are rejected.
std::vector<TestCase> parse_suite(std::string_view source);

// Parses a bare statement list, used for patch hunks.
std::vector<Stmt> parse_statements(std::string_view source, int first_line = 1);

}  // namespace vardt::lang
