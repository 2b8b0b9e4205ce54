#pragma once

#include <stdexcept>
#include <string>

namespace epimu {

// Malformed user input: files, formulas, models, bad preconditions on CLI data.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Syntax errors carry a position (1-based line/column).
class parse_error : public input_error {
public:
  parse_error(const std::string& msg, int line, int col)
      : input_error(msg + " at " + std::to_string(line) + ":" + std::to_string(col)),
        line(line), col(col) {}
  int line;
  int col;
};

// A configured resource cap was exceeded (state budget, node budget, fuel).
class budget_error : public std::runtime_error {
public:
  explicit budget_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant failure. Raised when a constructed object fails its own
// consistency checks; always a bug, never a user error.
class internal_error : public std::logic_error {
public:
  explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace epimu
