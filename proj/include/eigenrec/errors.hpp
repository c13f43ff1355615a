#pragma once

#include <stdexcept>
#include <string>

namespace eigenrec {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  invalid_input,
  resource_limit,
  parse,
  integrity,
  numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

struct ResourceLimit : Error {
  explicit ResourceLimit(const std::string& what) : Error(ErrorKind::resource_limit, what) {}
};

/// Malformed file content. Carries an optional 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& what, long line = 0);
  long line;
};

struct IntegrityError : Error {
  explicit IntegrityError(const std::string& what) : Error(ErrorKind::integrity, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

const char* to_string(ErrorKind kind);

}  // namespace eigenrec
