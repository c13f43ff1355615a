#include "eigenrec/errors.hpp"

namespace eigenrec {

namespace {
std::string with_line(const std::string& what, long line) {
  if (line <= 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}
}  // namespace

ParseError::ParseError(const std::string& what, long line_no)
    : Error(ErrorKind::parse, with_line(what, line_no)), line(line_no) {}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::resource_limit: return "resource limit";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::integrity: return "integrity error";
    case ErrorKind::numeric: return "numeric failure";
  }
  return "error";
}

}  // namespace eigenrec
