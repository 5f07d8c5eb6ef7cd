#include "dbtalk/errors.hpp"

#include <sstream>

namespace dbtalk {

namespace {

std::string syntax_message(std::size_t position, const std::string& found,
                           const std::vector<std::string>& expected) {
  std::ostringstream out;
  out << "syntax error at token " << position << ": found " << (found.empty() ? "<end>" : "'" + found + "'");
  if (!expected.empty()) {
    out << ", expected ";
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i) out << (i + 1 == expected.size() ? " or " : ", ");
      out << "'" << expected[i] << "'";
    }
  }
  return out.str();
}

const char* runtime_kind_name(RuntimeError::Kind kind) {
  switch (kind) {
    case RuntimeError::Kind::lookup_not_found: return "lookup not found";
    case RuntimeError::Kind::lookup_ambiguous: return "lookup ambiguous";
    case RuntimeError::Kind::division_by_zero: return "division by zero";
    case RuntimeError::Kind::missing_context: return "missing context";
    case RuntimeError::Kind::unbound_placeholder: return "unbound placeholder";
  }
  return "runtime error";
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position_, std::string found_,
                         std::vector<std::string> expected_)
    : Error(syntax_message(position_, found_, expected_)),
      position(position_),
      found(std::move(found_)),
      expected(std::move(expected_)) {}

TypeError::TypeError(std::string path_, const std::string& message)
    : Error("type error at " + (path_.empty() ? std::string("/") : path_) + ": " + message),
      path(std::move(path_)) {}

RuntimeError::RuntimeError(Kind kind_, const std::string& message)
    : Error(std::string(runtime_kind_name(kind_)) + ": " + message), kind(kind_) {}

}  // namespace dbtalk
