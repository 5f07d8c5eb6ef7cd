#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dbtalk {

/// Base class of every error raised by the toolkit.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed surface syntax. `position` is the index of the offending token.
struct SyntaxError : Error {
  SyntaxError(std::size_t position, std::string found, std::vector<std::string> expected);

  std::size_t position;
  std::string found;
  std::vector<std::string> expected;
};

/// Static type violation. `path` names the first violating node in pre-order,
/// as a slash-separated chain of child labels from the query root.
struct TypeError : Error {
  TypeError(std::string path, const std::string& message);

  std::string path;
};

/// Failure while executing a well-typed query.
struct RuntimeError : Error {
  enum class Kind {
    lookup_not_found,
    lookup_ambiguous,
    division_by_zero,
    missing_context,
    unbound_placeholder,
  };

  RuntimeError(Kind kind, const std::string& message);

  Kind kind;
};

/// Bad pipeline, template, or command-line configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace dbtalk
