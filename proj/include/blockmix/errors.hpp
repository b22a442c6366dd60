#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blockmix {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input text; carries the 1-based line number when known.
struct ParseError : Error {
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

struct UnsupportedError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace blockmix
