#pragma once

#include <stdexcept>
#include <string>

namespace apfive {

enum class ErrorKind {
  Argument,     // malformed input to a pure function
  Data,         // malformed or incomplete data file / response
  IO,           // network or filesystem failure (retriable)
  NotFound,     // unknown label / level
  Precondition, // hypothesis of a construction does not hold
  Unsupported,  // case outside the encoded tables
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) { throw Error(kind, msg); }

// internal consistency check; violations are bugs, not input errors
#define APFIVE_ASSERT(cond, msg)                                                     \
  do {                                                                               \
    if (!(cond)) throw std::logic_error(std::string("internal assertion: ") + (msg)); \
  } while (0)

}  // namespace apfive
