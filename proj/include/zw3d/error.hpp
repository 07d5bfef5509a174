#pragma once

#include <stdexcept>
#include <string>

namespace zw3d {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_argument,
  duplicate_id,
  io,
  shape,
  unknown_id,
  corrupt,
  degenerate,
  closed,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace zw3d
