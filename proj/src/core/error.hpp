#pragma once

#include <stdexcept>
#include <string>

namespace sdt {

// Categories double as CLI exit codes (see tools/sdt_cli.cpp).
enum class ErrorKind {
  invalid_argument = 1,
  config = 2,
  numerical = 3,
  infeasible = 4,
  io = 5,
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

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::invalid_argument, what);
}

}  // namespace sdt
