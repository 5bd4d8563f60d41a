#pragma once

#include <stdexcept>
#include <string>

namespace agglom {

// Error categories map onto the CLI exit codes (1/2/3).
enum class ErrorKind {
  Input,       // bad files, bad flags, violated preconditions on inputs
  Numeric,     // a numerical routine failed to produce a usable result
  Degenerate,  // structurally valid input yielding a degenerate analysis
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_input(const std::string& msg) {
  throw Error(ErrorKind::Input, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::Numeric, msg);
}
[[noreturn]] inline void fail_degenerate(const std::string& msg) {
  throw Error(ErrorKind::Degenerate, msg);
}

}  // namespace agglom
