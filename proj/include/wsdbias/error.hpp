#pragma once

#include <stdexcept>
#include <string>

namespace wsdbias {

// Data or contract violations surfaced to callers.
// The CLI maps these to exit code 2; usage problems exit with 1.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace wsdbias
