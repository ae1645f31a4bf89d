#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsbm {

/// Malformed or inconsistent `tsbm` snapshot / labels file.
class FormatError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kMalformedHeader,
    kMalformedLine,
    kSelfLoop,
    kDuplicateEdge,
    kIndexOutOfRange,
  };

  FormatError(Kind kind, std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        kind_(kind),
        line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Iterative eigensolver gave up before reaching the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations)
      : std::runtime_error(what + " (after " + std::to_string(iterations) +
                           " iterations)"),
        iterations_(iterations) {}

  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

}  // namespace tsbm
