#pragma once

#include <stdexcept>
#include <string>

namespace deepnmf {

enum class ErrorKind {
  InvalidInput,
  Parse,
  Io,
  Numerical,
  Convergence,
  Internal,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what)
      : Error(ErrorKind::InvalidInput, what) {}
};

// Location-bearing parse failure (line for text formats, byte offset for
// binary ones).
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t location)
      : Error(ErrorKind::Parse, what), location(location) {}
  std::size_t location;
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double last_estimate)
      : Error(ErrorKind::Convergence, what), last_estimate(last_estimate) {}
  double last_estimate;
};

struct InternalError : Error {
  explicit InternalError(const std::string& what)
      : Error(ErrorKind::Internal, what) {}
};

}  // namespace deepnmf
