#pragma once

#include <stdexcept>
#include <string>

namespace fmatch {

// Base class for everything we throw on purpose. The CLI maps InputError to
// exit code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
  explicit InputError(const std::string& msg) : Error(msg) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string& msg) : Error(msg) {}
};

// File could not be parsed; carries path and 1-based line number.
class ParseError : public InputError {
public:
  ParseError(const std::string& path, long line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what),
        path_(path), line_(line) {}
  const std::string& path() const { return path_; }
  long line() const { return line_; }

private:
  std::string path_;
  long line_;
};

class DimensionError : public InputError {
public:
  explicit DimensionError(const std::string& msg) : InputError(msg) {}
};

// Eigensolver did not reach the requested residual.
class SolverError : public NumericalError {
public:
  SolverError(const std::string& msg, double achieved_residual)
      : NumericalError(msg), residual_(achieved_residual) {}
  double achieved_residual() const { return residual_; }

private:
  double residual_;
};

// Training loss became non-finite; carries the offending iteration.
class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& msg, int iteration)
      : NumericalError(msg), iteration_(iteration) {}
  int iteration() const { return iteration_; }

private:
  int iteration_;
};

} // namespace fmatch
