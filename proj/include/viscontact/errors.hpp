#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace viscontact {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSizes : public Error {
 public:
  using Error::Error;
};

class MeshFailure : public Error {
 public:
  using Error::Error;
};

class SingularMaterial : public Error {
 public:
  using Error::Error;
};

class HistoryMismatch : public Error {
 public:
  using Error::Error;
};

class NonConstantKernel : public Error {
 public:
  using Error::Error;
};

class SingularStep : public Error {
 public:
  using Error::Error;
};

class NoAdmissibleSamples : public Error {
 public:
  using Error::Error;
};

/// The inner optimizer hit its iteration cap. Carries the last iterate so the
/// caller can inspect how far it got.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::size_t iterations, double residual,
                std::vector<double> last_iterate, int step_index = -1)
      : Error(what),
        iterations_(iterations),
        residual_(residual),
        last_iterate_(std::move(last_iterate)),
        step_index_(step_index) {}

  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }
  const std::vector<double>& last_iterate() const { return last_iterate_; }
  int step_index() const { return step_index_; }

 private:
  std::size_t iterations_;
  double residual_;
  std::vector<double> last_iterate_;
  int step_index_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line) : Error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string key) : Error(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace viscontact
