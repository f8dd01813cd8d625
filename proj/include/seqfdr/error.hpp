#pragma once

#include <stdexcept>
#include <string>

namespace seqfdr {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  Domain,     ///< precondition on an argument violated
  Config,     ///< user configuration rejected
  Data,       ///< input data malformed or exhausted
  Numerical,  ///< internal numerical failure (collapse, cycling, non-PD)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(ErrorKind::Config, path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

}  // namespace seqfdr
