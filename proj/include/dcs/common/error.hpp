#pragma once

#include <stdexcept>
#include <string>

namespace dcs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Record timestamp does not fall on the partition day it was written to.
class PartitionBoundaryError : public Error {
 public:
  using Error::Error;
};

/// Another writer committed (or holds the lock) since the caller's base version.
class CommitConflictError : public Error {
 public:
  using Error::Error;
};

/// A partition file referenced by the manifest is missing or fails validation.
class ScanError : public Error {
 public:
  ScanError(const std::string& file, const std::string& what)
      : Error(file + ": " + what), file_(file) {}
  const std::string& file() const noexcept { return file_; }

 private:
  std::string file_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Upstream data source unreachable, misconfigured or failing.
class SourceError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dcs
