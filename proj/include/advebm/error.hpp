#pragma once

#include <stdexcept>
#include <string>

namespace advebm {

// Base for all library errors. Subclasses carry enough context to act on
// (node names, file offsets, loss snapshots) inside the what() string plus
// dedicated fields where callers need them programmatically.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Tensor/graph shape violations. `where` names the offending node or call.
class ShapeError : public Error {
 public:
  ShapeError(std::string where, const std::string& msg)
      : Error(where + ": " + msg), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Non-finite value produced where finiteness is promised.
class NumericError : public Error {
 public:
  NumericError(std::string where, const std::string& msg)
      : Error(where + ": " + msg), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Invalid argument values (out-of-range class index, bad config, ...).
class ValueError : public Error {
 public:
  explicit ValueError(const std::string& msg) : Error(msg) {}
};

// Filesystem and serialization failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Malformed or incompatible on-disk data (bad magic, truncation, CRC).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Checkpoint version gate: recognized file, unsupported version.
class VersionError : public FormatError {
 public:
  VersionError(std::uint32_t found, std::uint32_t expected)
      : FormatError("checkpoint version " + std::to_string(found) +
                    " not supported (expected " + std::to_string(expected) + ")"),
        found_(found) {}
  std::uint32_t found() const noexcept { return found_; }

 private:
  std::uint32_t found_;
};

}  // namespace advebm
