// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rvqtok {

enum class ErrorKind {
  kEmptyInput,
  kInvalidSample,
  kInvalidConfig,
  kShapeMismatch,
  kIndexOutOfRange,
  kInvalidStream,
  kMalformedWire,
  kInsufficientData,
  kScorerError,
  kProtocolError,
  kIo,
  kDataFormat,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (notably the
// CLI) can map it to a stable exit status.
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

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace rvqtok
