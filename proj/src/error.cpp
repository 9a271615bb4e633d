// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/error.hpp"

namespace rvqtok {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kInvalidSample: return "InvalidSample";
    case ErrorKind::kInvalidConfig: return "InvalidConfig";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kInvalidStream: return "InvalidStream";
    case ErrorKind::kMalformedWire: return "MalformedWire";
    case ErrorKind::kInsufficientData: return "InsufficientData";
    case ErrorKind::kScorerError: return "ScorerError";
    case ErrorKind::kProtocolError: return "ProtocolError";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kDataFormat: return "DataFormat";
  }
  return "Unknown";
}

}  // namespace rvqtok
