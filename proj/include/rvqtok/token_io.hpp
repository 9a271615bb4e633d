// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvqtok/token_stream.hpp"

namespace rvqtok {

struct TokenFile {
  AudioVocab vocab;
  std::vector<TokenFrame> frames;
};

// "ATK1": magic, u32 L, L x u32 K_l, u32 frame count, then frames as
// L x u32 LE each. Frames are not range-checked on read.
void write_atk1(const std::filesystem::path& path, const TokenFile& tokens);
TokenFile read_atk1(const std::filesystem::path& path);

// Half-open frame range [start, end) inside an ATK1 file.
struct FramesRef {
  std::string path;
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  friend bool operator==(const FramesRef&, const FramesRef&) = default;
};

// An interleaved record as stored on disk: audio segments point into ATK1
// files instead of embedding frames.
struct RecordSegment {
  SegmentKind kind = SegmentKind::kText;
  std::vector<std::uint32_t> tokens;
  FramesRef frames_ref;

  friend bool operator==(const RecordSegment&, const RecordSegment&) = default;
};

struct InterleavedRecord {
  FormatTag format = FormatTag::kItts;
  std::vector<RecordSegment> segments;
  std::vector<bool> mask;

  friend bool operator==(const InterleavedRecord&,
                         const InterleavedRecord&) = default;
};

nlohmann::ordered_json to_json(const InterleavedRecord& rec);
InterleavedRecord record_from_json(const nlohmann::json& j);

// Loads ATK1 files on demand and slices frame ranges out of them.
class FrameStore {
 public:
  const TokenFile& file(const std::string& path);
  std::vector<TokenFrame> frames(const FramesRef& ref);

 private:
  std::map<std::string, TokenFile> cache_;
};

InterleavedStream resolve(const InterleavedRecord& rec, FrameStore& store);

// {"switch_ta": id, "switch_at": id}
SpecialTokens parse_special_tokens(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SpecialTokens& s);

}  // namespace rvqtok
