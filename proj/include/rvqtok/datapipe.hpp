// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Interleaved-record assembly from aligned (text, audio-token) pairs:
// punctuation segmentation, INTLV/ITTS layout, manifest packing and corpus
// statistics.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rvqtok/token_io.hpp"
#include "rvqtok/token_stream.hpp"

namespace rvqtok {

enum class Provenance { kCrawl, kSynthetic };

struct AlignedPair {
  std::string text;
  std::vector<std::uint32_t> text_tokens;
  std::vector<TokenFrame> frames;
  double duration_s = 0.0;
  Provenance provenance = Provenance::kCrawl;
  FramesRef frames_ref;  // where `frames` came from, when file-backed
};

// {. ! ? ; 。 ！ ？ ；}
std::vector<std::string> default_punctuation();

// Splits after every character listed in `rules` (each rule is one UTF-8
// encoded code point). Empty pieces are dropped; joining the result gives
// back the input.
std::vector<std::string> segment_text(std::string_view text,
                                      std::span<const std::string> rules);

// Fallback text ids when no external tokenizer output is supplied: one id
// per UTF-8 byte, offset past the default switch ids.
inline constexpr std::uint32_t kByteTokenOffset = 2;
std::vector<std::uint32_t> byte_tokens(std::string_view text);

enum class IntlvStart { kAudio, kText, kRandom };

// Which pair and which modality fills each segment.
struct SegmentSource {
  std::size_t pair = 0;
  SegmentKind kind = SegmentKind::kText;
  friend bool operator==(const SegmentSource&, const SegmentSource&) = default;
};

std::vector<SegmentSource> intlv_layout(std::size_t n_pairs,
                                        std::uint64_t alternation_seed,
                                        IntlvStart start = IntlvStart::kAudio);
std::vector<SegmentSource> itts_layout(std::size_t n_pairs);

InterleavedStream materialize(FormatTag format,
                              std::span<const AlignedPair> pairs,
                              std::span<const SegmentSource> layout);

InterleavedStream build_intlv(std::span<const AlignedPair> pairs,
                              std::uint64_t alternation_seed,
                              IntlvStart start = IntlvStart::kAudio);
InterleavedStream build_itts(std::span<const AlignedPair> pairs);

struct CorpusStats {
  std::map<std::string, std::uint64_t> records;  // keyed by format tag
  double audio_hours = 0.0;
  std::uint64_t text_tokens = 0;
  std::uint64_t audio_frames = 0;

  CorpusStats& operator+=(const CorpusStats& o);
  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

CorpusStats empty_stats();

struct StatsInput {
  InterleavedStream stream;
  double audio_duration_s = 0.0;
};

CorpusStats corpus_stats(std::span<const StatsInput> records);

nlohmann::ordered_json to_json(const CorpusStats& s);

// One manifest line: {text, atk1_path, frame_range, duration_s, provenance}
// plus optional {text_tokens, prompt, prompt_tokens, doc}. frame_range is
// either [start, end) or a list of such ranges, one per punctuation segment
// of `text`.
struct ManifestEntry {
  std::string text;
  std::optional<std::vector<std::uint32_t>> text_tokens;
  std::string prompt;
  std::optional<std::vector<std::uint32_t>> prompt_tokens;
  std::string atk1_path;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> frame_ranges;
  double duration_s = 0.0;
  Provenance provenance = Provenance::kCrawl;
  std::optional<std::string> doc;
};

// Throws kDataFormat.
ManifestEntry parse_manifest_line(std::string_view line);

struct PackOptions {
  FormatTag format = FormatTag::kItts;
  std::vector<std::string> punctuation = default_punctuation();
  IntlvStart intlv_start = IntlvStart::kAudio;
  SpecialTokens specials;
  std::uint64_t seed = 0;
};

struct PackResult {
  std::vector<InterleavedRecord> records;
  CorpusStats stats = empty_stats();
};

// Groups entries into records (INTLV/ITTS: consecutive entries sharing a
// doc id, or a single entry; other formats: one record per entry), builds
// streams and masks. Frame ranges are resolved through `store`.
PackResult pack(std::span<const ManifestEntry> entries,
                const PackOptions& opts, FrameStore& store);

}  // namespace rvqtok
