// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Interleaved text/audio token streams: framing, the special-token
// vocabulary, wire serialization and per-format loss masks.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rvqtok/matrix.hpp"

namespace rvqtok {

// One codeword index per RVQ layer. Value K_l at layer l is that layer's
// end-of-audio marker; a frame is either all markers or none.
struct TokenFrame {
  std::vector<std::uint32_t> indices;

  friend bool operator==(const TokenFrame&, const TokenFrame&) = default;
};

// Per-layer codebook sizes K_l. Embedding vocabularies are K_l + 1.
struct AudioVocab {
  std::vector<std::uint32_t> layer_sizes;

  std::size_t n_layers() const { return layer_sizes.size(); }
  TokenFrame eoa_frame() const { return {layer_sizes}; }
  bool is_eoa(const TokenFrame& f) const;
  // Throws kInvalidStream unless f has L entries each <= K_l and is either a
  // full EOA frame or contains no EOA value.
  void check_frame(const TokenFrame& f) const;
  std::vector<std::uint32_t> embedding_vocab_sizes() const;
};

enum class SegmentKind { kText, kAudio };

enum class FormatTag { kAsr, kAqa, kS2tt, kIntlv, kTts, kItts, kPureAudio };

inline constexpr FormatTag kAllFormats[] = {
    FormatTag::kAsr, FormatTag::kAqa, FormatTag::kS2tt, FormatTag::kIntlv,
    FormatTag::kTts, FormatTag::kItts, FormatTag::kPureAudio};

std::string_view to_string(FormatTag tag);
std::string_view to_string(SegmentKind kind);
// Throws kInvalidConfig for unknown names.
FormatTag parse_format_tag(std::string_view name);

struct Segment {
  SegmentKind kind = SegmentKind::kText;
  std::vector<std::uint32_t> text;  // text-vocabulary ids
  std::vector<TokenFrame> frames;

  std::size_t payload_size() const {
    return kind == SegmentKind::kText ? text.size() : frames.size();
  }
  static Segment Text(std::vector<std::uint32_t> ids) {
    return {SegmentKind::kText, std::move(ids), {}};
  }
  static Segment Audio(std::vector<TokenFrame> frames) {
    return {SegmentKind::kAudio, {}, std::move(frames)};
  }

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct InterleavedStream {
  FormatTag format = FormatTag::kItts;
  std::vector<Segment> segments;

  friend bool operator==(const InterleavedStream&,
                         const InterleavedStream&) = default;
};

// Modality-switch ids, drawn from the text vocabulary.
struct SpecialTokens {
  std::uint32_t switch_ta = 0;  // text -> audio
  std::uint32_t switch_at = 1;  // audio -> text
};

struct SerializeOptions {
  // Emit a switch token before the first segment too.
  bool leading_switch = false;
};

struct TextToken {
  std::uint32_t id = 0;
  friend bool operator==(const TextToken&, const TextToken&) = default;
};

using WireToken = std::variant<TextToken, TokenFrame>;

// Structural check: non-empty payloads, maximal runs, no switch ids inside
// text, every frame valid and not an EOA frame. Throws kInvalidStream.
void check_stream(const InterleavedStream& stream, const SpecialTokens& vocab,
                  const AudioVocab& audio);

// Whether the segment layout matches the format grammar (e.g. ASR is
// <prompt text, audio, transcript text>).
bool matches_format(const InterleavedStream& stream);

std::vector<WireToken> serialize(const InterleavedStream& stream,
                                 const SpecialTokens& vocab,
                                 const AudioVocab& audio,
                                 const SerializeOptions& opts = {});

InterleavedStream deserialize(std::span<const WireToken> wire,
                              const SpecialTokens& vocab,
                              const AudioVocab& audio, FormatTag format,
                              const SerializeOptions& opts = {});

// Serialized length without materializing the wire.
std::size_t serialized_length(const InterleavedStream& stream,
                              const SerializeOptions& opts = {});

// Whether segment `index` of a stream with this tag contributes to the loss.
bool segment_in_loss(FormatTag tag, std::span<const Segment> segments,
                     std::size_t index);

// One flag per serialized position. Switch tokens take the flag of the
// segment they open; the EOA frame takes the flag of its audio run.
std::vector<bool> build_loss_mask(const InterleavedStream& stream,
                                  const SerializeOptions& opts = {});

// Sum over layers of tables[l].row(frame.indices[l]).
std::vector<double> sum_embeddings(const TokenFrame& frame,
                                   std::span<const MatrixD> tables);

std::size_t audio_frame_count(const InterleavedStream& stream);

double frames_per_second_check(const InterleavedStream& stream,
                               double audio_duration_s);

}  // namespace rvqtok
