// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/token_stream.hpp"

#include <cmath>

#include "rvqtok/error.hpp"

namespace rvqtok {

bool AudioVocab::is_eoa(const TokenFrame& f) const {
  return f.indices == layer_sizes;
}

void AudioVocab::check_frame(const TokenFrame& f) const {
  require(f.indices.size() == layer_sizes.size(), ErrorKind::kInvalidStream,
          "frame has " + std::to_string(f.indices.size()) + " layers, expected " +
              std::to_string(layer_sizes.size()));
  std::size_t markers = 0;
  for (std::size_t l = 0; l < layer_sizes.size(); ++l) {
    require(f.indices[l] <= layer_sizes[l], ErrorKind::kInvalidStream,
            "frame index exceeds codebook size at layer " + std::to_string(l));
    markers += f.indices[l] == layer_sizes[l] ? 1 : 0;
  }
  require(markers == 0 || markers == layer_sizes.size(),
          ErrorKind::kInvalidStream,
          "end-of-audio value must appear in every layer or none");
}

std::vector<std::uint32_t> AudioVocab::embedding_vocab_sizes() const {
  std::vector<std::uint32_t> out;
  for (auto k : layer_sizes) out.push_back(k + 1);
  return out;
}

std::string_view to_string(FormatTag tag) {
  switch (tag) {
    case FormatTag::kAsr: return "ASR";
    case FormatTag::kAqa: return "AQA";
    case FormatTag::kS2tt: return "S2TT";
    case FormatTag::kIntlv: return "INTLV";
    case FormatTag::kTts: return "TTS";
    case FormatTag::kItts: return "ITTS";
    case FormatTag::kPureAudio: return "PURE_AUDIO";
  }
  return "?";
}

std::string_view to_string(SegmentKind kind) {
  return kind == SegmentKind::kText ? "text" : "audio";
}

FormatTag parse_format_tag(std::string_view name) {
  for (auto tag : kAllFormats) {
    if (to_string(tag) == name) return tag;
  }
  fail(ErrorKind::kInvalidConfig, "unknown format tag '" + std::string(name) + "'");
}

void check_stream(const InterleavedStream& stream, const SpecialTokens& vocab,
                  const AudioVocab& audio) {
  const auto& segs = stream.segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& s = segs[i];
    require(s.payload_size() > 0, ErrorKind::kInvalidStream,
            "segment " + std::to_string(i) + " is empty");
    if (i > 0) {
      require(segs[i - 1].kind != s.kind, ErrorKind::kInvalidStream,
              "adjacent segments " + std::to_string(i - 1) + " and " +
                  std::to_string(i) + " share a modality");
    }
    if (s.kind == SegmentKind::kText) {
      require(s.frames.empty(), ErrorKind::kInvalidStream,
              "text segment carries frames");
      for (auto id : s.text) {
        require(id != vocab.switch_ta && id != vocab.switch_at,
                ErrorKind::kInvalidStream,
                "text segment contains a modality-switch id");
      }
    } else {
      require(s.text.empty(), ErrorKind::kInvalidStream,
              "audio segment carries text");
      for (const auto& f : s.frames) {
        audio.check_frame(f);
        require(!audio.is_eoa(f), ErrorKind::kInvalidStream,
                "end-of-audio frame inside an audio segment");
      }
    }
  }
}

bool matches_format(const InterleavedStream& stream) {
  const auto& segs = stream.segments;
  auto kinds_are = [&](std::initializer_list<SegmentKind> want) {
    if (segs.size() != want.size()) return false;
    std::size_t i = 0;
    for (auto k : want) {
      if (segs[i++].kind != k) return false;
    }
    return true;
  };
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (segs[i].kind == segs[i - 1].kind) return false;
  }
  using K = SegmentKind;
  switch (stream.format) {
    case FormatTag::kAsr:
    case FormatTag::kAqa:
    case FormatTag::kS2tt:
      return kinds_are({K::kText, K::kAudio, K::kText});
    case FormatTag::kTts:
      return kinds_are({K::kText, K::kAudio});
    case FormatTag::kIntlv:
      return segs.size() >= 2;
    case FormatTag::kItts:
      return segs.size() >= 2 && segs[0].kind == K::kText;
    case FormatTag::kPureAudio:
      return segs.empty() || kinds_are({K::kAudio});
  }
  return false;
}

namespace {

std::uint32_t opening_switch(SegmentKind kind, const SpecialTokens& vocab) {
  return kind == SegmentKind::kAudio ? vocab.switch_ta : vocab.switch_at;
}

}  // namespace

std::vector<WireToken> serialize(const InterleavedStream& stream,
                                 const SpecialTokens& vocab,
                                 const AudioVocab& audio,
                                 const SerializeOptions& opts) {
  require(vocab.switch_ta != vocab.switch_at, ErrorKind::kInvalidConfig,
          "switch tokens must be distinct");
  check_stream(stream, vocab, audio);
  std::vector<WireToken> wire;
  wire.reserve(serialized_length(stream, opts));
  for (std::size_t i = 0; i < stream.segments.size(); ++i) {
    const auto& s = stream.segments[i];
    if (i > 0 || opts.leading_switch) {
      wire.emplace_back(TextToken{opening_switch(s.kind, vocab)});
    }
    if (s.kind == SegmentKind::kText) {
      for (auto id : s.text) wire.emplace_back(TextToken{id});
    } else {
      for (const auto& f : s.frames) wire.emplace_back(f);
      wire.emplace_back(audio.eoa_frame());
    }
  }
  return wire;
}

InterleavedStream deserialize(std::span<const WireToken> wire,
                              const SpecialTokens& vocab,
                              const AudioVocab& audio, FormatTag format,
                              const SerializeOptions& opts) {
  InterleavedStream stream;
  stream.format = format;
  if (wire.empty()) return stream;

  auto malformed = [](std::size_t pos, const std::string& what) {
    fail(ErrorKind::kMalformedWire,
         "wire position " + std::to_string(pos) + ": " + what);
  };
  auto text_id = [&](std::size_t pos) -> const std::uint32_t* {
    const auto* t = std::get_if<TextToken>(&wire[pos]);
    return t ? &t->id : nullptr;
  };
  auto is_switch = [&](std::size_t pos) {
    const auto* id = text_id(pos);
    return id && (*id == vocab.switch_ta || *id == vocab.switch_at);
  };

  std::size_t pos = 0;
  SegmentKind next;
  if (opts.leading_switch) {
    if (!is_switch(0)) malformed(0, "expected a leading switch token");
    next = *text_id(0) == vocab.switch_ta ? SegmentKind::kAudio
                                          : SegmentKind::kText;
    pos = 1;
    if (pos == wire.size()) malformed(0, "dangling switch token");
  } else {
    if (is_switch(0)) malformed(0, "unexpected leading switch token");
    next = text_id(0) ? SegmentKind::kText : SegmentKind::kAudio;
  }

  while (true) {
    Segment seg;
    seg.kind = next;
    if (next == SegmentKind::kText) {
      while (pos < wire.size() && text_id(pos) && !is_switch(pos)) {
        seg.text.push_back(*text_id(pos));
        ++pos;
      }
      if (seg.text.empty()) malformed(pos, "empty text run");
      stream.segments.push_back(std::move(seg));
      if (pos == wire.size()) break;
      if (!text_id(pos)) malformed(pos, "audio frame without a switch token");
      if (*text_id(pos) != vocab.switch_ta) {
        malformed(pos, "audio-to-text switch after a text run");
      }
      next = SegmentKind::kAudio;
    } else {
      bool closed = false;
      while (pos < wire.size()) {
        const auto* f = std::get_if<TokenFrame>(&wire[pos]);
        if (!f) malformed(pos, "text token inside an audio run");
        try {
          audio.check_frame(*f);
        } catch (const Error& e) {
          malformed(pos, e.what());
        }
        ++pos;
        if (audio.is_eoa(*f)) {
          closed = true;
          break;
        }
        seg.frames.push_back(*f);
      }
      if (!closed) malformed(pos, "audio run without an end-of-audio frame");
      if (seg.frames.empty()) malformed(pos, "empty audio run");
      stream.segments.push_back(std::move(seg));
      if (pos == wire.size()) break;
      if (!is_switch(pos) || *text_id(pos) != vocab.switch_at) {
        malformed(pos, "expected an audio-to-text switch after end-of-audio");
      }
      next = SegmentKind::kText;
    }
    ++pos;  // the switch token
    if (pos == wire.size()) malformed(pos - 1, "dangling switch token");
  }
  return stream;
}

std::size_t serialized_length(const InterleavedStream& stream,
                              const SerializeOptions& opts) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < stream.segments.size(); ++i) {
    const auto& s = stream.segments[i];
    if (i > 0 || opts.leading_switch) ++n;
    n += s.payload_size() + (s.kind == SegmentKind::kAudio ? 1 : 0);
  }
  return n;
}

bool segment_in_loss(FormatTag tag, std::span<const Segment> segments,
                     std::size_t index) {
  const SegmentKind kind = segments[index].kind;
  const bool is_text = kind == SegmentKind::kText;
  switch (tag) {
    case FormatTag::kIntlv:
      return is_text;
    case FormatTag::kItts: {
      for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].kind == SegmentKind::kText) return i != index;
      }
      return true;
    }
    case FormatTag::kAsr:
    case FormatTag::kAqa:
    case FormatTag::kS2tt: {
      if (!is_text) return false;
      for (std::size_t i = 0; i < index; ++i) {
        if (segments[i].kind == SegmentKind::kAudio) return true;
      }
      return false;
    }
    case FormatTag::kTts:
    case FormatTag::kPureAudio:
      return !is_text;
  }
  fail(ErrorKind::kInvalidConfig, "unknown format tag");
}

std::vector<bool> build_loss_mask(const InterleavedStream& stream,
                                  const SerializeOptions& opts) {
  bool known = false;
  for (auto tag : kAllFormats) known = known || tag == stream.format;
  require(known, ErrorKind::kInvalidConfig, "build_loss_mask: unknown tag");

  std::vector<bool> mask;
  mask.reserve(serialized_length(stream, opts));
  for (std::size_t i = 0; i < stream.segments.size(); ++i) {
    const auto& s = stream.segments[i];
    const bool flag = segment_in_loss(stream.format, stream.segments, i);
    std::size_t n = s.payload_size();
    if (i > 0 || opts.leading_switch) ++n;
    if (s.kind == SegmentKind::kAudio) ++n;
    mask.insert(mask.end(), n, flag);
  }
  return mask;
}

std::vector<double> sum_embeddings(const TokenFrame& frame,
                                   std::span<const MatrixD> tables) {
  require(tables.size() == frame.indices.size(), ErrorKind::kShapeMismatch,
          "sum_embeddings: one table per layer required");
  require(!tables.empty(), ErrorKind::kShapeMismatch,
          "sum_embeddings: no tables");
  const std::size_t dim = tables[0].cols();
  std::vector<double> out(dim, 0.0);
  for (std::size_t l = 0; l < tables.size(); ++l) {
    require(tables[l].cols() == dim, ErrorKind::kShapeMismatch,
            "sum_embeddings: tables disagree on width");
    require(frame.indices[l] < tables[l].rows(), ErrorKind::kIndexOutOfRange,
            "sum_embeddings: index out of range at layer " + std::to_string(l));
    const auto row = tables[l].row(frame.indices[l]);
    for (std::size_t d = 0; d < dim; ++d) out[d] += row[d];
  }
  return out;
}

std::size_t audio_frame_count(const InterleavedStream& stream) {
  std::size_t n = 0;
  for (const auto& s : stream.segments) {
    if (s.kind == SegmentKind::kAudio) n += s.frames.size();
  }
  return n;
}

double frames_per_second_check(const InterleavedStream& stream,
                               double audio_duration_s) {
  require(std::isfinite(audio_duration_s) && audio_duration_s > 0.0,
          ErrorKind::kInvalidConfig, "duration must be positive");
  return static_cast<double>(audio_frame_count(stream)) / audio_duration_s;
}

}  // namespace rvqtok
