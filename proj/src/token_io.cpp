// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/token_io.hpp"

#include "rvqtok/binary_io.hpp"
#include "rvqtok/error.hpp"

namespace rvqtok {

void write_atk1(const std::filesystem::path& path, const TokenFile& tokens) {
  io::Writer w(path);
  w.magic("ATK1");
  const auto n_layers = tokens.vocab.n_layers();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(n_layers));
  for (auto k : tokens.vocab.layer_sizes) w.put<std::uint32_t>(k);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tokens.frames.size()));
  for (const auto& f : tokens.frames) {
    require(f.indices.size() == n_layers, ErrorKind::kShapeMismatch,
            "write_atk1: frame layer count mismatch");
    for (auto idx : f.indices) w.put<std::uint32_t>(idx);
  }
  w.close();
}

TokenFile read_atk1(const std::filesystem::path& path) {
  io::Reader r(path);
  r.expect_magic("ATK1");
  TokenFile t;
  const auto n_layers = r.get<std::uint32_t>();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    t.vocab.layer_sizes.push_back(r.get<std::uint32_t>());
  }
  const auto n_frames = r.get<std::uint32_t>();
  t.frames.resize(n_frames);
  for (auto& f : t.frames) {
    f.indices.resize(n_layers);
    for (auto& idx : f.indices) idx = r.get<std::uint32_t>();
  }
  r.expect_eof();
  return t;
}

nlohmann::ordered_json to_json(const InterleavedRecord& rec) {
  nlohmann::ordered_json j;
  j["format"] = std::string(to_string(rec.format));
  auto segs = nlohmann::ordered_json::array();
  for (const auto& s : rec.segments) {
    nlohmann::ordered_json o;
    o["kind"] = std::string(to_string(s.kind));
    if (s.kind == SegmentKind::kText) {
      o["tokens"] = s.tokens;
    } else {
      o["frames_ref"] = {{"path", s.frames_ref.path},
                         {"start", s.frames_ref.start},
                         {"end", s.frames_ref.end}};
    }
    segs.push_back(std::move(o));
  }
  j["segments"] = std::move(segs);
  j["mask"] = rec.mask;
  return j;
}

InterleavedRecord record_from_json(const nlohmann::json& j) {
  InterleavedRecord rec;
  try {
    rec.format = parse_format_tag(j.at("format").get<std::string>());
    for (const auto& o : j.at("segments")) {
      RecordSegment s;
      const auto kind = o.at("kind").get<std::string>();
      if (kind == "text") {
        s.kind = SegmentKind::kText;
        s.tokens = o.at("tokens").get<std::vector<std::uint32_t>>();
      } else if (kind == "audio") {
        s.kind = SegmentKind::kAudio;
        const auto& ref = o.at("frames_ref");
        s.frames_ref.path = ref.at("path").get<std::string>();
        s.frames_ref.start = ref.at("start").get<std::uint32_t>();
        s.frames_ref.end = ref.at("end").get<std::uint32_t>();
      } else {
        fail(ErrorKind::kDataFormat, "record: unknown segment kind '" + kind + "'");
      }
      rec.segments.push_back(std::move(s));
    }
    if (j.contains("mask")) rec.mask = j.at("mask").get<std::vector<bool>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kDataFormat, std::string("record: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::kDataFormat, e.what());
  }
  return rec;
}

const TokenFile& FrameStore::file(const std::string& path) {
  auto it = cache_.find(path);
  if (it == cache_.end()) it = cache_.emplace(path, read_atk1(path)).first;
  return it->second;
}

std::vector<TokenFrame> FrameStore::frames(const FramesRef& ref) {
  const auto& f = file(ref.path);
  require(ref.start <= ref.end && ref.end <= f.frames.size(),
          ErrorKind::kDataFormat,
          "frame range [" + std::to_string(ref.start) + ", " +
              std::to_string(ref.end) + ") outside " + ref.path);
  return {f.frames.begin() + ref.start, f.frames.begin() + ref.end};
}

InterleavedStream resolve(const InterleavedRecord& rec, FrameStore& store) {
  InterleavedStream s;
  s.format = rec.format;
  for (const auto& seg : rec.segments) {
    if (seg.kind == SegmentKind::kText) {
      s.segments.push_back(Segment::Text(seg.tokens));
    } else {
      s.segments.push_back(Segment::Audio(store.frames(seg.frames_ref)));
    }
  }
  return s;
}

SpecialTokens parse_special_tokens(const nlohmann::json& j) {
  SpecialTokens s;
  try {
    s.switch_ta = j.at("switch_ta").get<std::uint32_t>();
    s.switch_at = j.at("switch_at").get<std::uint32_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidConfig, std::string("special tokens: ") + e.what());
  }
  require(s.switch_ta != s.switch_at, ErrorKind::kInvalidConfig,
          "special tokens: switch ids must differ");
  return s;
}

nlohmann::ordered_json to_json(const SpecialTokens& s) {
  return {{"switch_ta", s.switch_ta}, {"switch_at", s.switch_at}};
}

}  // namespace rvqtok
