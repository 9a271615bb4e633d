// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/datapipe.hpp"

#include <algorithm>

#include "rvqtok/error.hpp"
#include "rvqtok/seed.hpp"

namespace rvqtok {

std::vector<std::string> default_punctuation() {
  return {".", "!", "?", ";", "。", "！", "？", "；"};
}

namespace {

// Byte length of the UTF-8 sequence starting at text[i], clamped to the
// remaining input. Invalid lead bytes count as one byte.
std::size_t utf8_length(std::string_view text, std::size_t i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t n = 1;
  if ((lead & 0xE0) == 0xC0) {
    n = 2;
  } else if ((lead & 0xF0) == 0xE0) {
    n = 3;
  } else if ((lead & 0xF8) == 0xF0) {
    n = 4;
  }
  return std::min(n, text.size() - i);
}

}  // namespace

std::vector<std::string> segment_text(std::string_view text,
                                      std::span<const std::string> rules) {
  require(!rules.empty(), ErrorKind::kInvalidConfig,
          "segment_text: empty punctuation set");
  std::vector<std::string> out;
  std::size_t begin = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t n = utf8_length(text, i);
    const std::string_view ch = text.substr(i, n);
    i += n;
    if (std::find(rules.begin(), rules.end(), ch) != rules.end()) {
      out.emplace_back(text.substr(begin, i - begin));
      begin = i;
    }
  }
  if (begin < text.size()) out.emplace_back(text.substr(begin));
  return out;
}

std::vector<std::uint32_t> byte_tokens(std::string_view text) {
  std::vector<std::uint32_t> ids;
  ids.reserve(text.size());
  for (char c : text) {
    ids.push_back(static_cast<unsigned char>(c) + kByteTokenOffset);
  }
  return ids;
}

std::vector<SegmentSource> intlv_layout(std::size_t n_pairs,
                                        std::uint64_t alternation_seed,
                                        IntlvStart start) {
  require(n_pairs >= 2, ErrorKind::kInsufficientData,
          "INTLV needs at least two aligned pairs");
  bool audio_first = start == IntlvStart::kAudio;
  if (start == IntlvStart::kRandom) {
    audio_first = (mix64(alternation_seed) & 1) == 0;
  }
  std::vector<SegmentSource> layout;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const bool audio = (i % 2 == 0) == audio_first;
    layout.push_back({i, audio ? SegmentKind::kAudio : SegmentKind::kText});
  }
  return layout;
}

std::vector<SegmentSource> itts_layout(std::size_t n_pairs) {
  require(n_pairs >= 1, ErrorKind::kInsufficientData,
          "ITTS needs at least one aligned pair");
  std::vector<SegmentSource> layout;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    layout.push_back({i, SegmentKind::kText});
    layout.push_back({i, SegmentKind::kAudio});
  }
  return layout;
}

InterleavedStream materialize(FormatTag format,
                              std::span<const AlignedPair> pairs,
                              std::span<const SegmentSource> layout) {
  InterleavedStream s;
  s.format = format;
  for (const auto& src : layout) {
    const auto& p = pairs[src.pair];
    if (src.kind == SegmentKind::kText) {
      s.segments.push_back(Segment::Text(
          p.text_tokens.empty() ? byte_tokens(p.text) : p.text_tokens));
    } else {
      s.segments.push_back(Segment::Audio(p.frames));
    }
  }
  return s;
}

InterleavedStream build_intlv(std::span<const AlignedPair> pairs,
                              std::uint64_t alternation_seed,
                              IntlvStart start) {
  const auto layout = intlv_layout(pairs.size(), alternation_seed, start);
  return materialize(FormatTag::kIntlv, pairs, layout);
}

InterleavedStream build_itts(std::span<const AlignedPair> pairs) {
  return materialize(FormatTag::kItts, pairs, itts_layout(pairs.size()));
}

CorpusStats& CorpusStats::operator+=(const CorpusStats& o) {
  for (const auto& [tag, n] : o.records) records[tag] += n;
  audio_hours += o.audio_hours;
  text_tokens += o.text_tokens;
  audio_frames += o.audio_frames;
  return *this;
}

CorpusStats empty_stats() {
  CorpusStats s;
  for (auto tag : kAllFormats) s.records[std::string(to_string(tag))] = 0;
  return s;
}

CorpusStats corpus_stats(std::span<const StatsInput> records) {
  CorpusStats s = empty_stats();
  double seconds = 0.0;
  for (const auto& r : records) {
    ++s.records[std::string(to_string(r.stream.format))];
    seconds += r.audio_duration_s;
    for (const auto& seg : r.stream.segments) {
      if (seg.kind == SegmentKind::kText) {
        s.text_tokens += seg.text.size();
      } else {
        s.audio_frames += seg.frames.size();
      }
    }
  }
  s.audio_hours = seconds / 3600.0;
  return s;
}

nlohmann::ordered_json to_json(const CorpusStats& s) {
  nlohmann::ordered_json j;
  j["records"] = nlohmann::ordered_json::object();
  for (auto tag : kAllFormats) {
    const std::string name(to_string(tag));
    const auto it = s.records.find(name);
    j["records"][name] = it == s.records.end() ? 0 : it->second;
  }
  j["audio_hours"] = s.audio_hours;
  j["text_tokens"] = s.text_tokens;
  j["audio_frames"] = s.audio_frames;
  return j;
}

ManifestEntry parse_manifest_line(std::string_view line) {
  ManifestEntry e;
  try {
    const auto j = nlohmann::json::parse(line);
    require(j.is_object(), ErrorKind::kDataFormat,
            "manifest line is not an object");
    e.text = j.value("text", std::string{});
    if (j.contains("text_tokens")) {
      e.text_tokens = j.at("text_tokens").get<std::vector<std::uint32_t>>();
    }
    e.prompt = j.value("prompt", std::string{});
    if (j.contains("prompt_tokens")) {
      e.prompt_tokens = j.at("prompt_tokens").get<std::vector<std::uint32_t>>();
    }
    e.atk1_path = j.at("atk1_path").get<std::string>();
    const auto& fr = j.at("frame_range");
    require(fr.is_array() && !fr.empty(), ErrorKind::kDataFormat,
            "frame_range must be a non-empty array");
    if (fr[0].is_array()) {
      for (const auto& r : fr) {
        e.frame_ranges.push_back(
            r.get<std::pair<std::uint32_t, std::uint32_t>>());
      }
    } else {
      e.frame_ranges.push_back(fr.get<std::pair<std::uint32_t, std::uint32_t>>());
    }
    for (const auto& [a, b] : e.frame_ranges) {
      require(a < b, ErrorKind::kDataFormat, "frame_range must be non-empty");
    }
    e.duration_s = j.at("duration_s").get<double>();
    require(e.duration_s > 0.0, ErrorKind::kDataFormat,
            "duration_s must be positive");
    const auto prov = j.value("provenance", std::string("crawl"));
    require(prov == "crawl" || prov == "synthetic", ErrorKind::kDataFormat,
            "provenance must be crawl or synthetic");
    e.provenance = prov == "crawl" ? Provenance::kCrawl : Provenance::kSynthetic;
    if (j.contains("doc")) e.doc = j.at("doc").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::kDataFormat, ex.what());
  }
  return e;
}

namespace {

// Splits one manifest entry into aligned pairs, one per frame range. With
// several ranges the text is cut at punctuation and must yield one piece
// per range.
std::vector<AlignedPair> expand(const ManifestEntry& e,
                                const PackOptions& opts, FrameStore& store) {
  std::vector<std::string> texts{e.text};
  if (e.frame_ranges.size() > 1) {
    require(!e.text_tokens, ErrorKind::kDataFormat,
            "text_tokens cannot be split across several frame ranges");
    texts = segment_text(e.text, opts.punctuation);
    require(texts.size() == e.frame_ranges.size(), ErrorKind::kDataFormat,
            "text has " + std::to_string(texts.size()) +
                " punctuation segments but " +
                std::to_string(e.frame_ranges.size()) + " frame ranges");
  }
  std::size_t total_frames = 0;
  for (const auto& [a, b] : e.frame_ranges) total_frames += b - a;

  std::vector<AlignedPair> pairs;
  for (std::size_t i = 0; i < e.frame_ranges.size(); ++i) {
    AlignedPair p;
    p.text = texts[i];
    if (e.text_tokens) p.text_tokens = *e.text_tokens;
    p.frames_ref = {e.atk1_path, e.frame_ranges[i].first,
                    e.frame_ranges[i].second};
    p.frames = store.frames(p.frames_ref);
    p.duration_s = e.duration_s * static_cast<double>(p.frames.size()) /
                   static_cast<double>(total_frames);
    p.provenance = e.provenance;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<std::uint32_t> text_ids(const AlignedPair& p) {
  return p.text_tokens.empty() ? byte_tokens(p.text) : p.text_tokens;
}

struct Built {
  InterleavedRecord record;
  StatsInput stats;
};

Built build_record(FormatTag format, std::span<const AlignedPair> pairs,
                   std::span<const SegmentSource> layout) {
  Built b;
  b.stats.stream = materialize(format, pairs, layout);
  b.record.format = format;
  for (const auto& src : layout) {
    RecordSegment seg;
    seg.kind = src.kind;
    if (src.kind == SegmentKind::kText) {
      seg.tokens = text_ids(pairs[src.pair]);
    } else {
      seg.frames_ref = pairs[src.pair].frames_ref;
      b.stats.audio_duration_s += pairs[src.pair].duration_s;
    }
    b.record.segments.push_back(std::move(seg));
  }
  return b;
}

}  // namespace

PackResult pack(std::span<const ManifestEntry> entries,
                const PackOptions& opts, FrameStore& store) {
  PackResult out;
  std::vector<StatsInput> stats;

  auto emit = [&](Built b, const AudioVocab& vocab) {
    check_stream(b.stats.stream, opts.specials, vocab);
    b.record.mask = build_loss_mask(b.stats.stream);
    out.records.push_back(std::move(b.record));
    stats.push_back(std::move(b.stats));
  };

  const bool grouped =
      opts.format == FormatTag::kIntlv || opts.format == FormatTag::kItts;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i + 1;
    if (grouped && entries[i].doc) {
      while (j < entries.size() && entries[j].doc == entries[i].doc) ++j;
    }
    std::vector<AlignedPair> pairs;
    for (std::size_t k = i; k < j; ++k) {
      auto more = expand(entries[k], opts, store);
      pairs.insert(pairs.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
    }
    const auto& vocab = store.file(entries[i].atk1_path).vocab;

    switch (opts.format) {
      case FormatTag::kIntlv:
        emit(build_record(opts.format, pairs,
                          intlv_layout(pairs.size(),
                                       derive_seed(opts.seed, {out.records.size()}),
                                       opts.intlv_start)),
             vocab);
        break;
      case FormatTag::kItts:
        emit(build_record(opts.format, pairs, itts_layout(pairs.size())), vocab);
        break;
      case FormatTag::kAsr:
      case FormatTag::kAqa:
      case FormatTag::kS2tt: {
        const auto& e = entries[i];
        require(!e.prompt.empty() || e.prompt_tokens, ErrorKind::kDataFormat,
                std::string(to_string(opts.format)) + " entries need a prompt");
        for (const auto& p : pairs) {
          AlignedPair prompt;
          prompt.text = e.prompt;
          if (e.prompt_tokens) prompt.text_tokens = *e.prompt_tokens;
          const AlignedPair both[] = {prompt, p};
          const SegmentSource layout[] = {{0, SegmentKind::kText},
                                          {1, SegmentKind::kAudio},
                                          {1, SegmentKind::kText}};
          emit(build_record(opts.format, both, layout), vocab);
        }
        break;
      }
      case FormatTag::kTts:
      case FormatTag::kPureAudio:
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          std::vector<SegmentSource> layout;
          if (opts.format == FormatTag::kTts) {
            layout.push_back({k, SegmentKind::kText});
          }
          layout.push_back({k, SegmentKind::kAudio});
          emit(build_record(opts.format, pairs, layout), vocab);
        }
        break;
    }
    i = j;
  }
  out.stats = corpus_stats(stats);
  return out;
}

}  // namespace rvqtok
