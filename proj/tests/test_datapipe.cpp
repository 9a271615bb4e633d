// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>

#include "rvqtok/datapipe.hpp"
#include "rvqtok/error.hpp"
#include "support.hpp"

using namespace rvqtok;
using rvqtok::test::Rng;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an rvqtok::Error");
  return ErrorKind::kIo;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (const auto& p : parts) s += p;
  return s;
}

AlignedPair make_pair(Rng& rng, std::size_t id) {
  AlignedPair p;
  p.text = "utterance " + std::to_string(id) + ".";
  p.text_tokens = {static_cast<std::uint32_t>(100 + id)};
  const std::size_t n = test::pick(rng, 1, 5);
  for (std::size_t i = 0; i < n; ++i) {
    p.frames.push_back({{static_cast<std::uint32_t>(id % 7), 1}});
  }
  p.duration_s = static_cast<double>(n) / 12.5;
  return p;
}

std::vector<AlignedPair> make_pairs(Rng& rng, std::size_t n) {
  std::vector<AlignedPair> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_pair(rng, i));
  return out;
}

}  // namespace

TEST_CASE("segment_text examples") {
  const std::vector<std::string> rules{".", "!"};
  CHECK(segment_text("Hello. World!", rules) ==
        std::vector<std::string>{"Hello.", " World!"});
  CHECK(segment_text("no punctuation here", rules) ==
        std::vector<std::string>{"no punctuation here"});
  CHECK(segment_text("", rules).empty());
  CHECK(segment_text("..", rules) == std::vector<std::string>{".", "."});
  const auto zh = default_punctuation();
  CHECK(segment_text("你好。世界！ok", zh) ==
        std::vector<std::string>{"你好。", "世界！", "ok"});
  CHECK(kind_of([] { segment_text("a", {}); }) == ErrorKind::kInvalidConfig);
}

TEST_CASE("segment_text is lossless on fuzzed strings") {
  const auto rules = default_punctuation();
  const std::vector<std::string> alphabet{"a", "b", " ", ".", "!", "?", ";", "。",
                                          "！", "é", "中", "\xff", "\n"};
  Rng rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const std::size_t n = test::pick(rng, 0, 40);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[test::pick(rng, 0, alphabet.size() - 1)];
    // Truncated multibyte sequence at the end.
    if (trial % 10 == 0) s += "\xe4\xb8";
    const auto parts = segment_text(s, rules);
    CAPTURE(s);
    CHECK(join(parts) == s);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      CHECK(!parts[i].empty());
      if (i + 1 < parts.size()) {
        bool ends_on_rule = false;
        for (const auto& r : rules) {
          ends_on_rule = ends_on_rule || parts[i].ends_with(r);
        }
        CHECK(ends_on_rule);
      }
    }
  }
}

TEST_CASE("byte tokens skip the switch ids") {
  CHECK(byte_tokens("A\x01") == std::vector<std::uint32_t>{65 + 2, 1 + 2});
  CHECK(byte_tokens("").empty());
}

TEST_CASE("INTLV layouts") {
  Rng rng(1);
  const auto pairs = make_pairs(rng, 4);
  const auto two = build_intlv(std::span(pairs).first(2), 0);
  REQUIRE(two.segments.size() == 2);
  CHECK(two.format == FormatTag::kIntlv);
  CHECK(two.segments[0] == Segment::Audio(pairs[0].frames));
  CHECK(two.segments[1] == Segment::Text(pairs[1].text_tokens));

  const auto four = build_intlv(pairs, 0);
  REQUIRE(four.segments.size() == 4);
  CHECK(four.segments[2] == Segment::Audio(pairs[2].frames));
  CHECK(four.segments[3] == Segment::Text(pairs[3].text_tokens));

  const auto text_first = build_intlv(pairs, 0, IntlvStart::kText);
  CHECK(text_first.segments[0] == Segment::Text(pairs[0].text_tokens));

  std::size_t audio_starts = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto layout = intlv_layout(3, seed, IntlvStart::kRandom);
    CHECK(layout == intlv_layout(3, seed, IntlvStart::kRandom));
    audio_starts += layout[0].kind == SegmentKind::kAudio ? 1 : 0;
  }
  CHECK(audio_starts > 50);
  CHECK(audio_starts < 150);

  CHECK(kind_of([&] { build_intlv(std::span(pairs).first(1), 0); }) ==
        ErrorKind::kInsufficientData);
  CHECK(kind_of([&] { build_intlv({}, 0); }) == ErrorKind::kInsufficientData);
}

TEST_CASE("INTLV output alternates on random corpora") {
  const SpecialTokens specials;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto pairs = make_pairs(rng, test::pick(rng, 2, 12));
    const auto s = build_intlv(pairs, seed);
    CAPTURE(seed);
    REQUIRE(s.segments.size() == pairs.size());
    CHECK(s.segments[0].kind == SegmentKind::kAudio);
    for (std::size_t i = 1; i < s.segments.size(); ++i) {
      CHECK(s.segments[i].kind != s.segments[i - 1].kind);
    }
    CHECK(matches_format(s));
    check_stream(s, specials, AudioVocab{{8, 2}});
  }
}

TEST_CASE("ITTS layouts") {
  Rng rng(2);
  const auto pairs = make_pairs(rng, 2);
  const auto one = build_itts(std::span(pairs).first(1));
  CHECK(one.segments ==
        std::vector<Segment>{Segment::Text(pairs[0].text_tokens),
                             Segment::Audio(pairs[0].frames)});
  const auto two = build_itts(pairs);
  REQUIRE(two.segments.size() == 4);
  CHECK(two.format == FormatTag::kItts);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(two.segments[2 * i] == Segment::Text(pairs[i].text_tokens));
    CHECK(two.segments[2 * i + 1] == Segment::Audio(pairs[i].frames));
  }
  const auto mask = build_loss_mask(two);
  const std::size_t first = pairs[0].text_tokens.size();
  for (std::size_t p = 0; p < mask.size(); ++p) CHECK(mask[p] == (p >= first));
  CHECK(kind_of([] { build_itts({}); }) == ErrorKind::kInsufficientData);

  AlignedPair raw;
  raw.text = "hi";
  raw.frames = {{{0, 0}}};
  CHECK(build_itts(std::span(&raw, 1)).segments[0].text == byte_tokens("hi"));
}

TEST_CASE("corpus_stats") {
  CHECK(corpus_stats({}) == empty_stats());
  CHECK(empty_stats().audio_hours == 0.0);

  InterleavedStream s;
  s.format = FormatTag::kPureAudio;
  s.segments = {Segment::Audio({{{0}}})};
  const std::vector<StatsInput> two{{s, 3600.0}, {s, 3600.0}};
  const auto st = corpus_stats(two);
  CHECK(st.audio_hours == 2.0);
  CHECK(st.records.at("PURE_AUDIO") == 2);
  CHECK(st.audio_frames == 2);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    std::vector<StatsInput> corpus;
    std::map<std::string, std::uint64_t> recs;
    std::uint64_t text = 0, frames = 0;
    double secs = 0.0;
    const std::size_t n = test::pick(rng, 0, 20);
    for (std::size_t r = 0; r < n; ++r) {
      const auto pairs = make_pairs(rng, test::pick(rng, 2, 6));
      StatsInput in;
      in.stream = test::pick(rng, 0, 1) ? build_itts(pairs) : build_intlv(pairs, r);
      in.audio_duration_s = test::uniform(rng, 0.1, 500.0);
      corpus.push_back(in);
      ++recs[std::string(to_string(in.stream.format))];
      secs += in.audio_duration_s;
      for (const auto& seg : in.stream.segments) {
        text += seg.text.size();
        frames += seg.frames.size();
      }
    }
    const auto got = corpus_stats(corpus);
    for (const auto& [tag, c] : recs) CHECK(got.records.at(tag) == c);
    std::uint64_t total = 0;
    for (const auto& [tag, c] : got.records) total += c;
    CHECK(total == n);
    CHECK(got.text_tokens == text);
    CHECK(got.audio_frames == frames);
    CHECK(std::abs(got.audio_hours - secs / 3600.0) <= 1e-9);

    const std::size_t cut = n == 0 ? 0 : test::pick(rng, 0, n);
    auto a = corpus_stats(std::span(corpus).first(cut));
    a += corpus_stats(std::span(corpus).subspan(cut));
    CHECK(a.records == got.records);
    CHECK(a.text_tokens == got.text_tokens);
    CHECK(a.audio_frames == got.audio_frames);
    CHECK(std::abs(a.audio_hours - got.audio_hours) <= 1e-9);
  }

  const auto j = to_json(st);
  CHECK(j["records"].size() == 7);
  CHECK(j["audio_hours"] == 2.0);
}

TEST_CASE("manifest lines") {
  const auto e = parse_manifest_line(
      R"({"text":"a. b.","atk1_path":"x.atk1","frame_range":[[0,2],[2,5]],)"
      R"("duration_s":0.4,"provenance":"synthetic","doc":"d1"})");
  CHECK(e.frame_ranges.size() == 2);
  CHECK(e.frame_ranges[1] == std::pair<std::uint32_t, std::uint32_t>{2, 5});
  CHECK(e.provenance == Provenance::kSynthetic);
  CHECK(e.doc == "d1");
  CHECK(!e.text_tokens);
  CHECK(parse_manifest_line(R"({"atk1_path":"x","frame_range":[1,3],"duration_s":1})")
            .provenance == Provenance::kCrawl);

  const char* bad[] = {
      "not json",
      "[1,2]",
      R"({"frame_range":[0,1],"duration_s":1})",
      R"({"atk1_path":"x","frame_range":[],"duration_s":1})",
      R"({"atk1_path":"x","frame_range":[3,3],"duration_s":1})",
      R"({"atk1_path":"x","frame_range":[0,1],"duration_s":0})",
      R"({"atk1_path":"x","frame_range":[0,1],"duration_s":1,"provenance":"web"})",
      R"({"atk1_path":"x","frame_range":[0,1]})",
      R"({"atk1_path":"x","frame_range":[0,1],"duration_s":"1"})",
  };
  for (const char* line : bad) {
    CAPTURE(line);
    CHECK(kind_of([&] { parse_manifest_line(line); }) == ErrorKind::kDataFormat);
  }
}

TEST_CASE("pack groups documents and emits masks") {
  test::TempDir dir;
  TokenFile t;
  t.vocab = AudioVocab{{4, 4}};
  for (std::uint32_t i = 0; i < 10; ++i) t.frames.push_back({{i % 4, (i + 1) % 4}});
  const auto atk = (dir / "t.atk1").string();
  write_atk1(atk, t);

  auto entry = [&](std::string text, std::uint32_t a, std::uint32_t b,
                   std::optional<std::string> doc) {
    ManifestEntry e;
    e.text = std::move(text);
    e.atk1_path = atk;
    e.frame_ranges = {{a, b}};
    e.duration_s = (b - a) / 12.5;
    e.doc = std::move(doc);
    return e;
  };
  const std::vector<ManifestEntry> entries{
      entry("one.", 0, 2, "a"), entry("two.", 2, 5, "a"), entry("three.", 5, 6, "b"),
      entry("four.", 6, 10, std::nullopt)};

  FrameStore store;
  PackOptions opts;
  opts.format = FormatTag::kItts;
  const auto itts = pack(entries, opts, store);
  REQUIRE(itts.records.size() == 3);
  CHECK(itts.records[0].segments.size() == 4);
  CHECK(itts.records[1].segments.size() == 2);
  CHECK(itts.records[0].segments[3].frames_ref == FramesRef{atk, 2, 5});
  const auto& m = itts.records[0].mask;
  const std::size_t first = byte_tokens("one.").size();
  for (std::size_t p = 0; p < m.size(); ++p) CHECK(m[p] == (p >= first));
  CHECK(itts.stats.records.at("ITTS") == 3);
  CHECK(itts.stats.audio_frames == 10);
  CHECK(std::abs(itts.stats.audio_hours - 10 / 12.5 / 3600.0) <= 1e-12);

  opts.format = FormatTag::kIntlv;
  const auto intlv = pack(std::span(entries).first(2), opts, store);
  REQUIRE(intlv.records.size() == 1);
  REQUIRE(intlv.records[0].segments.size() == 2);
  CHECK(intlv.records[0].segments[0].kind == SegmentKind::kAudio);
  CHECK(intlv.records[0].mask[0] == false);
  // Single-pair documents cannot form an INTLV record.
  CHECK(kind_of([&] { pack(std::span(entries).subspan(2), opts, store); }) ==
        ErrorKind::kInsufficientData);

  opts.format = FormatTag::kTts;
  const auto tts = pack(entries, opts, store);
  CHECK(tts.records.size() == 4);
  opts.format = FormatTag::kAsr;
  CHECK(kind_of([&] { pack(entries, opts, store); }) == ErrorKind::kDataFormat);
  auto prompted = entries;
  for (auto& e : prompted) e.prompt = "transcribe:";
  const auto asr = pack(prompted, opts, store);
  REQUIRE(asr.records.size() == 4);
  CHECK(asr.records[0].segments.size() == 3);
  CHECK(asr.records[0].segments[0].tokens == byte_tokens("transcribe:"));

  // Several ranges split the text at punctuation.
  auto split = entry("left. right!", 0, 3, std::nullopt);
  split.frame_ranges = {{0, 1}, {1, 3}};
  opts.format = FormatTag::kItts;
  const auto sp = pack(std::span(&split, 1), opts, store);
  REQUIRE(sp.records[0].segments.size() == 4);
  CHECK(sp.records[0].segments[2].tokens == byte_tokens(" right!"));
  split.frame_ranges = {{0, 1}, {1, 2}, {2, 3}};
  CHECK(kind_of([&] { pack(std::span(&split, 1), opts, store); }) == ErrorKind::kDataFormat);

  auto out_of_range = entry("x.", 8, 12, std::nullopt);
  CHECK(kind_of([&] { pack(std::span(&out_of_range, 1), opts, store); }) ==
        ErrorKind::kDataFormat);

  CHECK(pack({}, opts, store).records.empty());
  CHECK(pack({}, opts, store).stats == empty_stats());
}
