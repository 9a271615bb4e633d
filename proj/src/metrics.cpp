// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rvqtok/error.hpp"

namespace rvqtok {

double wer(std::span<const std::string> reference,
           std::span<const std::string> hypothesis) {
  require(!reference.empty(), ErrorKind::kInvalidConfig,
          "wer: empty reference");
  const std::size_t m = hypothesis.size();
  // Two-row Levenshtein.
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub =
          prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[m]) / static_cast<double>(reference.size());
}

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> words;
  for (std::string w; is >> w;) words.push_back(w);
  return words;
}

void EvalRecord::validate() const {
  require(candidates.size() >= 2, ErrorKind::kDataFormat,
          "eval record needs at least two candidates");
  require(positive_index < candidates.size(), ErrorKind::kDataFormat,
          "eval record positive index out of range");
}

EvalRecord eval_record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.prefix = j.at("prefix").get<std::vector<std::uint32_t>>();
    r.candidates =
        j.at("candidates").get<std::vector<std::vector<std::uint32_t>>>();
    const auto pos = j.at("positive").get<std::int64_t>();
    require(pos >= 0, ErrorKind::kDataFormat, "negative positive index");
    r.positive_index = static_cast<std::size_t>(pos);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kDataFormat, std::string("eval record: ") + e.what());
  }
  r.validate();
  return r;
}

nlohmann::ordered_json to_json(const EvalRecord& r) {
  return {{"prefix", r.prefix},
          {"candidates", r.candidates},
          {"positive", r.positive_index}};
}

double perplexity(const ScoreResult& s) {
  require(std::isfinite(s.nll) && s.tokens >= 1, ErrorKind::kScorerError,
          "scorer returned a non-finite nll or zero tokens");
  return std::exp(s.nll / static_cast<double>(s.tokens));
}

bool perplexity_compare(const EvalRecord& record, const Scorer& scorer) {
  record.validate();
  std::vector<double> ppl;
  ppl.reserve(record.candidates.size());
  for (const auto& cand : record.candidates) {
    ScoreResult s;
    try {
      s = scorer(record.prefix, cand);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kProtocolError) throw;
      fail(ErrorKind::kScorerError, std::string("scorer failed: ") + e.what());
    } catch (const std::exception& e) {
      fail(ErrorKind::kScorerError, std::string("scorer failed: ") + e.what());
    }
    ppl.push_back(perplexity(s));
  }
  const double pos = ppl[record.positive_index];
  for (std::size_t i = 0; i < ppl.size(); ++i) {
    if (i != record.positive_index && !(pos < ppl[i])) return false;
  }
  return true;
}

double accuracy(std::span<const EvalRecord> records, const Scorer& scorer) {
  require(!records.empty(), ErrorKind::kEmptyInput, "accuracy: no records");
  std::size_t correct = 0;
  for (const auto& r : records) correct += perplexity_compare(r, scorer) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

namespace {

void check_layer(std::span<const TokenFrame> frames, std::size_t layer) {
  for (const auto& f : frames) {
    require(layer < f.indices.size(), ErrorKind::kInvalidConfig,
            "layer index out of range");
  }
}

double entropy_of(const std::map<std::uint64_t, std::size_t>& hist,
                  std::size_t n) {
  double h = 0.0;
  for (const auto& [_, c] : hist) {
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double codebook_utilization(std::span<const TokenFrame> frames,
                            std::size_t layer, std::uint32_t k) {
  require(k > 0, ErrorKind::kInvalidConfig, "codebook size must be positive");
  check_layer(frames, layer);
  std::set<std::uint32_t> seen;
  for (const auto& f : frames) {
    if (f.indices[layer] < k) seen.insert(f.indices[layer]);
  }
  return static_cast<double>(seen.size()) / static_cast<double>(k);
}

double token_entropy(std::span<const TokenFrame> frames, std::size_t layer) {
  require(!frames.empty(), ErrorKind::kEmptyInput, "token_entropy: no frames");
  check_layer(frames, layer);
  std::map<std::uint64_t, std::size_t> hist;
  for (const auto& f : frames) ++hist[f.indices[layer]];
  return entropy_of(hist, frames.size());
}

double interlayer_mi(std::span<const TokenFrame> frames, std::size_t layer_a,
                     std::size_t layer_b) {
  require(!frames.empty(), ErrorKind::kEmptyInput, "interlayer_mi: no frames");
  check_layer(frames, layer_a);
  check_layer(frames, layer_b);
  std::map<std::uint64_t, std::size_t> ha, hb, hab;
  for (const auto& f : frames) {
    const std::uint64_t a = f.indices[layer_a];
    const std::uint64_t b = f.indices[layer_b];
    ++ha[a];
    ++hb[b];
    ++hab[(a << 32) | b];
  }
  // I(A;B) = H(A) + H(B) - H(A,B), clamped against rounding below zero.
  const std::size_t n = frames.size();
  return std::max(0.0, entropy_of(ha, n) + entropy_of(hb, n) - entropy_of(hab, n));
}

}  // namespace rvqtok
