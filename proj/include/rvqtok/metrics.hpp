// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvqtok/token_stream.hpp"

namespace rvqtok {

// Word-level edit distance (unit costs) divided by reference length.
double wer(std::span<const std::string> reference,
           std::span<const std::string> hypothesis);
std::vector<std::string> split_words(const std::string& text);

struct EvalRecord {
  std::vector<std::uint32_t> prefix;
  std::vector<std::vector<std::uint32_t>> candidates;
  std::size_t positive_index = 0;

  void validate() const;
  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// {prefix: [ids], candidates: [[ids]], positive: int}
EvalRecord eval_record_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const EvalRecord& r);

struct ScoreResult {
  double nll = 0.0;  // total over the continuation
  std::size_t tokens = 0;
};

// Scores a continuation given a prefix. Implementations may throw; any
// exception or an invalid result surfaces as kScorerError.
using Scorer = std::function<ScoreResult(std::span<const std::uint32_t> prefix,
                                         std::span<const std::uint32_t> cont)>;

// exp(nll / tokens); throws kScorerError on a non-finite nll or zero tokens.
double perplexity(const ScoreResult& s);

// Correct iff the positive candidate's perplexity is strictly the lowest.
bool perplexity_compare(const EvalRecord& record, const Scorer& scorer);

double accuracy(std::span<const EvalRecord> records, const Scorer& scorer);

// Distinct non-EOA indices seen at `layer`, divided by K.
double codebook_utilization(std::span<const TokenFrame> frames,
                            std::size_t layer, std::uint32_t k);

// Plug-in Shannon entropy (nats) of the index distribution at `layer`.
double token_entropy(std::span<const TokenFrame> frames, std::size_t layer);

// Plug-in mutual information (nats) between two layers' indices.
double interlayer_mi(std::span<const TokenFrame> frames, std::size_t layer_a,
                     std::size_t layer_b);

}  // namespace rvqtok
