// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Built-in scorers and the out-of-process plugin client.
//
// Plugin protocol: the plugin reads one JSON object per line on stdin,
// {"prefix": [ids], "candidate": [ids]}, and answers each with one line on
// stdout, {"nll": number, "tokens": int}. Responses are matched to requests
// by order.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rvqtok/metrics.hpp"

namespace rvqtok {

// NLL 1.0 per token for the positive candidate of a known record, 2.0 per
// token for anything else.
class OracleScorer {
 public:
  explicit OracleScorer(std::span<const EvalRecord> records);
  ScoreResult operator()(std::span<const std::uint32_t> prefix,
                         std::span<const std::uint32_t> cont) const;

 private:
  std::map<std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>>,
           bool>
      positive_;
};

// Per-token NLL uniform in [0, 1), keyed on the request content so the
// answer does not depend on call order.
class RandomScorer {
 public:
  explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
  ScoreResult operator()(std::span<const std::uint32_t> prefix,
                         std::span<const std::uint32_t> cont) const;

 private:
  std::uint64_t seed_;
};

// Add-one smoothed bigram model over token ids. Context for the first
// continuation token is the last prefix token.
class BigramScorer {
 public:
  explicit BigramScorer(std::span<const std::vector<std::uint32_t>> corpus);
  ScoreResult operator()(std::span<const std::uint32_t> prefix,
                         std::span<const std::uint32_t> cont) const;

 private:
  double log_prob(std::uint32_t prev, std::uint32_t next) const;

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> pairs_;
  std::map<std::uint32_t, std::uint64_t> context_;
  std::uint64_t vocab_ = 1;
};

// Spawns `/bin/sh -c command` and speaks the line protocol over pipes.
// Malformed responses or an early exit raise kProtocolError.
class PluginScorer {
 public:
  explicit PluginScorer(const std::string& command);
  ~PluginScorer();
  PluginScorer(const PluginScorer&) = delete;
  PluginScorer& operator=(const PluginScorer&) = delete;

  ScoreResult operator()(std::span<const std::uint32_t> prefix,
                         std::span<const std::uint32_t> cont);

 private:
  struct Process;
  std::unique_ptr<Process> proc_;
};

// Serves the plugin protocol on the given streams with an in-process
// scorer. Returns when input ends.
void serve_plugin(const Scorer& scorer, std::istream& in, std::ostream& out);

}  // namespace rvqtok
