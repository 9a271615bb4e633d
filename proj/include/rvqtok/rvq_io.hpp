// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rvqtok/rvq.hpp"
#include "rvqtok/train.hpp"

namespace rvqtok {

// "RVQ1": magic, u32 n_layers, then per layer u32 K, u32 D, f64 alpha,
// f64 beta, K x D float32 LE codewords, K x u64 usage counters.
// Codewords are stored at float32 precision.
void write_rvq1(const std::filesystem::path& path, const RvqStack& stack);
RvqStack read_rvq1(const std::filesystem::path& path);

// Rounds every codeword to float32, matching what write_rvq1 persists.
RvqStack round_to_storage_precision(RvqStack stack);

// Training configuration document. Keys mirror the field names of
// TrainingSchedule, GumbelConfig, DropoutConfig and TrainOptions; any key
// may be omitted.
struct TrainConfig {
  std::vector<std::size_t> layer_sizes = default_layer_sizes();
  double ema_decay = 0.99;
  double norm_beta = 0.0;
  TrainingSchedule schedule;
  GumbelConfig gumbel;
  DropoutConfig dropout;
  TrainOptions options;
  LossWeights loss_weights;
};

TrainConfig parse_train_config(const nlohmann::json& doc);
nlohmann::json to_json(const TrainConfig& cfg);

}  // namespace rvqtok
