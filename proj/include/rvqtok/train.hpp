// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rvqtok/matrix.hpp"
#include "rvqtok/mel.hpp"
#include "rvqtok/rvq.hpp"

namespace rvqtok {

enum class InitMethod {
  kSample,     // uniform draw from the first batch
  kKMeansPP,   // k-means++ seeding on the first batch
  kProvided,   // keep the codewords already in the stack
};

struct TrainOptions {
  std::size_t epochs = 1;
  std::size_t batch_instances = 4;
  EmaMode ema_mode = EmaMode::kStandard;
  bool restart = true;
  std::uint64_t dead_threshold = 256;
  bool dropout_enabled = false;
  InitMethod init = InitMethod::kSample;
  bool shuffle = true;
  std::uint64_t seed = 0;
};

struct StepRecord {
  std::uint64_t step = 0;
  double commit_loss = 0.0;
  double feature_mae = 0.0;
  std::vector<double> utilization;
  double replace_fraction = 0.0;
  double commit_weight = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrainingReport {
  std::vector<StepRecord> steps;

  friend bool operator==(const TrainingReport&, const TrainingReport&) = default;
};

struct TrainResult {
  RvqStack stack;
  TrainingReport report;
};

// Seeds every layer from `batch` (layer l sees the residual left by the
// already seeded layers 0..l-1).
void initialize_stack(RvqStack& stack, const MatrixD& batch, InitMethod method,
                      std::uint64_t seed);

// Greedy inference-mode encoding of every row. Returns rows x n_layers.
Matrix<std::uint32_t> encode(const RvqStack& stack, const MatrixD& inputs);

// Row i = sum over layers of the selected codewords. Indices equal to a
// layer's size (end-of-audio) or kInactiveIndex contribute nothing.
MatrixD decode(const RvqStack& stack, const Matrix<std::uint32_t>& indices);

// One training step over `batch`. Exposed for tests; train_rvq drives it.
StepRecord train_step(RvqStack& stack, const MatrixD& batch,
                      std::span<const std::size_t> instance_of_row,
                      std::size_t n_instances, const TrainingSchedule& schedule,
                      const GumbelConfig& gumbel, const DropoutConfig& dropout,
                      const TrainOptions& opts, std::uint64_t step);

// Codebooks as train_rvq sets them up before its first step: initialized
// from the first non-empty batch of epoch 0 unless init is kProvided.
RvqStack initial_stack(const RvqStack& stack,
                       std::span<const FeatureSequence> corpus,
                       const TrainOptions& opts);

// Runs `epochs` passes over the corpus. A batch is `batch_instances`
// consecutive sequences; initialization happens on the first batch unless
// opts.init is kProvided. With epochs == 0 the stack is returned unchanged.
TrainResult train_rvq(const RvqStack& stack,
                      std::span<const FeatureSequence> corpus,
                      TrainingSchedule schedule, const GumbelConfig& gumbel,
                      const DropoutConfig& dropout, const TrainOptions& opts);

// Batches in the order train_rvq visits them.
std::vector<std::vector<std::size_t>> plan_batches(std::size_t n_sequences,
                                                   const TrainOptions& opts,
                                                   std::size_t epoch);

std::string to_jsonl(const StepRecord& rec);

}  // namespace rvqtok
