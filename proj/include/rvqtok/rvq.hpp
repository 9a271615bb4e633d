// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Residual vector quantizer: codeword selection, the residual cascade, EMA
// codebook learning with a norm constraint, dead-entry restart and the
// progressive VQ-replacement gate.
//
// Gradient contract: quantization is treated as the identity for gradients
// (straight-through). No autodiff lives here; callers that backpropagate
// through an encoder pass d(loss)/d(quantized) unchanged to the input.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rvqtok/kernels.hpp"
#include "rvqtok/matrix.hpp"

namespace rvqtok {

struct Codebook {
  MatrixD vectors;  // K x D
  double ema_decay = 0.99;
  double norm_beta = 0.0;
  std::vector<std::uint64_t> usage_counts;  // steps since last assignment
  std::vector<double> cluster_size_ema;

  Codebook() = default;
  Codebook(std::size_t k, std::size_t dim, double alpha, double beta);
  explicit Codebook(MatrixD codewords, double alpha = 0.99, double beta = 0.0);

  std::size_t size() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
  void validate() const;

  friend bool operator==(const Codebook&, const Codebook&) = default;
};

// Codebook sizes {8K, 4K, 2K, 1K, 1K, 1K, 1K, 1K}.
std::vector<std::size_t> default_layer_sizes();

struct RvqStack {
  std::vector<Codebook> layers;

  RvqStack() = default;
  RvqStack(std::span<const std::size_t> sizes, std::size_t dim,
           double alpha = 0.99, double beta = 0.0);

  std::size_t n_layers() const { return layers.size(); }
  std::size_t dim() const { return layers.empty() ? 0 : layers[0].dim(); }
  std::vector<std::uint32_t> layer_sizes() const;
  void validate() const;
  // Keeps the first n layers.
  RvqStack prefix(std::size_t n) const;

  friend bool operator==(const RvqStack&, const RvqStack&) = default;
};

struct GumbelConfig {
  bool enabled = false;
  double temperature = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class DropoutMode {
  kIndependent,  // each layer >= 2 kept with keep_prob
  kSuffix,       // with prob 1 - keep_prob, drop every layer from a random r
};

struct DropoutConfig {
  double keep_prob_per_layer = 1.0;
  DropoutMode mode = DropoutMode::kIndependent;
  std::uint64_t seed = 0;

  void validate() const;
  // Active-layer mask for one sample. Layer 0 is always active.
  std::vector<std::uint8_t> sample(std::size_t n_layers,
                                   std::uint64_t sample_key) const;
};

struct QuantizeResult {
  std::vector<std::uint32_t> indices;  // kInactiveIndex for dropped layers
  std::vector<double> quantized;
  std::vector<std::vector<double>> residuals;  // after each layer
  std::vector<std::uint8_t> active_layers;
};

// sample_key selects the Gumbel and dropout draws for this call.
QuantizeResult quantize(const RvqStack& stack, std::span<const double> input,
                        const GumbelConfig& gumbel = {},
                        const DropoutConfig* dropout = nullptr,
                        std::uint64_t sample_key = 0);

// Squared L2 distance between input and quantized.
double commitment_loss(std::span<const double> input,
                       const QuantizeResult& result);
double commitment_loss(std::span<const double> input,
                       std::span<const double> quantized);
// Mean over rows.
double commitment_loss(const MatrixD& inputs, const MatrixD& quantized);

enum class EmaMode {
  kPaperLiteral,  // c <- (1-b) * (a*c + mean(x))
  kStandard,      // c <- (1-b) * (a*c + (1-a)*mean(x))
};

// Vectors assigned to each entry in this step, in sample order.
using Assignments = std::map<std::size_t, std::vector<std::vector<double>>>;

Codebook ema_update(const Codebook& book, const Assignments& assignments,
                    EmaMode mode = EmaMode::kPaperLiteral);

// Same update from pre-reduced per-entry sums and counts (length K each).
void ema_update_inplace(Codebook& book, const MatrixD& sums,
                        std::span<const std::size_t> counts, EmaMode mode);

struct RestartResult {
  Codebook book;
  std::vector<std::size_t> replaced;
};

RestartResult restart_dead_entries(const Codebook& book, const MatrixD& batch,
                                   std::uint64_t dead_threshold,
                                   std::uint64_t rng_seed);
std::vector<std::size_t> restart_dead_entries_inplace(
    Codebook& book, const MatrixD& batch, std::uint64_t dead_threshold,
    std::uint64_t rng_seed);

Codebook apply_norm_constraint(const Codebook& book);

struct LossWeights {
  double recon = 1.0;
  double llm = 1.0;
  double commit = 0.25;
};

double total_loss(double recon_loss, double llm_loss, double commit_loss,
                  const LossWeights& weights);

struct TrainingSchedule {
  double replace_start = 0.10;
  double replace_end = 1.00;
  std::uint64_t total_steps = 0;
  std::vector<double> commit_weight_schedule{0.25};
  bool instance_level = true;

  void validate() const;
  double replace_fraction(std::uint64_t step) const;
  // Stage weight: the step range is split evenly across the listed values.
  double commit_weight(std::uint64_t step) const;
};

// One flag per instance (whole sample), true = replaced with VQ output.
std::vector<std::uint8_t> vq_replacement_gate(const TrainingSchedule& schedule,
                                              std::uint64_t step,
                                              std::uint64_t rng_seed,
                                              std::size_t n_instances);

}  // namespace rvqtok
