// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/rvq.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rvqtok/error.hpp"
#include "rvqtok/seed.hpp"

namespace rvqtok {

namespace {

double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

void check_unit_interval(double v, bool allow_one, const char* what) {
  const bool ok = std::isfinite(v) && v >= 0.0 && (allow_one ? v <= 1.0 : v < 1.0);
  require(ok, ErrorKind::kInvalidConfig, what);
}

}  // namespace

Codebook::Codebook(std::size_t k, std::size_t dim, double alpha, double beta)
    : vectors(k, dim, 0.0),
      ema_decay(alpha),
      norm_beta(beta),
      usage_counts(k, 0),
      cluster_size_ema(k, 0.0) {}

Codebook::Codebook(MatrixD codewords, double alpha, double beta)
    : vectors(std::move(codewords)),
      ema_decay(alpha),
      norm_beta(beta),
      usage_counts(vectors.rows(), 0),
      cluster_size_ema(vectors.rows(), 0.0) {}

void Codebook::validate() const {
  require(size() > 0, ErrorKind::kInvalidConfig, "codebook is empty");
  check_unit_interval(ema_decay, true, "ema_decay must lie in [0, 1]");
  check_unit_interval(norm_beta, false, "norm_beta must lie in [0, 1)");
  require(usage_counts.size() == size() && cluster_size_ema.size() == size(),
          ErrorKind::kInvalidConfig, "codebook counters do not match size");
  for (double v : vectors.flat()) {
    require(std::isfinite(v), ErrorKind::kInvalidConfig,
            "codebook holds a non-finite value");
  }
}

std::vector<std::size_t> default_layer_sizes() {
  return {8192, 4096, 2048, 1024, 1024, 1024, 1024, 1024};
}

RvqStack::RvqStack(std::span<const std::size_t> sizes, std::size_t dim,
                   double alpha, double beta) {
  layers.reserve(sizes.size());
  for (auto k : sizes) layers.emplace_back(k, dim, alpha, beta);
}

std::vector<std::uint32_t> RvqStack::layer_sizes() const {
  std::vector<std::uint32_t> out;
  for (const auto& l : layers) out.push_back(static_cast<std::uint32_t>(l.size()));
  return out;
}

void RvqStack::validate() const {
  require(!layers.empty(), ErrorKind::kInvalidConfig, "RVQ stack has no layers");
  for (const auto& l : layers) {
    l.validate();
    require(l.dim() == dim(), ErrorKind::kShapeMismatch,
            "RVQ layers disagree on dimension");
  }
}

RvqStack RvqStack::prefix(std::size_t n) const {
  require(n >= 1 && n <= layers.size(), ErrorKind::kInvalidConfig,
          "layer prefix out of range");
  RvqStack out;
  out.layers.assign(layers.begin(),
                    layers.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

void GumbelConfig::validate() const {
  require(!enabled || (std::isfinite(temperature) && temperature > 0.0),
          ErrorKind::kInvalidConfig, "gumbel temperature must be > 0");
}

void DropoutConfig::validate() const {
  check_unit_interval(keep_prob_per_layer, true,
                      "keep_prob_per_layer must lie in [0, 1]");
}

std::vector<std::uint8_t> DropoutConfig::sample(
    std::size_t n_layers, std::uint64_t sample_key) const {
  std::vector<std::uint8_t> active(n_layers, 1);
  if (n_layers < 2) return active;
  if (mode == DropoutMode::kIndependent) {
    for (std::size_t l = 1; l < n_layers; ++l) {
      const double u = unit_open(derive_seed(seed, {sample_key, l}));
      active[l] = u < keep_prob_per_layer ? 1 : 0;
    }
    return active;
  }
  const std::uint64_t s = derive_seed(seed, {sample_key});
  if (unit_open(s) < keep_prob_per_layer) return active;
  const std::size_t first_dropped = 1 + mix64(s) % (n_layers - 1);
  for (std::size_t l = first_dropped; l < n_layers; ++l) active[l] = 0;
  return active;
}

QuantizeResult quantize(const RvqStack& stack, std::span<const double> input,
                        const GumbelConfig& gumbel,
                        const DropoutConfig* dropout,
                        std::uint64_t sample_key) {
  require(!stack.layers.empty(), ErrorKind::kInvalidConfig,
          "quantize: stack has no layers");
  for (const auto& l : stack.layers) {
    require(l.size() > 0, ErrorKind::kInvalidConfig, "quantize: empty codebook");
    require(l.dim() == input.size(), ErrorKind::kShapeMismatch,
            "quantize: input dimension does not match codebook");
  }
  gumbel.validate();

  const std::size_t n_layers = stack.n_layers();
  QuantizeResult r;
  r.active_layers = dropout ? dropout->sample(n_layers, sample_key)
                            : std::vector<std::uint8_t>(n_layers, 1);
  r.indices.assign(n_layers, kInactiveIndex);
  r.quantized.assign(input.size(), 0.0);
  r.residuals.reserve(n_layers);

  const AssignOptions opts{gumbel.enabled, gumbel.temperature, gumbel.seed};
  std::vector<double> residual(input.begin(), input.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (r.active_layers[l]) {
      const auto& book = stack.layers[l].vectors;
      const auto idx = kernels::select_codeword(
          book, residual, opts, derive_seed(sample_key, {l}));
      const auto c = book.row(idx);
      for (std::size_t d = 0; d < residual.size(); ++d) {
        residual[d] -= c[d];
        r.quantized[d] += c[d];
      }
      r.indices[l] = idx;
    }
    r.residuals.push_back(residual);
  }
  return r;
}

double commitment_loss(std::span<const double> input,
                       std::span<const double> quantized) {
  require(input.size() == quantized.size(), ErrorKind::kShapeMismatch,
          "commitment_loss: shape mismatch");
  return kernels::squared_distance(input, quantized);
}

double commitment_loss(std::span<const double> input,
                       const QuantizeResult& result) {
  return commitment_loss(input, result.quantized);
}

double commitment_loss(const MatrixD& inputs, const MatrixD& quantized) {
  require(inputs.rows() == quantized.rows() && inputs.cols() == quantized.cols(),
          ErrorKind::kShapeMismatch, "commitment_loss: shape mismatch");
  require(inputs.rows() > 0, ErrorKind::kEmptyInput, "commitment_loss: no rows");
  double acc = 0.0;
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    acc += kernels::squared_distance(inputs.row(i), quantized.row(i));
  }
  return acc / static_cast<double>(inputs.rows());
}

void ema_update_inplace(Codebook& book, const MatrixD& sums,
                        std::span<const std::size_t> counts, EmaMode mode) {
  require(sums.rows() == book.size() && sums.cols() == book.dim() &&
              counts.size() == book.size(),
          ErrorKind::kShapeMismatch, "ema_update: accumulator shape mismatch");
  const double alpha = book.ema_decay;
  const double shrink = 1.0 - book.norm_beta;
  for (std::size_t j = 0; j < book.size(); ++j) {
    auto c = book.vectors.row(j);
    const std::size_t n = counts[j];
    if (n > 0) {
      const auto s = sums.row(j);
      const double mean_w =
          (mode == EmaMode::kPaperLiteral ? 1.0 : 1.0 - alpha) /
          static_cast<double>(n);
      for (std::size_t d = 0; d < c.size(); ++d) {
        c[d] = shrink * (alpha * c[d] + mean_w * s[d]);
      }
      book.usage_counts[j] = 0;
    } else {
      // No assignments: the mean term is absent.
      const double keep = mode == EmaMode::kPaperLiteral ? alpha : 1.0;
      for (double& v : c) v = shrink * (keep * v);
      ++book.usage_counts[j];
    }
    book.cluster_size_ema[j] = alpha * book.cluster_size_ema[j] +
                               (1.0 - alpha) * static_cast<double>(n);
  }
}

Codebook ema_update(const Codebook& book, const Assignments& assignments,
                    EmaMode mode) {
  MatrixD sums(book.size(), book.dim(), 0.0);
  std::vector<std::size_t> counts(book.size(), 0);
  for (const auto& [entry, vectors] : assignments) {
    require(entry < book.size(), ErrorKind::kIndexOutOfRange,
            "ema_update: assignment to a nonexistent entry");
    auto s = sums.row(entry);
    for (const auto& v : vectors) {
      require(v.size() == book.dim(), ErrorKind::kShapeMismatch,
              "ema_update: assigned vector has the wrong dimension");
      for (std::size_t d = 0; d < v.size(); ++d) s[d] += v[d];
    }
    counts[entry] += vectors.size();
  }
  Codebook out = book;
  ema_update_inplace(out, sums, counts, mode);
  return out;
}

std::vector<std::size_t> restart_dead_entries_inplace(
    Codebook& book, const MatrixD& batch, std::uint64_t dead_threshold,
    std::uint64_t rng_seed) {
  std::vector<std::size_t> dead;
  for (std::size_t j = 0; j < book.size(); ++j) {
    if (book.usage_counts[j] >= dead_threshold) dead.push_back(j);
  }
  if (dead.empty()) return dead;
  require(batch.rows() > 0, ErrorKind::kEmptyInput,
          "restart_dead_entries: dead entries but empty batch");
  require(batch.cols() == book.dim(), ErrorKind::kShapeMismatch,
          "restart_dead_entries: batch dimension mismatch");
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<std::size_t> pick(0, batch.rows() - 1);
  for (auto j : dead) {
    const auto src = batch.row(pick(rng));
    std::copy(src.begin(), src.end(), book.vectors.row(j).begin());
    book.usage_counts[j] = 0;
    book.cluster_size_ema[j] = 1.0;
  }
  return dead;
}

RestartResult restart_dead_entries(const Codebook& book, const MatrixD& batch,
                                   std::uint64_t dead_threshold,
                                   std::uint64_t rng_seed) {
  RestartResult r{book, {}};
  r.replaced =
      restart_dead_entries_inplace(r.book, batch, dead_threshold, rng_seed);
  return r;
}

Codebook apply_norm_constraint(const Codebook& book) {
  check_unit_interval(book.norm_beta, false, "norm_beta must lie in [0, 1)");
  Codebook out = book;
  const double shrink = 1.0 - book.norm_beta;
  for (double& v : out.vectors.flat()) v *= shrink;
  return out;
}

double total_loss(double recon_loss, double llm_loss, double commit_loss,
                  const LossWeights& w) {
  for (double x : {w.recon, w.llm, w.commit}) {
    require(std::isfinite(x) && x >= 0.0, ErrorKind::kInvalidConfig,
            "loss weights must be finite and non-negative");
  }
  return w.recon * recon_loss + w.llm * llm_loss + w.commit * commit_loss;
}

void TrainingSchedule::validate() const {
  require(std::isfinite(replace_start) && std::isfinite(replace_end) &&
              0.0 <= replace_start && replace_start <= replace_end &&
              replace_end <= 1.0,
          ErrorKind::kInvalidConfig,
          "schedule: need 0 <= replace_start <= replace_end <= 1");
  require(instance_level, ErrorKind::kInvalidConfig,
          "schedule: only instance-level replacement is supported");
  require(!commit_weight_schedule.empty(), ErrorKind::kInvalidConfig,
          "schedule: commit_weight_schedule is empty");
  for (double w : commit_weight_schedule) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::kInvalidConfig,
            "schedule: commit weights must be finite and non-negative");
  }
}

double TrainingSchedule::replace_fraction(std::uint64_t step) const {
  require(step <= total_steps, ErrorKind::kInvalidConfig,
          "schedule: step beyond total_steps");
  if (total_steps == 0) return replace_end;
  const double t = static_cast<double>(step) / static_cast<double>(total_steps);
  return replace_start + (replace_end - replace_start) * t;
}

double TrainingSchedule::commit_weight(std::uint64_t step) const {
  const std::size_t n = commit_weight_schedule.size();
  const std::uint64_t span = std::max<std::uint64_t>(total_steps, 1);
  const std::size_t stage = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::min(step, span) * n / span));
  return commit_weight_schedule[stage];
}

std::vector<std::uint8_t> vq_replacement_gate(const TrainingSchedule& schedule,
                                              std::uint64_t step,
                                              std::uint64_t rng_seed,
                                              std::size_t n_instances) {
  schedule.validate();
  const double p = schedule.replace_fraction(step);
  std::vector<std::uint8_t> mask(n_instances);
  for (std::size_t i = 0; i < n_instances; ++i) {
    mask[i] = unit_open(derive_seed(rng_seed, {step, i})) < p ? 1 : 0;
  }
  return mask;
}

}  // namespace rvqtok
