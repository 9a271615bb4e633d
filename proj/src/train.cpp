// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "rvqtok/error.hpp"
#include "rvqtok/kernels.hpp"
#include "rvqtok/seed.hpp"

namespace rvqtok {

namespace {

std::vector<std::size_t> sample_rows(std::size_t n, std::size_t k,
                                     std::mt19937_64& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  if (n >= k) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(perm[i], perm[pick(rng)]);
      out.push_back(perm[i]);
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pick(rng));
  }
  return out;
}

std::vector<std::size_t> kmeans_pp_rows(const MatrixD& points, std::size_t k,
                                        std::mt19937_64& rng) {
  const std::size_t n = points.rows();
  std::vector<std::size_t> out;
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  out.push_back(first(rng));
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) {
    best[i] = kernels::squared_distance(points.row(i), points.row(out[0]));
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (out.size() < k) {
    const double total = std::accumulate(best.begin(), best.end(), 0.0);
    std::size_t chosen = 0;
    if (total <= 0.0) {
      chosen = first(rng);
    } else {
      double target = unit(rng) * total;
      for (chosen = 0; chosen + 1 < n; ++chosen) {
        target -= best[chosen];
        if (target < 0.0) break;
      }
    }
    out.push_back(chosen);
    for (std::size_t i = 0; i < n; ++i) {
      best[i] = std::min(
          best[i], kernels::squared_distance(points.row(i), points.row(chosen)));
    }
  }
  return out;
}

void subtract_selected(MatrixD& residual, const MatrixD& book,
                       std::span<const std::uint32_t> idx) {
  for (std::size_t i = 0; i < residual.rows(); ++i) {
    if (idx[i] == kInactiveIndex) continue;
    auto r = residual.row(i);
    const auto c = book.row(idx[i]);
    for (std::size_t d = 0; d < r.size(); ++d) r[d] -= c[d];
  }
}

void check_dim(const RvqStack& stack, std::size_t dim) {
  require(stack.dim() == dim, ErrorKind::kShapeMismatch,
          "feature dimension does not match the RVQ stack");
}

}  // namespace

void initialize_stack(RvqStack& stack, const MatrixD& batch, InitMethod method,
                      std::uint64_t seed) {
  if (method == InitMethod::kProvided) return;
  require(batch.rows() > 0, ErrorKind::kEmptyInput,
          "initialize_stack: empty batch");
  check_dim(stack, batch.cols());
  MatrixD residual = batch;
  std::vector<std::uint32_t> idx(batch.rows());
  for (std::size_t l = 0; l < stack.n_layers(); ++l) {
    auto& book = stack.layers[l];
    std::mt19937_64 rng(derive_seed(seed, {l}));
    const auto rows = method == InitMethod::kKMeansPP
                          ? kmeans_pp_rows(residual, book.size(), rng)
                          : sample_rows(residual.rows(), book.size(), rng);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const auto src = residual.row(rows[j]);
      std::copy(src.begin(), src.end(), book.vectors.row(j).begin());
    }
    std::fill(book.usage_counts.begin(), book.usage_counts.end(), 0);
    std::fill(book.cluster_size_ema.begin(), book.cluster_size_ema.end(), 0.0);
    kernels::assign(book.vectors, residual, {}, {}, {}, idx);
    subtract_selected(residual, book.vectors, idx);
  }
}

Matrix<std::uint32_t> encode(const RvqStack& stack, const MatrixD& inputs) {
  stack.validate();
  check_dim(stack, inputs.cols());
  Matrix<std::uint32_t> out(inputs.rows(), stack.n_layers());
  MatrixD residual = inputs;
  std::vector<std::uint32_t> idx(inputs.rows());
  for (std::size_t l = 0; l < stack.n_layers(); ++l) {
    const auto& book = stack.layers[l].vectors;
    kernels::assign(book, residual, {}, {}, {}, idx);
    subtract_selected(residual, book, idx);
    for (std::size_t i = 0; i < inputs.rows(); ++i) out(i, l) = idx[i];
  }
  return out;
}

MatrixD decode(const RvqStack& stack, const Matrix<std::uint32_t>& indices) {
  require(indices.cols() == stack.n_layers() || indices.rows() == 0,
          ErrorKind::kShapeMismatch, "decode: layer count mismatch");
  MatrixD out(indices.rows(), stack.dim(), 0.0);
  for (std::size_t i = 0; i < indices.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t l = 0; l < indices.cols(); ++l) {
      const auto& book = stack.layers[l];
      const auto j = indices(i, l);
      if (j == kInactiveIndex || j == book.size()) continue;
      require(j < book.size(), ErrorKind::kIndexOutOfRange,
              "decode: codeword index out of range");
      const auto c = book.vectors.row(j);
      for (std::size_t d = 0; d < row.size(); ++d) row[d] += c[d];
    }
  }
  return out;
}

StepRecord train_step(RvqStack& stack, const MatrixD& batch,
                      std::span<const std::size_t> instance_of_row,
                      std::size_t n_instances, const TrainingSchedule& schedule,
                      const GumbelConfig& gumbel, const DropoutConfig& dropout,
                      const TrainOptions& opts, std::uint64_t step) {
  const std::size_t n = batch.rows();
  const std::size_t n_layers = stack.n_layers();
  require(n > 0, ErrorKind::kEmptyInput, "train_step: empty batch");
  check_dim(stack, batch.cols());

  std::vector<std::vector<std::uint8_t>> active(n_layers,
                                                std::vector<std::uint8_t>(n, 1));
  if (opts.dropout_enabled) {
    const std::uint64_t step_key = derive_seed(step, {0x64726f70ULL});
    for (std::size_t i = 0; i < n; ++i) {
      const auto mask = dropout.sample(n_layers, derive_seed(step_key, {i}));
      for (std::size_t l = 0; l < n_layers; ++l) active[l][i] = mask[l];
    }
  }

  const AssignOptions assign_opts{gumbel.enabled, gumbel.temperature,
                                  derive_seed(gumbel.seed, {step})};
  std::vector<std::uint64_t> keys(n);
  std::iota(keys.begin(), keys.end(), 0);

  StepRecord rec;
  rec.step = step;
  MatrixD residual = batch;
  std::vector<MatrixD> layer_inputs;
  std::vector<MatrixD> sums;
  std::vector<std::vector<std::size_t>> counts;
  std::vector<std::uint32_t> idx(n);
  for (std::size_t l = 0; l < n_layers; ++l) {
    auto& book = stack.layers[l];
    if (opts.restart) layer_inputs.push_back(residual);
    for (std::size_t i = 0; i < n; ++i) keys[i] = derive_seed(i, {l});
    kernels::assign(book.vectors, residual, active[l], keys, assign_opts, idx);

    // Reduction in ascending row order, independent of the thread count.
    MatrixD s(book.size(), book.dim(), 0.0);
    std::vector<std::size_t> c(book.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (idx[i] == kInactiveIndex) continue;
      auto acc = s.row(idx[i]);
      const auto r = residual.row(i);
      for (std::size_t d = 0; d < acc.size(); ++d) acc[d] += r[d];
      ++c[idx[i]];
    }
    subtract_selected(residual, book.vectors, idx);
    const auto used = static_cast<double>(
        std::count_if(c.begin(), c.end(), [](std::size_t x) { return x > 0; }));
    rec.utilization.push_back(used / static_cast<double>(book.size()));
    sums.push_back(std::move(s));
    counts.push_back(std::move(c));
  }

  // residual = batch - quantized, so the losses read it directly.
  double sq = 0.0;
  double abs = 0.0;
  for (double v : residual.flat()) {
    sq += v * v;
    abs += std::abs(v);
  }
  rec.commit_loss = sq / static_cast<double>(n);
  rec.feature_mae = abs / static_cast<double>(residual.size());

  for (std::size_t l = 0; l < n_layers; ++l) {
    auto& book = stack.layers[l];
    ema_update_inplace(book, sums[l], counts[l], opts.ema_mode);
    if (opts.restart) {
      restart_dead_entries_inplace(
          book, layer_inputs[l], opts.dead_threshold,
          derive_seed(opts.seed, {0x72737472ULL, step, l}));
    }
  }

  const std::uint64_t gate_step = std::min(step, schedule.total_steps);
  const auto gate = vq_replacement_gate(
      schedule, gate_step, derive_seed(opts.seed, "gate"), n_instances);
  std::size_t replaced_rows = 0;
  for (auto inst : instance_of_row) replaced_rows += gate[inst];
  rec.replace_fraction =
      static_cast<double>(replaced_rows) / static_cast<double>(n);
  rec.commit_weight = schedule.commit_weight(gate_step);
  return rec;
}

std::vector<std::vector<std::size_t>> plan_batches(std::size_t n_sequences,
                                                   const TrainOptions& opts,
                                                   std::size_t epoch) {
  std::vector<std::size_t> order(n_sequences);
  std::iota(order.begin(), order.end(), 0);
  if (opts.shuffle) {
    std::mt19937_64 rng(derive_seed(opts.seed, {0x73687566ULL, epoch}));
    for (std::size_t i = n_sequences; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
  }
  const std::size_t per = std::max<std::size_t>(opts.batch_instances, 1);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < n_sequences; i += per) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                         order.begin() + static_cast<std::ptrdiff_t>(
                                             std::min(i + per, n_sequences)));
  }
  return batches;
}

namespace {

MatrixD gather_batch(std::span<const FeatureSequence> corpus,
                     std::span<const std::size_t> members,
                     std::vector<std::size_t>* instance_of_row) {
  MatrixD batch;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& seq = corpus[members[k]];
    for (std::size_t r = 0; r < seq.size(); ++r) {
      batch.append_row(seq.vectors.row(r));
      if (instance_of_row) instance_of_row->push_back(k);
    }
  }
  return batch;
}

}  // namespace

RvqStack initial_stack(const RvqStack& stack,
                       std::span<const FeatureSequence> corpus,
                       const TrainOptions& opts) {
  RvqStack out = stack;
  if (opts.init == InitMethod::kProvided) return out;
  for (const auto& members : plan_batches(corpus.size(), opts, 0)) {
    const MatrixD batch = gather_batch(corpus, members, nullptr);
    if (batch.rows() == 0) continue;
    initialize_stack(out, batch, opts.init, derive_seed(opts.seed, "init"));
    break;
  }
  return out;
}

TrainResult train_rvq(const RvqStack& stack,
                      std::span<const FeatureSequence> corpus,
                      TrainingSchedule schedule, const GumbelConfig& gumbel,
                      const DropoutConfig& dropout, const TrainOptions& opts) {
  require(!corpus.empty(), ErrorKind::kEmptyInput, "train_rvq: empty corpus");
  require(!stack.layers.empty(), ErrorKind::kInvalidConfig,
          "train_rvq: stack has no layers");
  for (const auto& seq : corpus) check_dim(stack, seq.dim());
  schedule.validate();
  gumbel.validate();
  dropout.validate();

  TrainResult result{stack, {}};
  if (opts.epochs == 0) return result;
  result.stack = initial_stack(stack, corpus, opts);

  std::vector<std::vector<std::vector<std::size_t>>> plan;
  std::size_t n_steps = 0;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    plan.push_back(plan_batches(corpus.size(), opts, e));
    n_steps += plan.back().size();
  }
  if (schedule.total_steps == 0) schedule.total_steps = n_steps - 1;

  std::uint64_t step = 0;
  for (const auto& epoch : plan) {
    for (const auto& members : epoch) {
      std::vector<std::size_t> instance_of_row;
      const MatrixD batch = gather_batch(corpus, members, &instance_of_row);
      if (batch.rows() == 0) continue;
      result.report.steps.push_back(train_step(
          result.stack, batch, instance_of_row, members.size(), schedule,
          gumbel, dropout, opts, step));
      ++step;
    }
  }
  return result;
}

std::string to_jsonl(const StepRecord& rec) {
  nlohmann::ordered_json j;
  j["step"] = rec.step;
  j["commit_loss"] = rec.commit_loss;
  j["feature_mae"] = rec.feature_mae;
  j["utilization"] = rec.utilization;
  j["replace_fraction"] = rec.replace_fraction;
  j["commit_weight"] = rec.commit_weight;
  return j.dump();
}

}  // namespace rvqtok
