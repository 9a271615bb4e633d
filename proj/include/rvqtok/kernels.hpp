// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops. Each kernel has an OpenMP version in
// rvqtok::kernels and a plain-loop reference in rvqtok::kernels::serial.
// Both call the same per-item routine, so their outputs are bit-identical
// for any thread count.

#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include "rvqtok/matrix.hpp"

namespace rvqtok {

struct MelConfig;

inline constexpr std::uint32_t kInactiveIndex =
    std::numeric_limits<std::uint32_t>::max();

struct AssignOptions {
  bool gumbel = false;
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

namespace kernels {

double squared_distance(std::span<const double> a, std::span<const double> b);

// Selects one codeword for x: argmin squared distance, or with gumbel
// enabled, argmax of (-d^2 / temperature + Gumbel noise). noise_key
// identifies the draw; equal keys give equal noise.
std::uint32_t select_codeword(const MatrixD& codebook,
                              std::span<const double> x,
                              const AssignOptions& opts,
                              std::uint64_t noise_key);

// out[i] = select_codeword(codebook, points.row(i), opts, noise_keys[i]) for
// rows with active[i] != 0 (or all rows if active is empty); kInactiveIndex
// otherwise. noise_keys may be empty, in which case the row index is used.
void assign(const MatrixD& codebook, const MatrixD& points,
            std::span<const std::uint8_t> active,
            std::span<const std::uint64_t> noise_keys,
            const AssignOptions& opts, std::span<std::uint32_t> out);

// Log-mel frames from an already padded signal.
MatrixD log_mel_frames(std::span<const double> padded, std::size_t n_frames,
                       const MelConfig& cfg, const MatrixD& filterbank);

namespace serial {

void assign(const MatrixD& codebook, const MatrixD& points,
            std::span<const std::uint8_t> active,
            std::span<const std::uint64_t> noise_keys,
            const AssignOptions& opts, std::span<std::uint32_t> out);

MatrixD log_mel_frames(std::span<const double> padded, std::size_t n_frames,
                       const MelConfig& cfg, const MatrixD& filterbank);

}  // namespace serial

void set_num_threads(int n);
int max_threads();

}  // namespace kernels
}  // namespace rvqtok
