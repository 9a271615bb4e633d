// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Reference loops. Kept for equivalence tests and the benchmark baseline.

#include <vector>

#include "kernels_common.hpp"
#include "rvqtok/kernels.hpp"

namespace rvqtok::kernels::serial {

void assign(const MatrixD& codebook, const MatrixD& points,
            std::span<const std::uint8_t> active,
            std::span<const std::uint64_t> noise_keys,
            const AssignOptions& opts, std::span<std::uint32_t> out) {
  for (std::size_t i = 0; i < points.rows(); ++i) {
    if (!active.empty() && active[i] == 0) {
      out[i] = kInactiveIndex;
      continue;
    }
    const std::uint64_t key = noise_keys.empty() ? i : noise_keys[i];
    out[i] = select_codeword(codebook, points.row(i), opts, key);
  }
}

MatrixD log_mel_frames(std::span<const double> padded, std::size_t n_frames,
                       const MelConfig& cfg, const MatrixD& filterbank) {
  MatrixD out(n_frames, cfg.n_mels);
  const auto window = detail::periodic_hann(cfg.n_fft);
  detail::FftScratch scratch(cfg.n_fft);
  std::vector<double> power(cfg.n_fft / 2 + 1);
  for (std::size_t t = 0; t < n_frames; ++t) {
    detail::log_mel_frame(padded, t, cfg, filterbank, window, scratch, power,
                          out.row(t));
  }
  return out;
}

}  // namespace rvqtok::kernels::serial
