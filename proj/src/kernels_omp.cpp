// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <cstdint>
#include <vector>

#include "kernels_common.hpp"
#include "rvqtok/kernels.hpp"

namespace rvqtok::kernels {

void assign(const MatrixD& codebook, const MatrixD& points,
            std::span<const std::uint8_t> active,
            std::span<const std::uint64_t> noise_keys,
            const AssignOptions& opts, std::span<std::uint32_t> out) {
  const auto n = static_cast<std::int64_t>(points.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    if (!active.empty() && active[r] == 0) {
      out[r] = kInactiveIndex;
      continue;
    }
    const std::uint64_t key = noise_keys.empty() ? r : noise_keys[r];
    out[r] = select_codeword(codebook, points.row(r), opts, key);
  }
}

MatrixD log_mel_frames(std::span<const double> padded, std::size_t n_frames,
                       const MelConfig& cfg, const MatrixD& filterbank) {
  MatrixD out(n_frames, cfg.n_mels);
  const auto window = detail::periodic_hann(cfg.n_fft);
  const auto n = static_cast<std::int64_t>(n_frames);
#pragma omp parallel
  {
    detail::FftScratch scratch(cfg.n_fft);
    std::vector<double> power(cfg.n_fft / 2 + 1);
#pragma omp for schedule(static)
    for (std::int64_t t = 0; t < n; ++t) {
      detail::log_mel_frame(padded, static_cast<std::size_t>(t), cfg,
                            filterbank, window, scratch, power,
                            out.row(static_cast<std::size_t>(t)));
    }
  }
  return out;
}

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace rvqtok::kernels
