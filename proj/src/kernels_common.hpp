// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Per-item routines shared by the serial and OpenMP kernels.

#pragma once

#include <fftw3.h>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "rvqtok/matrix.hpp"
#include "rvqtok/mel.hpp"

namespace rvqtok::kernels::detail {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Scratch for one real-to-complex transform of length n_fft. Not shareable
// across threads; the plan it references is.
class FftScratch {
 public:
  explicit FftScratch(std::size_t n_fft);

  void power_spectrum(std::span<const double> frame,
                      std::span<const double> window, std::span<double> power);

 private:
  std::size_t n_fft_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

std::vector<double> periodic_hann(std::size_t n);

void log_mel_frame(std::span<const double> padded, std::size_t t,
                   const MelConfig& cfg, const MatrixD& filterbank,
                   std::span<const double> window, FftScratch& scratch,
                   std::span<double> power, std::span<double> out);

}  // namespace rvqtok::kernels::detail
