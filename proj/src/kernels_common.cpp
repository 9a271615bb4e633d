// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels_common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "rvqtok/kernels.hpp"
#include "rvqtok/seed.hpp"

namespace rvqtok::kernels {

namespace detail {
namespace {

// FFTW planning is not thread-safe; execution with the new-array interface
// is. Plans live for the process lifetime.
std::mutex g_plan_mutex;
std::map<std::size_t, fftw_plan> g_plans;

fftw_plan plan_for(std::size_t n_fft) {
  std::lock_guard lock(g_plan_mutex);
  auto it = g_plans.find(n_fft);
  if (it != g_plans.end()) return it->second;
  auto* in = static_cast<double*>(fftw_malloc(sizeof(double) * n_fft));
  auto* out = static_cast<fftw_complex*>(
      fftw_malloc(sizeof(fftw_complex) * (n_fft / 2 + 1)));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), in, out,
                                        FFTW_ESTIMATE);
  fftw_free(in);
  fftw_free(out);
  g_plans.emplace(n_fft, plan);
  return plan;
}

}  // namespace

FftScratch::FftScratch(std::size_t n_fft)
    : n_fft_(n_fft),
      in_(static_cast<double*>(fftw_malloc(sizeof(double) * n_fft))),
      out_(static_cast<fftw_complex*>(
          fftw_malloc(sizeof(fftw_complex) * (n_fft / 2 + 1)))),
      plan_(plan_for(n_fft)) {}

void FftScratch::power_spectrum(std::span<const double> frame,
                                std::span<const double> window,
                                std::span<double> power) {
  double* in = in_.get();
  for (std::size_t i = 0; i < n_fft_; ++i) in[i] = frame[i] * window[i];
  fftw_execute_dft_r2c(plan_, in, out_.get());
  const fftw_complex* out = out_.get();
  for (std::size_t k = 0; k <= n_fft_ / 2; ++k) {
    power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  }
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

void log_mel_frame(std::span<const double> padded, std::size_t t,
                   const MelConfig& cfg, const MatrixD& filterbank,
                   std::span<const double> window, FftScratch& scratch,
                   std::span<double> power, std::span<double> out) {
  scratch.power_spectrum(padded.subspan(t * cfg.hop, cfg.n_fft), window,
                         power);
  for (std::size_t m = 0; m < filterbank.rows(); ++m) {
    auto weights = filterbank.row(m);
    double energy = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      energy += weights[k] * power[k];
    }
    out[m] = std::log(std::max(energy, cfg.log_floor));
  }
}

}  // namespace detail

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

namespace {

// Uniform in the open interval (0, 1).
double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::uint32_t select_codeword(const MatrixD& codebook,
                              std::span<const double> x,
                              const AssignOptions& opts,
                              std::uint64_t noise_key) {
  const std::size_t k = codebook.rows();
  std::uint32_t best = 0;
  if (!opts.gumbel) {
    double best_d = squared_distance(codebook.row(0), x);
    for (std::size_t j = 1; j < k; ++j) {
      const double d = squared_distance(codebook.row(j), x);
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::uint32_t>(j);
      }
    }
    return best;
  }
  const std::uint64_t stream = derive_seed(opts.seed, {noise_key});
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    const double d = squared_distance(codebook.row(j), x);
    const double u = unit_open(mix64(stream + j));
    const double score = -d / opts.temperature - std::log(-std::log(u));
    if (score > best_score || j == 0) {
      best_score = score;
      best = static_cast<std::uint32_t>(j);
    }
  }
  return best;
}

}  // namespace rvqtok::kernels
