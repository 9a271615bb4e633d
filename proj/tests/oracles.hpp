// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference computations written from the definitions, with no
// calls into the library under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "rvqtok/mel.hpp"

namespace rvqtok::oracle {

inline double htk_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double htk_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Centre frequency of band m; m = n_mels is the right edge of the last band.
inline double band_centre(const MelConfig& cfg, std::size_t m) {
  const double lo = htk_mel(cfg.fmin), hi = htk_mel(cfg.fmax);
  return htk_hz(lo + (hi - lo) * static_cast<double>(m + 1) /
                         static_cast<double>(cfg.n_mels + 1));
}

inline double tri_weight(const MelConfig& cfg, std::size_t m, double f) {
  const double a = band_centre(cfg, m);
  const double l = m == 0 ? htk_hz(htk_mel(cfg.fmin)) : band_centre(cfg, m - 1);
  const double r = band_centre(cfg, m + 1);
  if (f > l && f <= a) return (f - l) / (a - l);
  if (f > a && f < r) return (r - f) / (r - a);
  return 0.0;
}

// Log-mel of one frame starting at `start`, by naive DFT.
inline std::vector<double> naive_log_mel(const std::vector<double>& x,
                                         std::size_t start, const MelConfig& cfg) {
  const std::size_t n = cfg.n_fft;
  std::vector<double> power(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
      acc += w * x[start + i] *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / double(n));
    }
    power[k] = std::norm(acc);
  }
  std::vector<double> out(cfg.n_mels);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    double e = 0.0;
    for (std::size_t k = 0; k <= n / 2; ++k) {
      e += tri_weight(cfg, m, k * double(cfg.sample_rate) / n) * power[k];
    }
    out[m] = std::log(std::max(e, cfg.log_floor));
  }
  return out;
}

// n_fft/2 mirrored samples on each side, edge sample not repeated.
inline std::vector<double> reflect_pad(const std::vector<double>& s, std::size_t h) {
  std::vector<double> p;
  for (std::size_t i = h; i >= 1; --i) p.push_back(s[i]);
  p.insert(p.end(), s.begin(), s.end());
  for (std::size_t i = 1; i <= h; ++i) p.push_back(s[s.size() - 1 - i]);
  return p;
}

// Whole log-mel spectrogram, frames listed until the next one would overrun.
inline std::vector<std::vector<double>> naive_spectrogram(std::vector<double> x,
                                                          const MelConfig& cfg) {
  std::size_t n_frames = 0;
  if (cfg.pad == PadMode::kCenterReflect) {
    for (std::size_t c = 0; c < x.size(); c += cfg.hop) ++n_frames;
    x = reflect_pad(x, cfg.n_fft / 2);
  } else {
    for (std::size_t s = 0; s + cfg.n_fft <= x.size(); s += cfg.hop) ++n_frames;
  }
  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < n_frames; ++t) out.push_back(naive_log_mel(x, t * cfg.hop, cfg));
  return out;
}

// mean |a - b| + mean (a - b)^2 over equally shaped frame lists.
inline double l1_plus_l2(const std::vector<std::vector<double>>& a,
                         const std::vector<std::vector<double>>& b) {
  double l1 = 0.0, l2 = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t m = 0; m < a[t].size(); ++m) {
      const double d = a[t][m] - b[t][m];
      l1 += std::abs(d);
      l2 += d * d;
      ++n;
    }
  }
  return (l1 + l2) / static_cast<double>(n);
}

// Word-level edit distance, full table.
inline std::size_t edit_distance(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t del = d[i - 1][j] + 1;
      const std::size_t ins = d[i][j - 1] + 1;
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] != b[j - 1]);
      d[i][j] = std::min(del, std::min(ins, sub));
    }
  }
  return d[a.size()][b.size()];
}

}  // namespace rvqtok::oracle
