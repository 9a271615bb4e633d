// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/mel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rvqtok/error.hpp"
#include "rvqtok/kernels.hpp"

namespace rvqtok {

void MelConfig::validate() const {
  require(n_fft > 0 && hop > 0 && hop <= n_fft, ErrorKind::kInvalidConfig,
          "mel config: need 0 < hop <= n_fft");
  require(n_mels > 0, ErrorKind::kInvalidConfig, "mel config: n_mels == 0");
  require(sample_rate > 0, ErrorKind::kInvalidConfig,
          "mel config: sample_rate == 0");
  require(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0,
          ErrorKind::kInvalidConfig,
          "mel config: need 0 <= fmin < fmax <= sample_rate / 2");
  require(log_floor > 0.0, ErrorKind::kInvalidConfig,
          "mel config: log_floor must be positive");
}

std::string MelConfig::id() const {
  std::ostringstream os;
  os << "mel:n_fft=" << n_fft << ",hop=" << hop << ",n_mels=" << n_mels
     << ",sr=" << sample_rate << ",fmin=" << fmin << ",fmax=" << fmax
     << ",floor=" << log_floor
     << ",pad=" << (pad == PadMode::kCenterReflect ? "center" : "none");
  return os.str();
}

std::vector<MelConfig> default_multiscale_configs() {
  MelConfig a;
  a.n_fft = 1024;
  a.hop = 256;
  MelConfig b;
  b.n_fft = 512;
  b.hop = 128;
  return {a, b};
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
  if (len == 1) return 0;
  const auto n = static_cast<std::ptrdiff_t>(len);
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}

}  // namespace

MatrixD mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const std::size_t n_bins = cfg.n_fft / 2 + 1;
  MatrixD fb(cfg.n_mels, n_bins, 0.0);
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(cfg.fmax);
  std::vector<double> edges(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(cfg.n_mels + 1));
  }
  const double bin_hz =
      static_cast<double>(cfg.sample_rate) / static_cast<double>(cfg.n_fft);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb(m, k) = w;
    }
  }
  return fb;
}

std::size_t mel_frame_count(std::size_t n_samples, const MelConfig& cfg) {
  if (cfg.pad == PadMode::kCenterReflect) {
    return (n_samples + cfg.hop - 1) / cfg.hop;
  }
  if (n_samples < cfg.n_fft) return 0;
  return (n_samples - cfg.n_fft) / cfg.hop + 1;
}

MelSpectrogram compute_mel(const AudioBuffer& audio, const MelConfig& cfg) {
  cfg.validate();
  require(!audio.samples.empty(), ErrorKind::kEmptyInput,
          "compute_mel: empty audio");
  require(audio.sample_rate == cfg.sample_rate, ErrorKind::kInvalidConfig,
          "compute_mel: audio sample rate does not match mel config");
  for (double s : audio.samples) {
    require(std::isfinite(s), ErrorKind::kInvalidSample,
            "compute_mel: non-finite sample");
  }

  const std::size_t len = audio.samples.size();
  const std::size_t n_frames = mel_frame_count(len, cfg);

  std::vector<double> padded;
  if (cfg.pad == PadMode::kCenterReflect) {
    const std::size_t half = cfg.n_fft / 2;
    padded.resize(len + 2 * half);
    for (std::size_t i = 0; i < padded.size(); ++i) {
      const auto src = static_cast<std::ptrdiff_t>(i) -
                       static_cast<std::ptrdiff_t>(half);
      padded[i] = audio.samples[reflect_index(src, len)];
    }
  } else {
    padded = audio.samples;
  }

  MelSpectrogram mel;
  mel.frames =
      kernels::log_mel_frames(padded, n_frames, cfg, mel_filterbank(cfg));
  mel.frame_rate =
      static_cast<double>(cfg.sample_rate) / static_cast<double>(cfg.hop);
  mel.config_id = cfg.id();
  return mel;
}

FeatureSequence stack_frames(const MelSpectrogram& mel,
                             std::uint32_t stack_factor) {
  require(stack_factor >= 1, ErrorKind::kInvalidConfig,
          "stack_frames: stack_factor must be >= 1");
  const std::size_t groups = mel.n_frames() / stack_factor;
  const std::size_t dim = mel.n_mels() * stack_factor;
  // Row-major storage makes a group of s consecutive frames already
  // contiguous, so stacking is a copy of the retained prefix.
  std::vector<double> data(mel.frames.data().begin(),
                           mel.frames.data().begin() +
                               static_cast<std::ptrdiff_t>(groups * dim));
  FeatureSequence out;
  out.vectors = MatrixD(groups, dim, std::move(data));
  out.frame_rate = mel.frame_rate / stack_factor;
  out.stack_factor = stack_factor;
  return out;
}

MelSpectrogram unstack_frames(const FeatureSequence& features,
                              std::uint32_t n_mels,
                              const std::string& config_id) {
  require(n_mels > 0 && features.dim() % n_mels == 0,
          ErrorKind::kShapeMismatch,
          "unstack_frames: feature dim is not a multiple of n_mels");
  const std::size_t s = features.dim() / n_mels;
  MelSpectrogram mel;
  mel.frames = MatrixD(features.size() * s, n_mels, features.vectors.data());
  mel.frame_rate = features.frame_rate * static_cast<double>(s);
  mel.config_id = config_id;
  return mel;
}

double mean_abs_diff(const MatrixD& a, const MatrixD& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          ErrorKind::kShapeMismatch, "mean_abs_diff: shape mismatch");
  require(!a.empty(), ErrorKind::kEmptyInput, "mean_abs_diff: no cells");
  double acc = 0.0;
  const auto x = a.flat();
  const auto y = b.flat();
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::abs(x[i] - y[i]);
  return acc / static_cast<double>(x.size());
}

namespace {

void check_comparable(const MelSpectrogram& gt, const MelSpectrogram& r) {
  require(gt.frames.rows() == r.frames.rows() &&
              gt.frames.cols() == r.frames.cols(),
          ErrorKind::kShapeMismatch, "mel shapes differ");
  require(gt.config_id == r.config_id, ErrorKind::kShapeMismatch,
          "mel config ids differ");
}

}  // namespace

double reconstruction_loss(const MelSpectrogram& gt,
                           std::span<const MelSpectrogram> recons) {
  require(!recons.empty(), ErrorKind::kEmptyInput,
          "reconstruction_loss: no reconstructions");
  require(!gt.frames.empty(), ErrorKind::kEmptyInput,
          "reconstruction_loss: empty spectrogram");
  const auto g = gt.frames.flat();
  const double n = static_cast<double>(g.size());
  double total = 0.0;
  for (const auto& r : recons) {
    check_comparable(gt, r);
    const auto x = r.frames.flat();
    double l1 = 0.0;
    double l2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = g[i] - x[i];
      l1 += std::abs(d);
      l2 += d * d;
    }
    total += l1 / n + l2 / n;
  }
  return total;
}

double multiscale_mel_loss(const AudioBuffer& gt_audio,
                           const AudioBuffer& recon_audio,
                           std::span<const MelConfig> scales) {
  require(!scales.empty(), ErrorKind::kEmptyInput,
          "multiscale_mel_loss: no scales");
  require(gt_audio.samples.size() == recon_audio.samples.size() &&
              gt_audio.sample_rate == recon_audio.sample_rate,
          ErrorKind::kShapeMismatch,
          "multiscale_mel_loss: audio length or rate mismatch");
  double total = 0.0;
  for (const auto& cfg : scales) {
    const MelSpectrogram recon = compute_mel(recon_audio, cfg);
    total += reconstruction_loss(compute_mel(gt_audio, cfg),
                                 std::span<const MelSpectrogram>(&recon, 1));
  }
  return total;
}

double mel_mae(const MelSpectrogram& gt, const MelSpectrogram& recon) {
  require(gt.frames.rows() == recon.frames.rows() &&
              gt.frames.cols() == recon.frames.cols(),
          ErrorKind::kShapeMismatch, "mel_mae: shape mismatch");
  return mean_abs_diff(gt.frames, recon.frames);
}

}  // namespace rvqtok
