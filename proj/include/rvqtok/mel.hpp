// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Log-mel frontend, frame stacking to the tokenizer rate, and the mel
// reconstruction losses used to train and score the tokenizer.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rvqtok/matrix.hpp"

namespace rvqtok {

struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate = 16000;
};

enum class PadMode {
  kCenterReflect,  // ceil(len / hop) frames, frame t centred on sample t*hop
  kNone,           // floor((len - n_fft) / hop) + 1 frames
};

struct MelConfig {
  std::uint32_t n_fft = 400;
  std::uint32_t hop = 160;
  std::uint32_t n_mels = 80;
  std::uint32_t sample_rate = 16000;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
  PadMode pad = PadMode::kCenterReflect;

  // Throws kInvalidConfig.
  void validate() const;
  // Stable textual identity of the settings; two spectrograms are comparable
  // only if their ids match.
  std::string id() const;
};

// Default multi-scale pair: (1024, 256) and (512, 128).
std::vector<MelConfig> default_multiscale_configs();

struct MelSpectrogram {
  MatrixD frames;  // T x n_mels, natural-log energies
  double frame_rate = 0.0;
  std::string config_id;

  std::size_t n_frames() const { return frames.rows(); }
  std::size_t n_mels() const { return frames.cols(); }
};

struct FeatureSequence {
  MatrixD vectors;  // T' x (n_mels * stack_factor)
  double frame_rate = 0.0;
  std::uint32_t stack_factor = 1;

  std::size_t size() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
};

// Triangular filters on the HTK mel scale, peak-normalised to 1.
// Returns n_mels x (n_fft/2 + 1).
MatrixD mel_filterbank(const MelConfig& cfg);

std::size_t mel_frame_count(std::size_t n_samples, const MelConfig& cfg);

MelSpectrogram compute_mel(const AudioBuffer& audio, const MelConfig& cfg);

FeatureSequence stack_frames(const MelSpectrogram& mel,
                             std::uint32_t stack_factor);

// Inverse of stack_frames over the retained groups.
MelSpectrogram unstack_frames(const FeatureSequence& features,
                              std::uint32_t n_mels,
                              const std::string& config_id = {});

// Sum over reconstructions of mean-L1 + mean-L2 against gt.
double reconstruction_loss(const MelSpectrogram& gt,
                           std::span<const MelSpectrogram> recons);

double multiscale_mel_loss(const AudioBuffer& gt_audio,
                           const AudioBuffer& recon_audio,
                           std::span<const MelConfig> scales);

double mel_mae(const MelSpectrogram& gt, const MelSpectrogram& recon);

// Mean absolute difference of two equally shaped matrices.
double mean_abs_diff(const MatrixD& a, const MatrixD& b);

}  // namespace rvqtok
