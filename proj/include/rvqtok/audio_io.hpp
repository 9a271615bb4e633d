// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include "rvqtok/mel.hpp"

namespace rvqtok {

// 16-bit little-endian PCM mono WAV.
AudioBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);

// Headerless float32 little-endian samples.
AudioBuffer read_raw_f32(const std::filesystem::path& path,
                         std::uint32_t sample_rate);

// "AFV1" feature file: magic, u32 T', u32 D, f64 frame_rate, then T' x D
// float32 LE row-major. The stack factor is not stored; readers get 1.
void write_afv1(const std::filesystem::path& path,
                const FeatureSequence& features);
FeatureSequence read_afv1(const std::filesystem::path& path);

}  // namespace rvqtok
