// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <vector>

#include "rvqtok/binary_io.hpp"
#include "rvqtok/error.hpp"

namespace rvqtok {

namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo,
          "cannot open for reading: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t u32_at(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint16_t u16_at(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const std::string name = path.string();
  require(bytes.size() >= 12 && std::equal(bytes.begin(), bytes.begin() + 4,
                                           "RIFF") &&
              std::equal(bytes.begin() + 8, bytes.begin() + 12, "WAVE"),
          ErrorKind::kDataFormat, name + ": not a RIFF/WAVE file");

  AudioBuffer audio;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + static_cast<std::ptrdiff_t>(off),
                         bytes.begin() + static_cast<std::ptrdiff_t>(off + 4));
    const std::size_t size = u32_at(bytes, off + 4);
    const std::size_t body = off + 8;
    require(body + size <= bytes.size(), ErrorKind::kDataFormat,
            name + ": truncated chunk " + id);
    if (id == "fmt ") {
      require(size >= 16, ErrorKind::kDataFormat, name + ": short fmt chunk");
      const auto format = u16_at(bytes, body);
      const auto channels = u16_at(bytes, body + 2);
      const auto bits = u16_at(bytes, body + 14);
      require(format == 1 && channels == 1 && bits == 16,
              ErrorKind::kDataFormat,
              name + ": only 16-bit PCM mono WAV is supported");
      audio.sample_rate = u32_at(bytes, body + 4);
      have_fmt = true;
    } else if (id == "data") {
      require(have_fmt, ErrorKind::kDataFormat, name + ": data before fmt");
      audio.samples.resize(size / 2);
      for (std::size_t i = 0; i < audio.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(u16_at(bytes, body + 2 * i));
        audio.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return audio;
    }
    off = body + size + (size & 1);
  }
  fail(ErrorKind::kDataFormat, name + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  io::Writer w(path);
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  w.magic("RIFF");
  w.put<std::uint32_t>(36 + data_bytes);
  w.magic("WAVE");
  w.magic("fmt ");
  w.put<std::uint32_t>(16);
  w.put<std::uint16_t>(1);
  w.put<std::uint16_t>(1);
  w.put<std::uint32_t>(audio.sample_rate);
  w.put<std::uint32_t>(audio.sample_rate * 2);
  w.put<std::uint16_t>(2);
  w.put<std::uint16_t>(16);
  w.magic("data");
  w.put<std::uint32_t>(data_bytes);
  for (double s : audio.samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    w.put<std::int16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0)));
  }
  w.close();
}

AudioBuffer read_raw_f32(const std::filesystem::path& path,
                         std::uint32_t sample_rate) {
  require(sample_rate > 0, ErrorKind::kInvalidConfig,
          "raw input needs a positive sample rate");
  const auto bytes = slurp(path);
  require(bytes.size() % 4 == 0, ErrorKind::kDataFormat,
          path.string() + ": size is not a multiple of 4");
  AudioBuffer audio;
  audio.sample_rate = sample_rate;
  audio.samples.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 4 * i, 4);
    audio.samples[i] = f;
  }
  return audio;
}

void write_afv1(const std::filesystem::path& path,
                const FeatureSequence& features) {
  io::Writer w(path);
  w.magic("AFV1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(features.size()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(features.dim()));
  w.put<double>(features.frame_rate);
  for (double v : features.vectors.flat()) w.put<float>(static_cast<float>(v));
  w.close();
}

FeatureSequence read_afv1(const std::filesystem::path& path) {
  io::Reader r(path);
  r.expect_magic("AFV1");
  const auto rows = r.get<std::uint32_t>();
  const auto cols = r.get<std::uint32_t>();
  FeatureSequence f;
  f.frame_rate = r.get<double>();
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (auto& v : data) v = r.get<float>();
  r.expect_eof();
  f.vectors = MatrixD(rows, cols, std::move(data));
  return f;
}

}  // namespace rvqtok
