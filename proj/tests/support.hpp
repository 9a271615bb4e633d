// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Shared fixtures and hand-rolled generators for the test binaries.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "rvqtok/matrix.hpp"
#include "rvqtok/mel.hpp"

namespace rvqtok::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline MatrixD random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                             double lo = -1.0, double hi = 1.0) {
  MatrixD m(rows, cols);
  for (auto& v : m.flat()) v = uniform(rng, lo, hi);
  return m;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n,
                                         double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, lo, hi);
  return v;
}

// Sum of sinusoids plus white noise, amplitude kept inside [-1, 1].
inline AudioBuffer synth_clip(Rng& rng, double seconds,
                              std::uint32_t sr = 16000) {
  const std::size_t n = static_cast<std::size_t>(seconds * sr);
  const int n_tones = static_cast<int>(pick(rng, 1, 4));
  std::vector<double> freq, amp, phase;
  for (int i = 0; i < n_tones; ++i) {
    freq.push_back(uniform(rng, 80.0, 3000.0));
    amp.push_back(uniform(rng, 0.05, 0.25));
    phase.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
  }
  const double noise = uniform(rng, 0.005, 0.05);
  std::normal_distribution<double> gauss(0.0, 1.0);
  AudioBuffer a;
  a.sample_rate = sr;
  a.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double s = noise * gauss(rng);
    const double time = static_cast<double>(t) / sr;
    for (int i = 0; i < n_tones; ++i) {
      // Slow amplitude modulation so frames differ over time.
      const double env = 0.6 + 0.4 * std::sin(2.0 * std::numbers::pi * 0.7 *
                                              (i + 1) * time + phase[i]);
      s += amp[i] * env * std::sin(2.0 * std::numbers::pi * freq[i] * time + phase[i]);
    }
    a.samples[t] = std::clamp(s, -1.0, 1.0);
  }
  return a;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("rvqtok_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs a shell command, capturing stdout and stderr through files in `dir`.
inline RunResult run(const std::string& cmd, const TempDir& dir) {
  const auto out = dir / "cmd.stdout";
  const auto err = dir / "cmd.stderr";
  const int status = std::system(
      (cmd + " >" + out.string() + " 2>" + err.string()).c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace rvqtok::test
