// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "rvqtok/audio_io.hpp"
#include "rvqtok/error.hpp"
#include "rvqtok/mel.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace rvqtok;
using rvqtok::test::Rng;
using rvqtok::oracle::band_centre;
using rvqtok::oracle::naive_log_mel;

namespace {

// Independent frame counter: walk frame starts over the (virtually) padded
// signal.
std::size_t count_frames(std::size_t len, std::size_t n_fft, std::size_t hop,
                         bool center) {
  if (center) {
    std::size_t t = 0;
    for (std::size_t c = 0; c < len; c += hop) ++t;  // one frame per centre
    return t;
  }
  std::size_t t = 0;
  for (std::size_t s = 0; s + n_fft <= len; s += hop) ++t;
  return t;
}

MelSpectrogram mel_of(const MatrixD& m, const std::string& id = "x") {
  MelSpectrogram s;
  s.frames = m;
  s.frame_rate = 100.0;
  s.config_id = id;
  return s;
}

AudioBuffer sine(double hz, double seconds, std::uint32_t sr = 16000) {
  AudioBuffer a;
  a.sample_rate = sr;
  const std::size_t n = static_cast<std::size_t>(seconds * sr);
  for (std::size_t t = 0; t < n; ++t) {
    a.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * hz * t / sr));
  }
  return a;
}

}  // namespace

TEST_CASE("silence gives log(log_floor) everywhere") {
  AudioBuffer a;
  a.samples.assign(16000, 0.0);
  const MelConfig cfg;
  const auto mel = compute_mel(a, cfg);
  CHECK(mel.n_frames() == 100);
  CHECK(mel.n_mels() == 80);
  for (double v : mel.frames.flat()) CHECK(v == std::log(cfg.log_floor));
}

TEST_CASE("frame count matches the independent counter") {
  for (std::size_t len : {1u, 159u, 160u, 161u, 399u, 400u, 401u, 16000u, 16123u}) {
    for (bool center : {true, false}) {
      MelConfig cfg;
      cfg.pad = center ? PadMode::kCenterReflect : PadMode::kNone;
      CAPTURE(len);
      CAPTURE(center);
      CHECK(mel_frame_count(len, cfg) == count_frames(len, 400, 160, center));
      AudioBuffer a;
      a.samples.assign(len, 0.1);
      CHECK(compute_mel(a, cfg).n_frames() == count_frames(len, 400, 160, center));
    }
  }
  MelConfig cfg;
  CHECK(mel_frame_count(16000, cfg) == 100);
}

TEST_CASE("sine at a band centre peaks in that band") {
  MelConfig cfg;
  cfg.pad = PadMode::kNone;
  for (std::size_t band : {10u, 25u, 40u, 55u, 70u}) {
    const auto a = sine(band_centre(cfg, band), 0.25);
    const auto mel = compute_mel(a, cfg);
    for (std::size_t t = 0; t < mel.n_frames(); ++t) {
      const auto row = mel.frames.row(t);
      const auto best = std::max_element(row.begin(), row.end()) - row.begin();
      const auto want = naive_log_mel(a.samples, t * cfg.hop, cfg);
      const auto oracle = std::max_element(want.begin(), want.end()) - want.begin();
      CAPTURE(band);
      CAPTURE(t);
      CHECK(best == oracle);
      CHECK(static_cast<std::size_t>(best) == band);
    }
  }
}

TEST_CASE("compute_mel agrees with a naive DFT oracle") {
  Rng rng(7);
  for (bool center : {false, true}) {
    MelConfig cfg;
    cfg.n_fft = 256;
    cfg.hop = 100;
    cfg.n_mels = 24;
    cfg.fmin = 50.0;
    cfg.fmax = 7000.0;
    cfg.pad = center ? PadMode::kCenterReflect : PadMode::kNone;
    const AudioBuffer a = test::synth_clip(rng, 0.06);
    const auto mel = compute_mel(a, cfg);
    std::vector<double> x = a.samples;
    if (center) {
      x = oracle::reflect_pad(a.samples, cfg.n_fft / 2);
    }
    REQUIRE(mel.n_frames() > 0);
    for (std::size_t t = 0; t < mel.n_frames(); ++t) {
      const auto want = naive_log_mel(x, t * cfg.hop, cfg);
      for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        CHECK(mel.frames(t, m) == doctest::Approx(want[m]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("compute_mel is deterministic") {
  Rng rng(3);
  const auto a = test::synth_clip(rng, 1.0);
  const MelConfig cfg;
  CHECK(compute_mel(a, cfg).frames == compute_mel(a, cfg).frames);
}

TEST_CASE("compute_mel errors") {
  const MelConfig cfg;
  AudioBuffer empty;
  CHECK_THROWS_AS(compute_mel(empty, cfg), Error);
  try {
    compute_mel(empty, cfg);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyInput);
  }
  AudioBuffer bad;
  bad.samples = {0.0, std::nan(""), 0.0};
  try {
    compute_mel(bad, cfg);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidSample);
  }
  bad.samples = {0.0, INFINITY};
  CHECK_THROWS_AS(compute_mel(bad, cfg), Error);

  MelConfig c = cfg;
  c.hop = 500;
  CHECK_THROWS_AS(c.validate(), Error);
  c = cfg;
  c.fmax = 9000.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = cfg;
  c.log_floor = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = cfg;
  c.fmin = 8000.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("stack_frames arithmetic") {
  Rng rng(1);
  const auto mel = mel_of(test::random_matrix(rng, 100, 80));
  const auto f = stack_frames(mel, 8);
  CHECK(f.size() == 12);
  CHECK(f.dim() == 640);
  CHECK(f.frame_rate == 12.5);
  CHECK(f.stack_factor == 8);
  for (std::size_t t = 0; t < 12; ++t) {
    for (std::size_t j = 0; j < 8; ++j) {
      for (std::size_t m = 0; m < 80; ++m) {
        CHECK(f.vectors(t, j * 80 + m) == mel.frames(t * 8 + j, m));
      }
    }
  }

  const auto id = stack_frames(mel, 1);
  CHECK(id.vectors == mel.frames);
  CHECK(id.frame_rate == mel.frame_rate);

  const auto seven = mel_of(test::random_matrix(rng, 7, 3));
  const auto g = stack_frames(seven, 4);
  CHECK(g.size() == 1);
  CHECK(g.dim() == 12);

  try {
    stack_frames(mel, 0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidConfig);
  }
}

TEST_CASE("stack then unstack keeps the first T'*s frames") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t t = test::pick(rng, 0, 40);
    const std::size_t m = test::pick(rng, 1, 6);
    const auto s = static_cast<std::uint32_t>(test::pick(rng, 1, 9));
    const auto mel = mel_of(test::random_matrix(rng, t, m));
    const auto back = unstack_frames(stack_frames(mel, s), static_cast<std::uint32_t>(m));
    const std::size_t keep = (t / s) * s;
    REQUIRE(back.n_frames() == keep);
    for (std::size_t r = 0; r < keep; ++r) {
      for (std::size_t c = 0; c < m; ++c) CHECK(back.frames(r, c) == mel.frames(r, c));
    }
  }
}

TEST_CASE("reconstruction_loss examples") {
  Rng rng(5);
  const auto gt = mel_of(test::random_matrix(rng, 4, 3));
  const std::vector<MelSpectrogram> same{gt, gt};
  CHECK(reconstruction_loss(gt, same) == 0.0);

  const auto z = mel_of(MatrixD(1, 1, 0.0));
  const std::vector<MelSpectrogram> two{mel_of(MatrixD(1, 1, 2.0))};
  CHECK(reconstruction_loss(z, two) == doctest::Approx(6.0));

  for (int trial = 0; trial < 100; ++trial) {
    const auto g = mel_of(test::random_matrix(rng, 4, 3));
    const std::vector<MelSpectrogram> rs{mel_of(test::random_matrix(rng, 4, 3)),
                                         mel_of(test::random_matrix(rng, 4, 3))};
    double want = 0.0;
    for (const auto& r : rs) {
      double l1 = 0.0, l2 = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
          const double d = g.frames(i, j) - r.frames(i, j);
          l1 += std::abs(d) / 12.0;
          l2 += d * d / 12.0;
        }
      }
      want += l1 + l2;
    }
    CHECK(reconstruction_loss(g, rs) == doctest::Approx(want).epsilon(1e-12));
    CHECK(reconstruction_loss(g, rs) > 0.0);
  }
}

TEST_CASE("reconstruction_loss errors") {
  const auto gt = mel_of(MatrixD(2, 2, 0.0));
  const std::vector<MelSpectrogram> none;
  try {
    reconstruction_loss(gt, none);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyInput);
  }
  const std::vector<MelSpectrogram> wrong{mel_of(MatrixD(2, 3, 0.0))};
  try {
    reconstruction_loss(gt, wrong);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShapeMismatch);
  }
  const std::vector<MelSpectrogram> other_cfg{mel_of(MatrixD(2, 2, 0.0), "y")};
  CHECK_THROWS_AS(reconstruction_loss(gt, other_cfg), Error);
}

TEST_CASE("multiscale loss is the per-scale sum") {
  Rng rng(9);
  const auto gt = test::synth_clip(rng, 0.5);
  auto recon = gt;
  for (auto& s : recon.samples) s += 0.01 * test::uniform(rng, -1.0, 1.0);
  const auto scales = default_multiscale_configs();

  CHECK(multiscale_mel_loss(gt, gt, scales) == 0.0);

  double want = 0.0;
  for (const auto& cfg : scales) {
    const std::vector<MelSpectrogram> r{compute_mel(recon, cfg)};
    const double one = reconstruction_loss(compute_mel(gt, cfg), r);
    CHECK(multiscale_mel_loss(gt, recon, std::span(&cfg, 1)) == doctest::Approx(one));
    want += one;
  }
  CHECK(multiscale_mel_loss(gt, recon, scales) == doctest::Approx(want).epsilon(1e-12));

  // Additivity over disjoint scale lists.
  std::vector<MelConfig> three = scales;
  MelConfig c;
  c.n_fft = 256;
  c.hop = 64;
  three.push_back(c);
  const double a = multiscale_mel_loss(gt, recon, scales);
  const double b = multiscale_mel_loss(gt, recon, std::span(&c, 1));
  CHECK(multiscale_mel_loss(gt, recon, three) == doctest::Approx(a + b).epsilon(1e-12));

  auto shorter = recon;
  shorter.samples.pop_back();
  try {
    multiscale_mel_loss(gt, shorter, scales);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShapeMismatch);
  }
}

TEST_CASE("mel_mae") {
  CHECK(mel_mae(mel_of(MatrixD(1, 2, {1.0, 3.0})), mel_of(MatrixD(1, 2, {2.0, 5.0}))) ==
        doctest::Approx(1.5));
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t r = test::pick(rng, 1, 8), c = test::pick(rng, 1, 8);
    const auto a = mel_of(test::random_matrix(rng, r, c));
    const auto b = mel_of(test::random_matrix(rng, r, c));
    const auto d = mel_of(test::random_matrix(rng, r, c));
    double want = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) want += std::abs(a.frames(i, j) - b.frames(i, j));
    }
    want /= static_cast<double>(r * c);
    CHECK(mel_mae(a, b) == doctest::Approx(want).epsilon(1e-12));
    CHECK(mel_mae(a, a) == 0.0);
    CHECK(mel_mae(a, b) == mel_mae(b, a));
    CHECK(mel_mae(a, d) <= mel_mae(a, b) + mel_mae(b, d) + 1e-12);
  }
  try {
    mel_mae(mel_of(MatrixD(1, 2, 0.0)), mel_of(MatrixD(2, 1, 0.0)));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kShapeMismatch);
  }
}

TEST_CASE("8 s clip frames at 12.5 Hz") {
  Rng rng(4);
  const auto a = test::synth_clip(rng, 8.0);
  const auto f = stack_frames(compute_mel(a, MelConfig{}), 8);
  CHECK(f.frame_rate == 12.5);
  CHECK(std::abs(static_cast<double>(f.size()) / 8.0 - 12.5) <= 1.0 / 8.0);
}

TEST_CASE("wav and AFV1 round trips") {
  test::TempDir dir;
  AudioBuffer a;
  a.sample_rate = 22050;
  for (int i = -5; i <= 5; ++i) a.samples.push_back(i / 5.0);
  write_wav(dir / "a.wav", a);
  const auto b = read_wav(dir / "a.wav");
  CHECK(b.sample_rate == 22050);
  REQUIRE(b.samples.size() == a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(b.samples[i] == doctest::Approx(a.samples[i]).epsilon(1e-4));
  }

  FeatureSequence f;
  f.vectors = MatrixD(2, 3, {1.5, -2.0, 0.25, 4.0, 5.0, 6.0});
  f.frame_rate = 12.5;
  write_afv1(dir / "f.afv1", f);
  const auto g = read_afv1(dir / "f.afv1");
  CHECK(g.vectors == f.vectors);
  CHECK(g.frame_rate == 12.5);
  // Header then float32 payload.
  CHECK(test::slurp(dir / "f.afv1").size() == 4 + 4 + 4 + 8 + 6 * 4);
  CHECK(test::slurp(dir / "f.afv1").substr(0, 4) == "AFV1");

  try {
    read_afv1(dir / "missing.afv1");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  test::spit(dir / "junk.afv1", "NOPE1234");
  try {
    read_afv1(dir / "junk.afv1");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDataFormat);
  }
}
