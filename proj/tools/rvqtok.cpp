// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

// Batch command-line front end.
//
// Exit codes: 0 success, 2 I/O, 3 shape/config, 4 data format,
// 5 scorer plugin protocol.
//
// Every subcommand takes its randomness from --seed. Module seeds are
// derive_seed(seed, "<module>"), so adding a subcommand never perturbs the
// streams of the others.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvqtok/audio_io.hpp"
#include "rvqtok/datapipe.hpp"
#include "rvqtok/error.hpp"
#include "rvqtok/kernels.hpp"
#include "rvqtok/mel.hpp"
#include "rvqtok/metrics.hpp"
#include "rvqtok/rvq_io.hpp"
#include "rvqtok/scorers.hpp"
#include "rvqtok/seed.hpp"
#include "rvqtok/token_io.hpp"
#include "rvqtok/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rvqtok;

namespace {

struct Globals {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string format = "jsonl";
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return 2;
    case ErrorKind::kDataFormat:
    case ErrorKind::kMalformedWire:
    case ErrorKind::kInvalidStream:
      return 4;
    case ErrorKind::kProtocolError:
    case ErrorKind::kScorerError:
      return 5;
    default:
      return 3;
  }
}

json load_config(const Globals& g) {
  if (g.config.empty()) return json::object();
  std::ifstream in(g.config);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + g.config);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidConfig, g.config + ": " + e.what());
  }
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

bool blank(const std::string& s) {
  return s.find_first_not_of(" \t\r") == std::string::npos;
}

// Manifest of feature files: one path per line, relative to the manifest.
std::vector<fs::path> read_path_list(const fs::path& manifest) {
  std::vector<fs::path> out;
  for (const auto& line : read_lines(manifest)) {
    if (blank(line)) continue;
    fs::path p(line);
    out.push_back(p.is_absolute() ? p : manifest.parent_path() / p);
  }
  return out;
}

struct MelOptions {
  MelConfig mel;
  std::uint32_t stack_factor = 8;
};

MelOptions parse_mel_options(const json& cfg) {
  MelOptions o;
  const json m = cfg.value("mel", json::object());
  try {
    o.mel.n_fft = m.value("n_fft", o.mel.n_fft);
    o.mel.hop = m.value("hop", o.mel.hop);
    o.mel.n_mels = m.value("n_mels", o.mel.n_mels);
    o.mel.fmin = m.value("fmin", o.mel.fmin);
    o.mel.fmax = m.value("fmax", o.mel.fmax);
    o.mel.log_floor = m.value("log_floor", o.mel.log_floor);
    if (m.value("center", true) == false) o.mel.pad = PadMode::kNone;
    o.stack_factor = m.value("stack_factor", o.stack_factor);
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidConfig, std::string("mel config: ") + e.what());
  }
  return o;
}

std::vector<TokenFrame> to_frames(const Matrix<std::uint32_t>& idx) {
  std::vector<TokenFrame> frames(idx.rows());
  for (std::size_t i = 0; i < idx.rows(); ++i) {
    const auto r = idx.row(i);
    frames[i].indices.assign(r.begin(), r.end());
  }
  return frames;
}

Matrix<std::uint32_t> from_frames(std::span<const TokenFrame> frames,
                                  std::size_t n_layers) {
  Matrix<std::uint32_t> idx(frames.size(), n_layers);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    require(frames[i].indices.size() == n_layers, ErrorKind::kShapeMismatch,
            "token file layer count does not match the codebooks");
    for (std::size_t l = 0; l < n_layers; ++l) idx(i, l) = frames[i].indices[l];
  }
  return idx;
}

std::vector<std::size_t> layer_sizes(const RvqStack& stack) {
  std::vector<std::size_t> out;
  for (const auto& b : stack.layers) out.push_back(b.size());
  return out;
}

// ---- mel ------------------------------------------------------------------

int cmd_mel(const Globals& g, const std::string& input, const std::string& out,
            std::uint32_t raw_rate) {
  const MelOptions o = parse_mel_options(load_config(g));
  const fs::path in(input);
  AudioBuffer audio = in.extension() == ".wav" ? read_wav(in)
                                               : read_raw_f32(in, raw_rate);
  MelConfig mel = o.mel;
  mel.sample_rate = audio.sample_rate;
  const auto spec = compute_mel(audio, mel);
  const auto feats = stack_frames(spec, o.stack_factor);
  write_afv1(out, feats);
  emit({{"frames", feats.size()}, {"frame_rate", feats.frame_rate}});
  return 0;
}

// ---- train-rvq ------------------------------------------------------------

int cmd_train(const Globals& g, const std::string& manifest,
              const std::string& out, const std::string& report_path) {
  TrainConfig cfg = parse_train_config(load_config(g));
  const std::uint64_t seed = derive_seed(g.seed, "rvq_core");
  cfg.options.seed = seed;
  cfg.gumbel.seed = derive_seed(seed, "gumbel");
  cfg.dropout.seed = derive_seed(seed, "dropout");

  std::vector<FeatureSequence> corpus;
  for (const auto& p : read_path_list(manifest)) corpus.push_back(read_afv1(p));
  require(!corpus.empty(), ErrorKind::kEmptyInput, "train-rvq: empty manifest");
  const std::size_t dim = corpus.front().dim();
  for (const auto& seq : corpus) {
    require(seq.dim() == dim, ErrorKind::kShapeMismatch,
            "train-rvq: feature dimension differs across the corpus");
  }

  const RvqStack blank(cfg.layer_sizes, dim, cfg.ema_decay, cfg.norm_beta);
  TrainResult result;
  if (cfg.options.epochs == 0) {
    // Nothing to train: emit the codebooks as initialized.
    result.stack = initial_stack(blank, corpus, cfg.options);
  } else {
    result = train_rvq(blank, corpus, cfg.schedule, cfg.gumbel, cfg.dropout,
                       cfg.options);
  }
  write_rvq1(out, result.stack);

  if (!report_path.empty()) {
    std::ofstream rep(report_path, std::ios::binary);
    require(static_cast<bool>(rep), ErrorKind::kIo, "cannot write " + report_path);
    rep << json{{"seed", g.seed}, {"config", to_json(cfg)}}.dump() << '\n';
    for (const auto& s : result.report.steps) rep << to_jsonl(s) << '\n';
  }

  // Reconstruction error with the codebooks exactly as stored on disk.
  const RvqStack stored = round_to_storage_precision(result.stack);
  double abs_sum = 0.0;
  std::size_t count = 0;
  for (const auto& seq : corpus) {
    const MatrixD recon = decode(stored, encode(stored, seq.vectors));
    for (std::size_t i = 0; i < recon.size(); ++i) {
      abs_sum += std::abs(recon.flat()[i] - seq.vectors.flat()[i]);
    }
    count += recon.size();
  }
  emit({{"seed", g.seed},
        {"steps", result.report.steps.size()},
        {"layers", layer_sizes(result.stack)},
        {"final_feature_mae", count ? abs_sum / static_cast<double>(count) : 0.0}});
  return 0;
}

// ---- encode / decode ------------------------------------------------------

int cmd_encode(const std::string& features, const std::string& codebooks,
               const std::string& out, std::size_t layers) {
  const FeatureSequence feats = read_afv1(features);
  RvqStack stack = read_rvq1(codebooks);
  if (layers > 0) {
    require(layers <= stack.n_layers(), ErrorKind::kInvalidConfig,
            "encode: --layers exceeds the codebook depth");
    stack = stack.prefix(layers);
  }
  if (feats.size() > 0) {
    require(feats.dim() == stack.dim(), ErrorKind::kShapeMismatch,
            "encode: feature dimension does not match the codebooks");
  }
  const auto sizes = layer_sizes(stack);
  TokenFile tf{AudioVocab{{sizes.begin(), sizes.end()}}, {}};
  if (feats.size() > 0) tf.frames = to_frames(encode(stack, feats.vectors));
  write_atk1(out, tf);
  emit({{"frames", tf.frames.size()}, {"layers", stack.n_layers()}});
  return 0;
}

int cmd_decode(const std::string& tokens, const std::string& codebooks,
               const std::string& out, std::uint32_t stack_factor,
               double frame_rate) {
  const TokenFile tf = read_atk1(tokens);
  RvqStack stack = read_rvq1(codebooks);
  const std::size_t n_layers = tf.vocab.layer_sizes.size();
  require(n_layers <= stack.n_layers(), ErrorKind::kShapeMismatch,
          "decode: token file has more layers than the codebooks");
  stack = stack.prefix(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    require(tf.vocab.layer_sizes[l] == stack.layers[l].size(),
            ErrorKind::kShapeMismatch, "decode: codebook sizes differ");
  }
  std::vector<TokenFrame> kept;
  std::size_t eoa = 0;
  for (const auto& f : tf.frames) {
    if (tf.vocab.is_eoa(f)) {
      ++eoa;
    } else {
      kept.push_back(f);
    }
  }
  if (eoa > 0) std::cerr << "decode: skipped " << eoa << " EOA frames\n";
  FeatureSequence feats;
  feats.vectors = decode(stack, from_frames(kept, n_layers));
  if (feats.vectors.cols() == 0) feats.vectors = MatrixD(0, stack.dim());
  feats.frame_rate = frame_rate;
  feats.stack_factor = stack_factor;
  write_afv1(out, feats);
  emit({{"frames", feats.size()}, {"skipped_eoa", eoa}});
  return 0;
}

// ---- pack -----------------------------------------------------------------

IntlvStart parse_start(const std::string& s) {
  if (s == "audio") return IntlvStart::kAudio;
  if (s == "text") return IntlvStart::kText;
  if (s == "random") return IntlvStart::kRandom;
  fail(ErrorKind::kInvalidConfig, "unknown --intlv-start '" + s + "'");
}

int cmd_pack(const Globals& g, const std::string& manifest,
             const std::string& format, const std::string& out,
             const std::string& stats_path, const std::string& start) {
  const json cfg = load_config(g);
  PackOptions opts;
  opts.format = parse_format_tag(format);
  opts.intlv_start = parse_start(start);
  opts.seed = derive_seed(g.seed, "datapipe");
  if (cfg.contains("special_tokens")) {
    opts.specials = parse_special_tokens(cfg.at("special_tokens"));
  }
  if (cfg.contains("punctuation")) {
    try {
      opts.punctuation = cfg.at("punctuation").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      fail(ErrorKind::kInvalidConfig, std::string("punctuation: ") + e.what());
    }
  }

  const fs::path mpath(manifest);
  std::vector<ManifestEntry> entries;
  const auto lines = read_lines(mpath);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    try {
      ManifestEntry e = parse_manifest_line(lines[i]);
      const fs::path p(e.atk1_path);
      if (!p.is_absolute()) e.atk1_path = (mpath.parent_path() / p).string();
      entries.push_back(std::move(e));
    } catch (const Error& e) {
      fail(e.kind(), manifest + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }

  FrameStore store;
  const PackResult res = pack(entries, opts, store);

  std::ofstream rec(out, std::ios::binary);
  require(static_cast<bool>(rec), ErrorKind::kIo, "cannot write " + out);
  if (g.format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : res.records) arr.push_back(to_json(r));
    rec << arr.dump() << '\n';
  } else {
    for (const auto& r : res.records) rec << to_json(r).dump() << '\n';
  }

  nlohmann::ordered_json stats = to_json(res.stats);
  stats["seed"] = g.seed;
  if (!stats_path.empty()) {
    std::ofstream s(stats_path, std::ios::binary);
    require(static_cast<bool>(s), ErrorKind::kIo, "cannot write " + stats_path);
    s << stats.dump() << '\n';
  }
  std::cout << stats.dump() << '\n';
  return 0;
}

// ---- eval / scorer --------------------------------------------------------

std::vector<EvalRecord> read_eval_records(const std::string& path) {
  std::vector<EvalRecord> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    try {
      out.push_back(eval_record_from_json(json::parse(lines[i])));
    } catch (const json::exception& e) {
      fail(ErrorKind::kDataFormat,
           path + ":" + std::to_string(i + 1) + ": " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), path + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

// Bigram corpus: one JSON array of token ids per line.
std::vector<std::vector<std::uint32_t>> read_corpus(const std::string& path) {
  std::vector<std::vector<std::uint32_t>> out;
  for (const auto& line : read_lines(path)) {
    if (blank(line)) continue;
    try {
      out.push_back(json::parse(line).get<std::vector<std::uint32_t>>());
    } catch (const json::exception& e) {
      fail(ErrorKind::kDataFormat, path + ": " + e.what());
    }
  }
  return out;
}

// Built-in names: oracle, random, bigram:<corpus>. The oracle needs the
// records it will be asked about.
std::optional<Scorer> builtin_scorer(const std::string& name,
                                     const std::vector<EvalRecord>& records,
                                     std::uint64_t seed) {
  if (name == "oracle") return Scorer(OracleScorer(records));
  if (name == "random") return Scorer(RandomScorer(seed));
  if (name.rfind("bigram:", 0) == 0) {
    const auto corpus = read_corpus(name.substr(7));
    return Scorer(BigramScorer(corpus));
  }
  return std::nullopt;
}

int cmd_eval(const Globals& g, const std::string& records_path,
             const std::string& spec) {
  const auto records = read_eval_records(records_path);
  const std::uint64_t seed = derive_seed(g.seed, "metrics_eval");
  double acc = 0.0;
  if (spec.rfind("builtin:", 0) == 0) {
    const auto s = builtin_scorer(spec.substr(8), records, seed);
    require(s.has_value(), ErrorKind::kInvalidConfig,
            "unknown built-in scorer '" + spec + "'");
    if (!records.empty()) acc = accuracy(records, *s);
  } else {
    PluginScorer plugin(spec);
    Scorer s = [&plugin](std::span<const std::uint32_t> p,
                         std::span<const std::uint32_t> c) {
      return plugin(p, c);
    };
    if (!records.empty()) acc = accuracy(records, s);
  }
  emit({{"accuracy", acc}, {"n", records.size()}});
  return 0;
}

int cmd_scorer(const Globals& g, const std::string& name,
               const std::string& records_path) {
  std::vector<EvalRecord> records;
  if (!records_path.empty()) records = read_eval_records(records_path);
  const auto s =
      builtin_scorer(name, records, derive_seed(g.seed, "metrics_eval"));
  require(s.has_value(), ErrorKind::kInvalidConfig,
          "unknown built-in scorer '" + name + "'");
  serve_plugin(*s, std::cin, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rvqtok: residual vector quantization speech tokenizer toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--seed", g.seed, "root RNG seed");
  app.add_option("--threads", g.threads, "worker threads (0 = runtime default)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--format", g.format, "record output layout")
      ->check(CLI::IsMember({"json", "jsonl"}));

  std::string in, out, report, codebooks, manifest, format, stats, scorer;
  std::string start = "audio", records;
  std::uint32_t raw_rate = 16000;
  std::uint32_t stack_factor = 8;
  double frame_rate = 12.5;
  std::size_t layers = 0;

  auto* mel = app.add_subcommand("mel", "audio to stacked log-mel features (AFV1)");
  mel->add_option("input", in, "16-bit PCM .wav or raw float32")->required();
  mel->add_option("-o,--out", out, "AFV1 output")->required();
  mel->add_option("--raw-rate", raw_rate, "sample rate for raw input");

  auto* train = app.add_subcommand("train-rvq", "train RVQ codebooks");
  train->add_option("manifest", manifest, "file listing AFV1 paths")->required();
  train->add_option("-o,--out", out, "RVQ1 output")->required();
  train->add_option("--report", report, "training report JSONL");

  auto* enc = app.add_subcommand("encode", "features to tokens (ATK1)");
  enc->add_option("features", in, "AFV1 input")->required();
  enc->add_option("-c,--codebooks", codebooks, "RVQ1 codebooks")->required();
  enc->add_option("-o,--out", out, "ATK1 output")->required();
  enc->add_option("--layers", layers, "use only the first n layers");

  auto* dec = app.add_subcommand("decode", "tokens to features (AFV1)");
  dec->add_option("tokens", in, "ATK1 input")->required();
  dec->add_option("-c,--codebooks", codebooks, "RVQ1 codebooks")->required();
  dec->add_option("-o,--out", out, "AFV1 output")->required();
  dec->add_option("--stack-factor", stack_factor, "stack factor to record");
  dec->add_option("--frame-rate", frame_rate, "frame rate to record");

  auto* pk = app.add_subcommand("pack", "build interleaved training records");
  pk->add_option("manifest", manifest, "JSON-lines manifest")->required();
  pk->add_option("--tag", format, "ASR|AQA|S2TT|INTLV|TTS|ITTS|PURE_AUDIO")
      ->required();
  pk->add_option("-o,--out", out, "records output")->required();
  pk->add_option("--stats", stats, "corpus statistics JSON");
  pk->add_option("--intlv-start", start, "audio|text|random");

  auto* ev = app.add_subcommand("eval", "perplexity-comparison accuracy");
  ev->add_option("records", records, "EvalRecord JSONL")->required();
  ev->add_option("--scorer", scorer,
                 "builtin:oracle | builtin:random | builtin:bigram:<corpus> | "
                 "external command")
      ->required();

  auto* sc = app.add_subcommand("scorer", "serve a built-in scorer as a plugin");
  sc->add_option("name", scorer, "oracle | random | bigram:<corpus>")->required();
  sc->add_option("--records", records, "records for the oracle scorer");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g.threads > 0) kernels::set_num_threads(g.threads);
    if (mel->parsed()) return cmd_mel(g, in, out, raw_rate);
    if (train->parsed()) return cmd_train(g, manifest, out, report);
    if (enc->parsed()) return cmd_encode(in, codebooks, out, layers);
    if (dec->parsed()) return cmd_decode(in, codebooks, out, stack_factor, frame_rate);
    if (pk->parsed()) return cmd_pack(g, manifest, format, out, stats, start);
    if (ev->parsed()) return cmd_eval(g, records, scorer);
    if (sc->parsed()) return cmd_scorer(g, scorer, records);
  } catch (const Error& e) {
    std::cerr << "rvqtok: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rvqtok: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
