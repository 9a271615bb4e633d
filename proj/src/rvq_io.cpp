// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/rvq_io.hpp"

#include <set>

#include "rvqtok/binary_io.hpp"
#include "rvqtok/error.hpp"

namespace rvqtok {

void write_rvq1(const std::filesystem::path& path, const RvqStack& stack) {
  io::Writer w(path);
  w.magic("RVQ1");
  w.put<std::uint32_t>(static_cast<std::uint32_t>(stack.n_layers()));
  for (const auto& book : stack.layers) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(book.size()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(book.dim()));
    w.put<double>(book.ema_decay);
    w.put<double>(book.norm_beta);
    for (double v : book.vectors.flat()) w.put<float>(static_cast<float>(v));
    for (auto c : book.usage_counts) w.put<std::uint64_t>(c);
  }
  w.close();
}

RvqStack read_rvq1(const std::filesystem::path& path) {
  io::Reader r(path);
  r.expect_magic("RVQ1");
  RvqStack stack;
  const auto n_layers = r.get<std::uint32_t>();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    const auto k = r.get<std::uint32_t>();
    const auto d = r.get<std::uint32_t>();
    const double alpha = r.get<double>();
    const double beta = r.get<double>();
    Codebook book(k, d, alpha, beta);
    for (double& v : book.vectors.flat()) v = r.get<float>();
    for (auto& c : book.usage_counts) c = r.get<std::uint64_t>();
    stack.layers.push_back(std::move(book));
  }
  r.expect_eof();
  return stack;
}

RvqStack round_to_storage_precision(RvqStack stack) {
  for (auto& book : stack.layers) {
    for (double& v : book.vectors.flat()) {
      v = static_cast<double>(static_cast<float>(v));
    }
  }
  return stack;
}

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  require(obj.is_object(), ErrorKind::kInvalidConfig,
          "config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    require(allowed.count(key) > 0, ErrorKind::kInvalidConfig,
            "config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

EmaMode parse_ema_mode(const std::string& s) {
  if (s == "paper_literal") return EmaMode::kPaperLiteral;
  if (s == "standard_ema") return EmaMode::kStandard;
  fail(ErrorKind::kInvalidConfig, "config: unknown ema_mode '" + s + "'");
}

InitMethod parse_init(const std::string& s) {
  if (s == "sample") return InitMethod::kSample;
  if (s == "kmeans++") return InitMethod::kKMeansPP;
  fail(ErrorKind::kInvalidConfig, "config: unknown init '" + s + "'");
}

DropoutMode parse_dropout_mode(const std::string& s) {
  if (s == "independent") return DropoutMode::kIndependent;
  if (s == "suffix") return DropoutMode::kSuffix;
  fail(ErrorKind::kInvalidConfig, "config: unknown dropout mode '" + s + "'");
}

}  // namespace

TrainConfig parse_train_config(const json& doc) {
  TrainConfig cfg;
  try {
    check_keys(doc,
               {"layer_sizes", "ema_decay", "norm_beta", "ema_mode", "epochs",
                "batch_instances", "restart", "dead_threshold", "init",
                "shuffle", "schedule", "gumbel", "dropout", "loss_weights"},
               "top level");
    read_if(doc, "layer_sizes", cfg.layer_sizes);
    read_if(doc, "ema_decay", cfg.ema_decay);
    read_if(doc, "norm_beta", cfg.norm_beta);
    if (doc.contains("ema_mode")) {
      cfg.options.ema_mode = parse_ema_mode(doc.at("ema_mode").get<std::string>());
    }
    read_if(doc, "epochs", cfg.options.epochs);
    read_if(doc, "batch_instances", cfg.options.batch_instances);
    read_if(doc, "restart", cfg.options.restart);
    read_if(doc, "dead_threshold", cfg.options.dead_threshold);
    read_if(doc, "shuffle", cfg.options.shuffle);
    if (doc.contains("init")) {
      cfg.options.init = parse_init(doc.at("init").get<std::string>());
    }
    if (doc.contains("schedule")) {
      const auto& s = doc.at("schedule");
      check_keys(s,
                 {"replace_start", "replace_end", "total_steps",
                  "commit_weight_schedule", "granularity"},
                 "schedule");
      read_if(s, "replace_start", cfg.schedule.replace_start);
      read_if(s, "replace_end", cfg.schedule.replace_end);
      read_if(s, "total_steps", cfg.schedule.total_steps);
      read_if(s, "commit_weight_schedule", cfg.schedule.commit_weight_schedule);
      if (s.contains("granularity")) {
        cfg.schedule.instance_level =
            s.at("granularity").get<std::string>() == "instance";
      }
    }
    if (doc.contains("gumbel")) {
      const auto& g = doc.at("gumbel");
      check_keys(g, {"enabled", "temperature"}, "gumbel");
      read_if(g, "enabled", cfg.gumbel.enabled);
      read_if(g, "temperature", cfg.gumbel.temperature);
    }
    if (doc.contains("dropout")) {
      const auto& d = doc.at("dropout");
      check_keys(d, {"enabled", "keep_prob_per_layer", "mode"}, "dropout");
      read_if(d, "enabled", cfg.options.dropout_enabled);
      read_if(d, "keep_prob_per_layer", cfg.dropout.keep_prob_per_layer);
      if (d.contains("mode")) {
        cfg.dropout.mode = parse_dropout_mode(d.at("mode").get<std::string>());
      }
    }
    if (doc.contains("loss_weights")) {
      const auto& w = doc.at("loss_weights");
      check_keys(w, {"recon", "llm", "commit"}, "loss_weights");
      read_if(w, "recon", cfg.loss_weights.recon);
      read_if(w, "llm", cfg.loss_weights.llm);
      read_if(w, "commit", cfg.loss_weights.commit);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kInvalidConfig, std::string("config: ") + e.what());
  }
  require(!cfg.layer_sizes.empty(), ErrorKind::kInvalidConfig,
          "config: layer_sizes is empty");
  for (auto k : cfg.layer_sizes) {
    require(k > 0, ErrorKind::kInvalidConfig, "config: zero codebook size");
  }
  require(cfg.options.batch_instances > 0, ErrorKind::kInvalidConfig,
          "config: batch_instances must be positive");
  cfg.schedule.validate();
  cfg.gumbel.validate();
  cfg.dropout.validate();
  Codebook probe(1, 1, cfg.ema_decay, cfg.norm_beta);
  probe.validate();
  total_loss(0.0, 0.0, 0.0, cfg.loss_weights);
  return cfg;
}

json to_json(const TrainConfig& cfg) {
  nlohmann::ordered_json j;
  j["layer_sizes"] = cfg.layer_sizes;
  j["ema_decay"] = cfg.ema_decay;
  j["norm_beta"] = cfg.norm_beta;
  j["ema_mode"] = cfg.options.ema_mode == EmaMode::kPaperLiteral
                      ? "paper_literal"
                      : "standard_ema";
  j["epochs"] = cfg.options.epochs;
  j["batch_instances"] = cfg.options.batch_instances;
  j["restart"] = cfg.options.restart;
  j["dead_threshold"] = cfg.options.dead_threshold;
  j["init"] = cfg.options.init == InitMethod::kKMeansPP ? "kmeans++" : "sample";
  j["shuffle"] = cfg.options.shuffle;
  j["schedule"] = {
      {"replace_start", cfg.schedule.replace_start},
      {"replace_end", cfg.schedule.replace_end},
      {"total_steps", cfg.schedule.total_steps},
      {"commit_weight_schedule", cfg.schedule.commit_weight_schedule},
      {"granularity", cfg.schedule.instance_level ? "instance" : "token"}};
  j["gumbel"] = {{"enabled", cfg.gumbel.enabled},
                 {"temperature", cfg.gumbel.temperature}};
  j["dropout"] = {
      {"enabled", cfg.options.dropout_enabled},
      {"keep_prob_per_layer", cfg.dropout.keep_prob_per_layer},
      {"mode", cfg.dropout.mode == DropoutMode::kSuffix ? "suffix"
                                                        : "independent"}};
  j["loss_weights"] = {{"recon", cfg.loss_weights.recon},
                       {"llm", cfg.loss_weights.llm},
                       {"commit", cfg.loss_weights.commit}};
  return j;
}

}  // namespace rvqtok
