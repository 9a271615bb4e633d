// Copyright 2026 The rvqtok Authors
// SPDX-License-Identifier: Apache-2.0

#include "rvqtok/scorers.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "rvqtok/error.hpp"
#include "rvqtok/seed.hpp"

namespace rvqtok {

namespace {

using Ids = std::vector<std::uint32_t>;

Ids to_ids(std::span<const std::uint32_t> s) { return {s.begin(), s.end()}; }

std::uint64_t hash_ids(std::uint64_t h, std::span<const std::uint32_t> ids) {
  h = mix64(h ^ ids.size());
  for (auto id : ids) h = mix64(h ^ id);
  return h;
}

constexpr std::uint32_t kNoContext = 0xffffffffu;

}  // namespace

OracleScorer::OracleScorer(std::span<const EvalRecord> records) {
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      auto key = std::make_pair(r.prefix, r.candidates[i]);
      const bool pos = i == r.positive_index;
      auto [it, inserted] = positive_.emplace(std::move(key), pos);
      if (!inserted) it->second = it->second || pos;
    }
  }
}

ScoreResult OracleScorer::operator()(std::span<const std::uint32_t> prefix,
                                     std::span<const std::uint32_t> cont) const {
  const auto it = positive_.find({to_ids(prefix), to_ids(cont)});
  const bool pos = it != positive_.end() && it->second;
  const std::size_t n = std::max<std::size_t>(cont.size(), 1);
  return {(pos ? 1.0 : 2.0) * static_cast<double>(n), n};
}

ScoreResult RandomScorer::operator()(std::span<const std::uint32_t> prefix,
                                     std::span<const std::uint32_t> cont) const {
  const std::uint64_t h = hash_ids(hash_ids(seed_, prefix), cont);
  const double u = static_cast<double>(mix64(h) >> 11) * 0x1.0p-53;
  const std::size_t n = std::max<std::size_t>(cont.size(), 1);
  return {u * static_cast<double>(n), n};
}

BigramScorer::BigramScorer(std::span<const std::vector<std::uint32_t>> corpus) {
  std::set<std::uint32_t> vocab;
  for (const auto& seq : corpus) {
    std::uint32_t prev = kNoContext;
    for (auto id : seq) {
      ++pairs_[{prev, id}];
      ++context_[prev];
      vocab.insert(id);
      prev = id;
    }
  }
  vocab_ = vocab.size() + 1;
}

double BigramScorer::log_prob(std::uint32_t prev, std::uint32_t next) const {
  const auto p = pairs_.find({prev, next});
  const auto c = context_.find(prev);
  const double num = 1.0 + (p == pairs_.end() ? 0.0 : static_cast<double>(p->second));
  const double den = static_cast<double>(vocab_) +
                     (c == context_.end() ? 0.0 : static_cast<double>(c->second));
  return std::log(num / den);
}

ScoreResult BigramScorer::operator()(std::span<const std::uint32_t> prefix,
                                     std::span<const std::uint32_t> cont) const {
  std::uint32_t prev = prefix.empty() ? kNoContext : prefix.back();
  double nll = 0.0;
  for (auto id : cont) {
    nll -= log_prob(prev, id);
    prev = id;
  }
  return {nll, cont.size()};
}

struct PluginScorer::Process {
  pid_t pid = -1;
  int to_child = -1;
  int from_child = -1;
  std::string buffer;

  [[noreturn]] void protocol(const std::string& what) {
    fail(ErrorKind::kProtocolError, "scorer plugin: " + what);
  }

  void write_all(const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      const ssize_t n = ::write(to_child, s.data() + off, s.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) protocol("plugin closed its input");
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    while (true) {
      const auto nl = buffer.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer.substr(0, nl);
        buffer.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      const ssize_t n = ::read(from_child, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) protocol("plugin exited before answering");
      buffer.append(chunk, static_cast<std::size_t>(n));
    }
  }
};

PluginScorer::PluginScorer(const std::string& command)
    : proc_(std::make_unique<Process>()) {
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  require(::pipe(in_pipe) == 0 && ::pipe(out_pipe) == 0, ErrorKind::kIo,
          "cannot create plugin pipes");
  const pid_t pid = ::fork();
  require(pid >= 0, ErrorKind::kIo, "cannot fork scorer plugin");
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  proc_->pid = pid;
  proc_->to_child = in_pipe[1];
  proc_->from_child = out_pipe[0];
}

PluginScorer::~PluginScorer() {
  if (!proc_) return;
  if (proc_->to_child >= 0) ::close(proc_->to_child);
  if (proc_->from_child >= 0) ::close(proc_->from_child);
  if (proc_->pid > 0) {
    int status = 0;
    ::waitpid(proc_->pid, &status, 0);
  }
}

ScoreResult PluginScorer::operator()(std::span<const std::uint32_t> prefix,
                                     std::span<const std::uint32_t> cont) {
  nlohmann::json req = {{"prefix", to_ids(prefix)}, {"candidate", to_ids(cont)}};
  proc_->write_all(req.dump() + "\n");
  const std::string line = proc_->read_line();
  ScoreResult r;
  try {
    const auto j = nlohmann::json::parse(line);
    const auto& nll = j.at("nll");
    const auto& tokens = j.at("tokens");
    if (!nll.is_number() || !tokens.is_number_integer() ||
        tokens.get<std::int64_t>() < 0) {
      proc_->protocol("bad response types: " + line);
    }
    r.nll = nll.get<double>();
    r.tokens = tokens.get<std::size_t>();
  } catch (const nlohmann::json::exception&) {
    proc_->protocol("unparseable response: " + line);
  }
  if (!std::isfinite(r.nll) || r.tokens == 0) {
    proc_->protocol("response needs a finite nll and tokens >= 1: " + line);
  }
  return r;
}

void serve_plugin(const Scorer& scorer, std::istream& in, std::ostream& out) {
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    nlohmann::json req;
    try {
      req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kProtocolError, std::string("bad request: ") + e.what());
    }
    const auto prefix = req.at("prefix").get<Ids>();
    const auto cand = req.at("candidate").get<Ids>();
    const ScoreResult r = scorer(prefix, cand);
    out << nlohmann::json{{"nll", r.nll}, {"tokens", r.tokens}}.dump() << '\n';
    out.flush();
  }
}

}  // namespace rvqtok
