// Copyright 2026 The advfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "advfuzz/orchestrator.h"

namespace advfuzz {
namespace {

template <typename T>
T ParseNumber(std::string_view key, std::string_view v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" +
                                std::string(v) + "'");
  }
  return out;
}

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void Require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

nlohmann::json StatsJson(const CampaignStats& s) {
  return {{"execs_total", s.execs_total},
          {"execs_per_sec", s.execs_per_sec},
          {"elapsed_secs", s.elapsed_secs},
          {"paths_found", s.paths_found},
          {"unique_crashes", s.unique_crashes},
          {"total_crashes", s.total_crashes},
          {"timeouts", s.timeouts},
          {"max_depth", s.max_depth},
          {"edges_covered", s.edges_covered},
          {"cycles_done", s.cycles_done},
          {"candidates_received", s.candidates_received},
          {"candidates_accepted", s.candidates_accepted},
          {"retrain_events", s.retrain_events},
          {"retrains_after_cycle_end", s.retrains_after_cycle_end},
          {"ml_degraded", s.ml_degraded}};
}

}  // namespace

std::string_view ModeName(Mode mode) {
  return mode == Mode::kBaseline ? "baseline" : "adversarial";
}

std::optional<Mode> ParseMode(std::string_view name) {
  if (name == "baseline") return Mode::kBaseline;
  if (name == "adversarial") return Mode::kAdversarial;
  return std::nullopt;
}

void CampaignConfig::Validate() const {
  Require(!target.empty(), "target name is empty");
  Require(budget_execs > 0 || budget_secs > 0,
          "a budget is required (budget_execs or budget_secs)");
  Require(budget_secs >= 0, "budget_secs must be >= 0");
  Require(exec_timeout.count() > 0, "exec_timeout must be > 0");
  Require(havoc_budget >= 1, "havoc_budget must be >= 1");
  Require(havoc.max_len >= 1, "havoc max_len must be >= 1");
  Require(havoc.max_stack_log2 >= 0 && havoc.max_stack_log2 <= 16,
          "max_stack_log2 must be in [0, 16]");
  Require(stats_interval_secs > 0, "stats_interval_secs must be > 0");
  attack.Validate();
  Require(hidden_width >= 1, "hidden_width must be >= 1");
  Require(epochs >= 1, "epochs must be >= 1");
  Require(batch_size >= 1, "batch_size must be >= 1");
  Require(learning_rate > 0, "learning_rate must be > 0");
  Require(retrain_threshold >= 1, "retrain_threshold must be >= 1");
  Require(inline_limit >= 1, "inline_limit must be >= 1");
  Require(ml_cpu_share > 0 && ml_cpu_share <= 1, "ml_cpu_share must be in (0, 1]");
  Require(ml_fail_after_secs >= 0 && ml_wedge_after_secs >= 0,
          "fault injection times must be >= 0");
}

void CampaignConfig::Set(std::string_view key, std::string_view value) {
  if (key == "target") {
    target = std::string(value);
  } else if (key == "mode") {
    auto m = ParseMode(value);
    if (!m) throw std::invalid_argument("mode must be baseline or adversarial");
    mode = *m;
  } else if (key == "budget_execs") {
    budget_execs = ParseNumber<uint64_t>(key, value);
  } else if (key == "budget_secs") {
    budget_secs = ParseNumber<double>(key, value);
  } else if (key == "seed") {
    seed = ParseNumber<uint64_t>(key, value);
  } else if (key == "out") {
    out_dir = std::filesystem::path(std::string(value));
  } else if (key == "exec_timeout_ms") {
    exec_timeout = std::chrono::microseconds(
        static_cast<int64_t>(ParseNumber<double>(key, value) * 1000));
  } else if (key == "havoc_budget") {
    havoc_budget = ParseNumber<size_t>(key, value);
  } else if (key == "max_len") {
    havoc.max_len = ParseNumber<size_t>(key, value);
  } else if (key == "stats_interval_secs") {
    stats_interval_secs = ParseNumber<double>(key, value);
  } else if (key == "n_targets") {
    attack.n_targets = ParseNumber<size_t>(key, value);
  } else if (key == "theta") {
    attack.theta = ParseNumber<double>(key, value);
  } else if (key == "max_iters") {
    attack.max_iters = ParseNumber<int>(key, value);
  } else if (key == "success_threshold") {
    attack.success_threshold = ParseNumber<double>(key, value);
  } else if (key == "features_per_iter") {
    attack.features_per_iter = ParseNumber<size_t>(key, value);
  } else if (key == "hidden_width") {
    hidden_width = ParseNumber<size_t>(key, value);
  } else if (key == "epochs") {
    epochs = ParseNumber<int>(key, value);
  } else if (key == "batch_size") {
    batch_size = ParseNumber<size_t>(key, value);
  } else if (key == "learning_rate") {
    learning_rate = ParseNumber<double>(key, value);
  } else if (key == "retrain_threshold") {
    retrain_threshold = ParseNumber<size_t>(key, value);
  } else if (key == "inline_limit") {
    inline_limit = ParseNumber<size_t>(key, value);
  } else if (key == "ml_cpu_share") {
    ml_cpu_share = ParseNumber<double>(key, value);
  } else if (key == "ml_fail_after_secs") {
    ml_fail_after_secs = ParseNumber<double>(key, value);
  } else if (key == "ml_wedge_after_secs") {
    ml_wedge_after_secs = ParseNumber<double>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = Trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    out.emplace_back(std::string(Trim(s.substr(0, eq))),
                     std::string(Trim(s.substr(eq + 1))));
  }
  return out;
}

void WriteStatsCsv(const std::filesystem::path& path,
                   std::span<const TimelineRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t_seconds,execs,execs_per_sec,paths,crashes,edges,max_depth\n";
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::setprecision(3) << r.t << ',' << r.execs << ','
        << std::setprecision(1) << r.execs_per_sec << ',' << r.paths << ','
        << r.crashes << ',' << r.edges << ',' << r.max_depth << '\n';
  }
}

std::vector<TimelineRow> ReadStatsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_seconds,", 0) != 0) {
    throw std::runtime_error(path.string() + ": not a stats file");
  }
  std::vector<TimelineRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    TimelineRow r;
    char c1, c2, c3, c4, c5, c6;
    if (!(ss >> r.t >> c1 >> r.execs >> c2 >> r.execs_per_sec >> c3 >> r.paths >>
          c4 >> r.crashes >> c5 >> r.edges >> c6 >> r.max_depth)) {
      throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
    }
    rows.push_back(r);
  }
  return rows;
}

CampaignStats RunCampaign(const CampaignConfig& config) {
  config.Validate();
  const FuzzTarget* target = FindTarget(config.target);
  if (target == nullptr) {
    throw std::invalid_argument("unknown target '" + config.target + "'");
  }
  if (config.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*config.out_dir, ec);
    const auto probe = *config.out_dir / ".write_probe";
    std::ofstream p(probe);
    if (ec || !p) {
      throw std::runtime_error("output directory not writable: " +
                               config.out_dir->string());
    }
    p.close();
    std::filesystem::remove(probe, ec);
  }

  CampaignStats stats;
  std::optional<MlReport> ml_report;
  if (config.mode == Mode::kBaseline) {
    FuzzLoop loop(*target, config);
    stats = loop.Run();
  } else {
    auto [fuzz_end, ml_end] = SocketChannel::Pair();
    MlComponent ml(*target, config, std::move(ml_end));
    ml.Start();
    FuzzLoop loop(*target, config, &fuzz_end);
    stats = loop.Run();
    try {
      fuzz_end.Send(Shutdown{});
      fuzz_end.FlushFor(std::chrono::milliseconds(200));
    } catch (const ChannelClosedError&) {
    }
    ml.RequestStop();
    fuzz_end.Close();
    ml_report = ml.Join();
    stats.retrain_events = ml_report->retrain_events;
    stats.retrains_after_cycle_end = ml_report->retrains_after_cycle_end;
    if (ml_report->failed) stats.ml_degraded = true;
  }

  if (config.out_dir) {
    WriteStatsCsv(*config.out_dir / "stats.csv", stats.timeline);
    nlohmann::json j = StatsJson(stats);
    j["target"] = config.target;
    j["mode"] = ModeName(config.mode);
    j["seed"] = config.seed;
    j["budget_execs"] = config.budget_execs;
    j["budget_secs"] = config.budget_secs;
    if (ml_report) {
      j["ml"] = {{"candidates_sent", ml_report->candidates_sent},
                 {"messages_received", ml_report->messages_received},
                 {"last_bitwise_accuracy", ml_report->last_accuracy},
                 {"input_width", ml_report->input_width},
                 {"n_labels", ml_report->n_labels},
                 {"failed", ml_report->failed},
                 {"error", ml_report->error}};
    }
    std::ofstream out(*config.out_dir / "summary.json", std::ios::trunc);
    out << j.dump(2) << '\n';
  }
  return stats;
}

}  // namespace advfuzz
