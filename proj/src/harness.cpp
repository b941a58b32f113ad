#include "cbsql/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "cbsql/errors.hpp"

namespace cbsql::harness {

std::unique_ptr<env::Environment> make_environment(const EnvConfig& cfg, std::uint64_t base_seed, int run) {
  switch (cfg.kind) {
    case EnvKind::Chain:
      return std::make_unique<env::ChainWalkEnv>(
          cfg.chain, make_rng(base_seed, static_cast<std::uint64_t>(run), Stream::Environment));
    case EnvKind::Grid:
      return std::make_unique<env::GridEnv>(cfg.grid);
  }
  throw InvalidConfiguration("unknown environment kind");
}

std::unique_ptr<agents::Agent> make_agent(const AgentSpec& spec, const env::Environment& env,
                                          std::uint64_t base_seed, int run) {
  const auto r = static_cast<std::uint64_t>(run);
  const int actions = env.action_count();
  switch (spec.kind) {
    case AgentKind::QLearning:
      return std::make_unique<agents::TabularAgent>(agents::TabularKind::QLearning, spec.config, actions,
                                                    make_rng(base_seed, r, Stream::Agent));
    case AgentKind::Sql:
      return std::make_unique<agents::TabularAgent>(agents::TabularKind::Sql, spec.config, actions,
                                                    make_rng(base_seed, r, Stream::Agent));
    case AgentKind::Cbsql:
      return std::make_unique<agents::TabularAgent>(agents::TabularKind::Cbsql, spec.config, actions,
                                                    make_rng(base_seed, r, Stream::Agent));
    case AgentKind::ReplayCbsql:
      return std::make_unique<agents::ReplayCbsqlAgent>(spec.config, actions, env.observation_alphabet(),
                                                        make_rng(base_seed, r, Stream::Agent),
                                                        make_rng(base_seed, r, Stream::Replay));
    case AgentKind::Scripted:
      return std::make_unique<agents::ScriptedAgent>(spec.script, actions);
  }
  throw InvalidConfiguration("unknown agent kind");
}

int default_workers() {
  if (const char* env = std::getenv("CBSQL_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

namespace {

std::vector<double> run_one(const ExperimentConfig& cfg, int run) {
  auto environment = make_environment(cfg.env, cfg.base_seed, run);
  auto agent = make_agent(cfg.agent, *environment, cfg.base_seed, run);
  std::vector<double> returns(static_cast<std::size_t>(cfg.episodes));
  for (auto& ret : returns) ret = agents::run_episode(*agent, *environment);
  return returns;
}

std::string format_return(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int workers) {
  if (cfg.runs < 1 || cfg.episodes < 1) throw InvalidParameter("runs and episodes must be positive");
  std::ofstream out;
  if (!cfg.output.empty()) {
    out.open(cfg.output, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output " + cfg.output);
  }
  // Fails on a bad agent/env pairing before any worker starts.
  std::string label = cfg.agent.label;
  {
    auto environment = make_environment(cfg.env, cfg.base_seed, 0);
    auto agent = make_agent(cfg.agent, *environment, cfg.base_seed, 0);
    if (label.empty()) label = agent->label();
  }

  if (workers <= 0) workers = default_workers();
  workers = std::min(workers, cfg.runs);

  std::vector<std::vector<double>> returns(static_cast<std::size_t>(cfg.runs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next.fetch_add(1); r < cfg.runs; r = next.fetch_add(1)) {
          try {
            returns[static_cast<std::size_t>(r)] = run_one(cfg, r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next.store(cfg.runs);
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> records;
  records.reserve(static_cast<std::size_t>(cfg.runs) * static_cast<std::size_t>(cfg.episodes));
  for (int r = 0; r < cfg.runs; ++r) {
    for (int e = 0; e < cfg.episodes; ++e) {
      records.push_back({label, r, e, returns[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)]});
    }
  }
  if (out.is_open()) {
    write_csv(out, records);
    if (!out) throw IoError("failed writing " + cfg.output);
  }
  return records;
}

void write_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << "agent,run_id,episode,return\n";
  for (const auto& rec : records) {
    out << rec.agent << ',' << rec.run_id << ',' << rec.episode << ',' << format_return(rec.ret) << '\n';
  }
}

std::string to_csv(std::span<const RunRecord> records) {
  std::ostringstream out;
  write_csv(out, records);
  return out.str();
}

void write_csv_file(const std::filesystem::path& path, std::span<const RunRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open output " + path.string());
  write_csv(out, records);
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "agent,run_id,episode,return") {
    throw ShapeError("CSV header must be 'agent,run_id,episode,return'");
  }
  std::vector<RunRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream fields(line);
    RunRecord rec;
    std::string run_id, episode, ret;
    if (!std::getline(fields, rec.agent, ',') || !std::getline(fields, run_id, ',') ||
        !std::getline(fields, episode, ',') || !std::getline(fields, ret)) {
      throw ShapeError("CSV line " + std::to_string(line_no) + " does not have four fields");
    }
    try {
      std::size_t used = 0;
      rec.run_id = std::stoi(run_id, &used);
      if (used != run_id.size()) throw std::invalid_argument(run_id);
      rec.episode = std::stoi(episode, &used);
      if (used != episode.size()) throw std::invalid_argument(episode);
      rec.ret = std::stod(ret, &used);
      if (used != ret.size()) throw std::invalid_argument(ret);
    } catch (const std::logic_error&) {
      throw ShapeError("CSV line " + std::to_string(line_no) + " has a malformed number");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RunRecord> read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return read_csv(in);
}

namespace {

// Mean about the first element, so constant input comes back exactly.
std::pair<double, double> mean_and_std(std::span<const double> xs) {
  const double pivot = xs.front();
  double sum = 0.0;
  for (double x : xs) sum += x - pivot;
  const double n = static_cast<double>(xs.size());
  const double mean = pivot + sum / n;
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / n)};
}

}  // namespace

Aggregate aggregate(std::span<const RunRecord> records, int window) {
  if (records.empty()) throw EmptyInput("no records to aggregate");

  std::map<int, std::map<int, double>> by_run;
  for (const auto& rec : records) {
    if (rec.agent != records.front().agent) throw ShapeError("records mix several agents; aggregate per agent");
    if (!by_run[rec.run_id].emplace(rec.episode, rec.ret).second) {
      throw ShapeError("duplicate record for run " + std::to_string(rec.run_id) + " episode " +
                       std::to_string(rec.episode));
    }
  }
  const std::size_t episodes = by_run.begin()->second.size();
  for (const auto& [run, eps] : by_run) {
    if (eps.size() != episodes || eps.begin()->first != 0 || eps.rbegin()->first != static_cast<int>(episodes) - 1) {
      throw ShapeError("run " + std::to_string(run) + " does not cover episodes 0.." + std::to_string(episodes - 1));
    }
  }
  if (window < 1 || static_cast<std::size_t>(window) > episodes) {
    throw InvalidParameter("window must lie in [1, " + std::to_string(episodes) + "]");
  }

  Aggregate agg;
  agg.agent = records.front().agent;
  agg.runs = static_cast<int>(by_run.size());
  agg.window = window;
  agg.mean.assign(episodes, 0.0);
  agg.stddev.assign(episodes, 0.0);
  std::vector<double> column(by_run.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    std::size_t i = 0;
    for (const auto& [run, eps] : by_run) column[i++] = eps.at(static_cast<int>(e));
    std::tie(agg.mean[e], agg.stddev[e]) = mean_and_std(column);
  }

  const std::size_t first = episodes - static_cast<std::size_t>(window);
  agg.trailing_mean = mean_and_std(std::span<const double>(agg.mean).subspan(first)).first;

  std::vector<double> per_run;
  per_run.reserve(by_run.size());
  std::vector<double> tail(static_cast<std::size_t>(window));
  for (const auto& [run, eps] : by_run) {
    for (std::size_t e = first; e < episodes; ++e) tail[e - first] = eps.at(static_cast<int>(e));
    per_run.push_back(mean_and_std(tail).first);
  }
  agg.trailing_std = mean_and_std(per_run).second;
  return agg;
}

std::vector<Aggregate> aggregate_by_agent(std::span<const RunRecord> records, int window) {
  if (records.empty()) throw EmptyInput("no records to aggregate");
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunRecord>> groups;
  for (const auto& rec : records) {
    auto [it, inserted] = groups.try_emplace(rec.agent);
    if (inserted) order.push_back(rec.agent);
    it->second.push_back(rec);
  }
  std::vector<Aggregate> out;
  for (const auto& agent : order) out.push_back(aggregate(groups[agent], window));
  return out;
}

void write_summary(std::ostream& out, std::span<const Aggregate> rows) {
  out << "agent,trailing_mean,trailing_std\n";
  for (const auto& row : rows) {
    out << row.agent << ',' << format_return(row.trailing_mean) << ',' << format_return(row.trailing_std) << '\n';
  }
}

std::optional<int> first_episode_above(std::span<const double> means, int window, double threshold) {
  if (window < 1) throw InvalidParameter("moving-average window must be positive");
  double sum = 0.0;
  for (std::size_t e = 0; e < means.size(); ++e) {
    sum += means[e];
    if (e >= static_cast<std::size_t>(window)) sum -= means[e - static_cast<std::size_t>(window)];
    if (e + 1 >= static_cast<std::size_t>(window) && sum / window > threshold) return static_cast<int>(e);
  }
  return std::nullopt;
}

ExperimentConfig chainwalk_config(AgentKind kind, double beta, const ChainwalkOptions& opts) {
  ExperimentConfig cfg;
  cfg.env.kind = EnvKind::Chain;
  cfg.agent.kind = kind;
  cfg.agent.config.gamma = 0.99;
  cfg.agent.config.epsilon = 0.01;
  cfg.agent.config.learning_rate = 1.0;
  cfg.agent.config.schedule = kind == AgentKind::Sql ? counts::TemperatureSchedule::constant(beta)
                                                     : counts::TemperatureSchedule::count_based(0.01);
  cfg.episodes = opts.episodes;
  cfg.runs = opts.runs;
  cfg.base_seed = opts.base_seed;
  return cfg;
}

ChainwalkReport reproduce_chainwalk(const ChainwalkOptions& opts) {
  struct Entry {
    AgentKind kind;
    double beta;
  };
  const Entry entries[] = {{AgentKind::QLearning, 0.0},
                           {AgentKind::Sql, 10.0},
                           {AgentKind::Sql, 100.0},
                           {AgentKind::Sql, 1000.0},
                           {AgentKind::Cbsql, 0.0}};

  ChainwalkReport report;
  report.optimum = env::optimal_return_oracle(env::ChainSpec{});
  for (const auto& entry : entries) {
    auto records = run_experiment(chainwalk_config(entry.kind, entry.beta, opts), opts.workers);
    const Aggregate agg = aggregate(records, opts.window);
    report.rows.push_back({agg.agent, agg.trailing_mean, agg.trailing_std, first_episode_above(agg.mean, 20, 0.4)});
    report.records.push_back(std::move(records));
  }

  const ChainwalkRow& cbsql = report.rows.back();
  report.pass = cbsql.trailing_mean >= 0.5;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    report.pass = report.pass && cbsql.trailing_mean > report.rows[i].trailing_mean;
  }
  return report;
}

void print_report(std::ostream& out, const ChainwalkReport& report, int window) {
  out << "agent           trailing-" << window << " mean +- std    first MA20 > 0.4\n";
  for (const auto& row : report.rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-15s %10.4f +- %-8.4f   %s\n", row.agent.c_str(), row.trailing_mean,
                  row.trailing_std, row.converged_at ? std::to_string(*row.converged_at).c_str() : "never");
    out << line;
  }
  out << "optimum         " << std::setw(10) << env::to_double(report.optimum) << "  (exact "
      << report.optimum.numerator() << '/' << report.optimum.denominator() << ")\n";
  out << "verdict: " << (report.pass ? "PASS" : "FAIL")
      << " (cbsql trailing mean >= 0.5 and above every baseline)\n";
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::QLearning:
      return "q_learning";
    case AgentKind::Sql:
      return "sql";
    case AgentKind::Cbsql:
      return "cbsql";
    case AgentKind::ReplayCbsql:
      return "replay_cbsql";
    case AgentKind::Scripted:
      return "scripted";
  }
  return "unknown";
}

}  // namespace cbsql::harness
