#pragma once

// Seeded multi-run experiments, CSV output, aggregation and the chain-walk
// reproduction command.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbsql/agents.hpp"
#include "cbsql/environments.hpp"

namespace cbsql::harness {

enum class EnvKind { Chain, Grid };
enum class AgentKind { QLearning, Sql, Cbsql, ReplayCbsql, Scripted };

struct EnvConfig {
  EnvKind kind = EnvKind::Chain;
  env::ChainSpec chain;
  env::GridSpec grid;
};

struct AgentSpec {
  AgentKind kind = AgentKind::Cbsql;
  agents::AgentConfig config;
  std::vector<int> script;  // scripted agent only
  std::string label;        // empty: use the agent's own label
};

struct ExperimentConfig {
  EnvConfig env;
  AgentSpec agent;
  int episodes = 300;
  int runs = 1000;
  std::uint64_t base_seed = 0;
  std::string output;
};

// Parses the flat "key = value" config format (see README). Blank lines and
// lines starting with '#' are ignored. Required keys: env.kind, agent.kind,
// episodes, runs, base_seed, output. Unknown keys, keys that do not apply to
// the chosen kinds, duplicates and malformed values raise ConfigError naming
// the key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunRecord {
  std::string agent;
  int run_id = 0;
  int episode = 0;
  double ret = 0.0;

  bool operator==(const RunRecord&) const = default;
};

std::unique_ptr<env::Environment> make_environment(const EnvConfig& cfg, std::uint64_t base_seed, int run);
std::unique_ptr<agents::Agent> make_agent(const AgentSpec& spec, const env::Environment& env,
                                          std::uint64_t base_seed, int run);

// Worker count from CBSQL_WORKERS, else the hardware concurrency.
int default_workers();

// runs x episodes records ordered by (run_id, episode). Run r draws every
// random number from streams seeded by (base_seed, r), so the result does not
// depend on `workers`. When cfg.output is non-empty the CSV is written there
// (IoError if it cannot be opened). workers <= 0 uses default_workers().
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, int workers = 0);

// Header "agent,run_id,episode,return"; returns printed with %.6g.
void write_csv(std::ostream& out, std::span<const RunRecord> records);
std::string to_csv(std::span<const RunRecord> records);
void write_csv_file(const std::filesystem::path& path, std::span<const RunRecord> records);
std::vector<RunRecord> read_csv(std::istream& in);
std::vector<RunRecord> read_csv_file(const std::filesystem::path& path);

struct Aggregate {
  std::string agent;
  int runs = 0;
  int window = 0;
  std::vector<double> mean;    // per episode, across runs
  std::vector<double> stddev;  // per episode, population
  // Mean of the final `window` per-episode means.
  double trailing_mean = 0.0;
  // Population std across runs of each run's own trailing-window mean.
  double trailing_std = 0.0;
};

// Records of a single agent. Throws EmptyInput for no records, ShapeError for
// ragged or duplicated (run_id, episode) entries or mixed agent labels, and
// InvalidParameter when window is not in [1, episodes].
Aggregate aggregate(std::span<const RunRecord> records, int window);
// Groups by agent label in order of first appearance.
std::vector<Aggregate> aggregate_by_agent(std::span<const RunRecord> records, int window);

// Header "agent,trailing_mean,trailing_std".
void write_summary(std::ostream& out, std::span<const Aggregate> rows);

// First episode index whose trailing moving average (window `window`, over
// the episodes seen so far once at least `window` exist) exceeds threshold.
std::optional<int> first_episode_above(std::span<const double> means, int window, double threshold);

struct ChainwalkOptions {
  int runs = 1000;
  int episodes = 300;
  int window = 50;
  std::uint64_t base_seed = 2022;
  int workers = 0;
};

struct ChainwalkRow {
  std::string agent;
  double trailing_mean = 0.0;
  double trailing_std = 0.0;
  std::optional<int> converged_at;  // moving-average(20) > 0.4
};

struct ChainwalkReport {
  std::vector<ChainwalkRow> rows;  // q_learning, sql_beta10, sql_beta100, sql_beta1000, cbsql
  std::vector<std::vector<RunRecord>> records;  // parallel to rows
  env::Rational optimum;
  bool pass = false;
};

// Pinned configuration for one agent of the chain-walk comparison:
// gamma 0.99, epsilon 0.01, learning rate 1, kappa 0.01.
ExperimentConfig chainwalk_config(AgentKind kind, double beta, const ChainwalkOptions& opts);

// Runs Q-learning, SQL with beta in {10, 100, 1000} and CBSQL on the noisy
// chain. PASS iff CBSQL's trailing mean is at least 0.5 and strictly above
// every baseline's.
ChainwalkReport reproduce_chainwalk(const ChainwalkOptions& opts);

void print_report(std::ostream& out, const ChainwalkReport& report, int window);

std::string to_string(AgentKind kind);

}  // namespace cbsql::harness
