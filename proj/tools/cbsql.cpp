// Command-line front end: run a configured experiment, reproduce the noisy
// chain-walk comparison, or aggregate a results CSV.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cbsql/errors.hpp"
#include "cbsql/harness.hpp"

namespace fs = std::filesystem;
using namespace cbsql;

namespace {

int run_command(const std::string& config_path, const std::string& out_path, int workers) {
  auto cfg = harness::load_config(config_path);
  if (!out_path.empty()) cfg.output = out_path;
  const auto records = harness::run_experiment(cfg, workers);
  std::cerr << "wrote " << records.size() << " records to " << cfg.output << '\n';
  return 0;
}

int reproduce_command(int runs, int episodes, std::uint64_t seed, int workers, const std::string& out_dir) {
  harness::ChainwalkOptions opts;
  opts.runs = runs;
  opts.episodes = episodes;
  opts.base_seed = seed;
  opts.workers = workers;
  const auto report = harness::reproduce_chainwalk(opts);
  harness::print_report(std::cout, report, opts.window);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::vector<harness::Aggregate> rows;
    for (const auto& records : report.records) {
      harness::write_csv_file(fs::path(out_dir) / (records.front().agent + ".csv"), records);
      rows.push_back(harness::aggregate(records, opts.window));
    }
    std::ofstream summary(fs::path(out_dir) / "summary.csv", std::ios::binary);
    if (!summary) throw IoError("cannot write summary in " + out_dir);
    harness::write_summary(summary, rows);
  }
  return report.pass ? 0 : 1;
}

int aggregate_command(const std::string& in_path, int window, const std::string& out_path) {
  const auto records = harness::read_csv_file(in_path);
  const auto rows = harness::aggregate_by_agent(records, window);
  if (out_path.empty()) {
    harness::write_summary(std::cout, rows);
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    harness::write_summary(out, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count-based soft Q-learning experiments"};
  app.require_subcommand(1);

  int workers = 0;
  app.add_option("--workers", workers, "worker threads (default: CBSQL_WORKERS or all cores)");

  std::string config_path, out_path;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "results CSV (overrides the config's output)");

  int runs = 1000;
  int episodes = 300;
  std::uint64_t seed = harness::ChainwalkOptions{}.base_seed;
  std::string reproduce_out;
  auto* reproduce = app.add_subcommand("reproduce-chainwalk", "compare Q-learning, SQL and CBSQL on the noisy chain");
  reproduce->add_option("--runs", runs, "independent runs per agent")->check(CLI::PositiveNumber);
  reproduce->add_option("--episodes", episodes, "episodes per run")->check(CLI::Range(50, 1000000));
  reproduce->add_option("--seed", seed, "base seed");
  reproduce->add_option("--out", reproduce_out, "directory for per-agent CSVs and summary.csv");

  std::string in_path, summary_out;
  int window = 50;
  auto* agg = app.add_subcommand("aggregate", "summarize a results CSV");
  agg->add_option("--in", in_path, "results CSV")->required()->check(CLI::ExistingFile);
  agg->add_option("--window", window, "trailing window in episodes")->required();
  agg->add_option("--out", summary_out, "summary CSV (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(config_path, out_path, workers);
    if (*reproduce) return reproduce_command(runs, episodes, seed, workers, reproduce_out);
    if (*agg) return aggregate_command(in_path, window, summary_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
