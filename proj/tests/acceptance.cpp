// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cbsql/agents.hpp"
#include "cbsql/counts.hpp"
#include "cbsql/distributional.hpp"
#include "cbsql/environments.hpp"
#include "cbsql/harness.hpp"
#include "cbsql/maxent.hpp"
#include "oracles.hpp"

using namespace cbsql;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome chainwalk_reproduction() {
  harness::ChainwalkOptions opts;  // 1000 runs x 300 episodes, window 50
  const auto report = harness::reproduce_chainwalk(opts);
  std::ostringstream detail;
  for (const auto& row : report.rows) detail << row.agent << "=" << fmt("%.4f", row.trailing_mean) << " ";
  return {report.pass, detail.str() + "(need cbsql >= 0.5 and above all baselines)"};
}

Outcome optimal_return() {
  const auto best = env::optimal_return_oracle(env::ChainSpec{});
  const bool pass = best == env::Rational(3, 5);
  return {pass, "optimum " + std::to_string(best.numerator()) + "/" + std::to_string(best.denominator()) +
                    " (need exactly 3/5)"};
}

Outcome operator_properties() {
  using maxent::mellowmax;
  using maxent::OperatorMode;
  std::mt19937_64 rng(20220);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> value(-5.0, 5.0);
  std::uniform_real_distribution<double> log_beta(-3.0, 3.0);
  std::uniform_real_distribution<double> big(-1e3, 1e3);
  auto draw = [&](std::size_t n, auto& dist) {
    std::vector<double> q(n);
    for (auto& v : q) v = dist(rng);
    return q;
  };
  const double tol = 1e-12;
  int monotone = 0, expansion = 0, bounds = 0, hard_max = 0, overflow = 0;
  double worst_hard = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    const auto q = draw(n, value);
    const double qmax = *std::max_element(q.begin(), q.end());
    double b1 = std::pow(10.0, log_beta(rng)), b2 = std::pow(10.0, log_beta(rng));
    if (b1 > b2) std::swap(b1, b2);

    if (mellowmax(q, b1, OperatorMode::MellowmaxMean) > mellowmax(q, b2, OperatorMode::MellowmaxMean) + tol)
      ++monotone;

    auto q2 = q;
    for (auto& v : q2) v += value(rng) * 0.2;
    double dist = 0.0;
    for (std::size_t k = 0; k < n; ++k) dist = std::max(dist, std::abs(q[k] - q2[k]));
    for (auto mode : {OperatorMode::MellowmaxMean, OperatorMode::LogPartition}) {
      if (std::abs(mellowmax(q, b1, mode) - mellowmax(q2, b1, mode)) > dist + tol) ++expansion;
    }

    const double mm = mellowmax(q, b1, OperatorMode::MellowmaxMean);
    if (mm > qmax + tol || mm < qmax - std::log(static_cast<double>(n)) / b1 - tol) ++bounds;

    const double hard = std::abs(mellowmax(q, 1e6, OperatorMode::MellowmaxMean) - qmax);
    worst_hard = std::max(worst_hard, hard);
    if (hard > 1e-4) ++hard_max;

    const auto large = draw(n, big);
    const double lmax = *std::max_element(large.begin(), large.end());
    for (auto mode : {OperatorMode::MellowmaxMean, OperatorMode::LogPartition}) {
      const double v = mellowmax(large, b2, mode);
      if (!std::isfinite(v) || v > lmax + std::log(static_cast<double>(n)) / b2 + 1e-9 ||
          v < lmax - std::log(static_cast<double>(n)) / b2 - 1e-9)
        ++overflow;
    }
  }
  const bool pass = monotone + expansion + bounds + hard_max + overflow == 0;
  std::ostringstream detail;
  detail << "violations: monotone " << monotone << ", non-expansion " << expansion << ", bounds " << bounds
         << ", hard-max " << hard_max << fmt(" (worst %.2e)", worst_hard) << ", overflow " << overflow
         << " over 1000 instances";
  return {pass, detail.str()};
}

Outcome pseudo_count_closed_form() {
  double worst_single = 0.0;
  counts::FactoredKtModel single({2});
  for (int n = 0; n <= 1000; ++n) {
    worst_single = std::max(worst_single, std::abs(single.pseudo_count({0}) - (n + 0.5)));
    single.update({0});
  }

  double worst_pair = 0.0;
  std::mt19937_64 rng(6);
  counts::FactoredKtModel pair({3, 4});
  std::uniform_int_distribution<int> fx(0, 2), fy(0, 3);
  for (int step = 0; step <= 1000; ++step) {
    const Observation s{fx(rng), fy(rng)};
    std::vector<std::vector<std::uint64_t>> c{pair.factor(0).counts(), pair.factor(1).counts()};
    worst_pair = std::max(worst_pair, std::abs(pair.pseudo_count(s) - oracle::kt_pseudo_count_exact(c, s)));
    pair.update(s);
  }
  const bool pass = worst_single <= 1e-9 && worst_pair <= 1e-9;
  return {pass, fmt("max |err| single-factor %.2e, two-factor %.2e (need <= 1e-9)", worst_single, worst_pair)};
}

double greedy_chain_return(const agents::ValueTable& table, const env::ChainSpec& spec) {
  env::ChainWalkEnv chain(spec, Rng(0));
  Observation s = chain.reset();
  double total = 0.0;
  for (int t = 0; t < spec.horizon; ++t) {
    const auto step = chain.step(agents::greedy_action(table.values(s)));
    total += step.reward;
    s = step.next_state;
  }
  return total;
}

Outcome sql_q_learning_limit() {
  env::ChainSpec spec;
  spec.noise_std = 0.0;
  agents::AgentConfig cfg;
  cfg.gamma = 0.99;
  cfg.learning_rate = 1.0;
  cfg.epsilon = 0.3;
  agents::TabularAgent q(agents::TabularKind::QLearning, cfg, 2, Rng(42));
  cfg.schedule = counts::TemperatureSchedule::constant(1e6);
  agents::TabularAgent sql(agents::TabularKind::Sql, cfg, 2, Rng(42));
  env::ChainWalkEnv chain_q(spec, Rng(1)), chain_sql(spec, Rng(1));
  for (int episode = 0; episode < 5000; ++episode) {
    agents::run_episode(q, chain_q);
    agents::run_episode(sql, chain_sql);
  }
  const double gap = q.table().max_abs_diff(sql.table());
  const double ret_q = greedy_chain_return(q.table(), spec);
  const double ret_sql = greedy_chain_return(sql.table(), spec);
  const bool pass = gap <= 1e-3 && std::abs(ret_q - 0.6) < 1e-9 && std::abs(ret_sql - 0.6) < 1e-9;
  return {pass, fmt("max-norm gap %.2e (need <= 1e-3), greedy returns %.6g / %.6g (need 0.6)", gap, ret_q, ret_sql)};
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(n);
  for (auto& v : p) v = e(rng);
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= total;
  return p;
}

Outcome distributional_backup() {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> value(-15.0, 15.0);
  std::uniform_real_distribution<double> reward(-2.0, 2.0);
  const auto grid = dist::AtomGrid::standard();

  double worst_mass = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 80);
    const auto masses = random_simplex(rng, n);
    std::vector<double> values(n);
    for (auto& v : values) v = value(rng);
    const auto p = dist::project_to_support(values, masses, grid);
    worst_mass = std::max(worst_mass, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }

  double worst_atom = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::vector<double>> probs;
    for (int a = 0; a < 2 + i % 5; ++a) probs.push_back(random_simplex(rng, grid.size()));
    const dist::CategoricalReturnDistribution d(grid, probs);
    const double r = reward(rng);
    const auto soft = dist::distributional_soft_target(r, 0.99, d, 1e9);
    const auto hard = oracle::greedy_c51_target(r, 0.99, grid.atoms(), probs);
    for (std::size_t j = 0; j < grid.size(); ++j) worst_atom = std::max(worst_atom, std::abs(soft[j] - hard[j]));
  }

  double uniform_kl = 0.0;
  for (std::size_t a = 1; a <= 18; ++a) {
    uniform_kl = std::max(uniform_kl, dist::kl_from_uniform(
                                          maxent::PolicyDistribution(std::vector<double>(a, 1.0 / static_cast<double>(a)))));
  }
  const bool pass = worst_mass <= 1e-9 && worst_atom <= 1e-6 && uniform_kl == 0.0;
  return {pass, fmt("mass err %.2e (<= 1e-9), greedy C51 atom err %.2e (<= 1e-6), uniform KL %.1g (== 0)",
                    worst_mass, worst_atom, uniform_kl)};
}

Outcome determinism() {
  std::vector<std::string> failed;
  for (const char* agent : {"q_learning", "sql\nagent.beta = 100", "cbsql", "replay_cbsql"}) {
    const std::string text = std::string("env.kind = chain\nagent.kind = ") + agent +
                             "\nepisodes = 100\nruns = 32\nbase_seed = 9\noutput = unused.csv\n";
    auto cfg = harness::parse_config(text);
    cfg.output.clear();
    const auto serial = harness::to_csv(harness::run_experiment(cfg, 1));
    const auto parallel = harness::to_csv(harness::run_experiment(cfg, 8));
    const auto again = harness::to_csv(harness::run_experiment(cfg, 3));
    if (serial != parallel || serial != again) failed.emplace_back(agent);
  }
  std::string detail = "serial vs 8 and 3 workers, 4 agent kinds";
  for (const auto& f : failed) detail += "; differs: " + f.substr(0, f.find('\n'));
  return {failed.empty(), detail};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbsql acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-7); default all")->check(CLI::Range(1, 7));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "chain-walk reproduction", chainwalk_reproduction},
      {2, "optimal-return oracle", optimal_return},
      {3, "operator properties", operator_properties},
      {4, "pseudo-count closed form", pseudo_count_closed_form},
      {5, "SQL vs Q-learning limit", sql_q_learning_limit},
      {6, "distributional soft backup", distributional_backup},
      {7, "determinism", determinism},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %-28s %s  %s  [%.1fs]\n", c.id, c.name, out.pass ? "PASS" : "FAIL", out.detail.c_str(),
                secs);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
