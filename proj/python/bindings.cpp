#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cbsql/agents.hpp"
#include "cbsql/counts.hpp"
#include "cbsql/distributional.hpp"
#include "cbsql/errors.hpp"
#include "cbsql/harness.hpp"
#include "cbsql/maxent.hpp"

namespace py = pybind11;
using namespace cbsql;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Soft operators, pseudo-counts, chain-walk experiments";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidParameter>(m, "InvalidParameter", error.ptr());
  py::register_exception<InvalidObservation>(m, "InvalidObservation", error.ptr());
  py::register_exception<NonLearningModel>(m, "NonLearningModel", error.ptr());
  py::register_exception<EpisodeFinished>(m, "EpisodeFinished", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", error.ptr());
  py::register_exception<EmptyInput>(m, "EmptyInput", error.ptr());
  py::register_exception<InvalidConfiguration>(m, "InvalidConfiguration", error.ptr());
  py::register_exception<NotReady>(m, "NotReady", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  py::enum_<maxent::OperatorMode>(m, "OperatorMode")
      .value("MELLOWMAX_MEAN", maxent::OperatorMode::MellowmaxMean)
      .value("LOG_PARTITION", maxent::OperatorMode::LogPartition);

  m.def(
      "mellowmax",
      [](const std::vector<double>& q, double beta, maxent::OperatorMode mode) {
        return maxent::mellowmax(q, beta, mode);
      },
      py::arg("q"), py::arg("beta"), py::arg("mode") = maxent::OperatorMode::MellowmaxMean);
  m.def(
      "softmax_policy",
      [](const std::vector<double>& q, double beta) {
        const auto pi = maxent::softmax_policy(q, beta);
        return std::vector<double>(pi.probs().begin(), pi.probs().end());
      },
      py::arg("q"), py::arg("beta"));
  m.def(
      "policy_entropy",
      [](const std::vector<double>& probs) { return maxent::policy_entropy(maxent::PolicyDistribution(probs)); },
      py::arg("probs"));
  m.def(
      "soft_backup_target",
      [](double r, double gamma, const std::vector<double>& q_next, double beta, maxent::OperatorMode mode) {
        return maxent::soft_backup_target(r, gamma, q_next, beta, mode);
      },
      py::arg("r"), py::arg("gamma"), py::arg("q_next"), py::arg("beta"),
      py::arg("mode") = maxent::OperatorMode::MellowmaxMean);
  m.def(
      "nstep_soft_return",
      [](const std::vector<double>& rewards, const std::vector<double>& entropies, double gamma, double beta) {
        return maxent::nstep_soft_return(rewards, entropies, gamma, beta);
      },
      py::arg("rewards"), py::arg("entropies"), py::arg("gamma"), py::arg("beta"));

  m.def("pseudo_count", &counts::pseudo_count, py::arg("rho"), py::arg("rho_prime"));

  py::class_<counts::FactoredKtModel>(m, "FactoredKtModel")
      .def(py::init<std::vector<int>>(), py::arg("alphabet_sizes"))
      .def("model_prob", &counts::FactoredKtModel::model_prob)
      .def("recoding_prob", &counts::FactoredKtModel::recoding_prob)
      .def("update", &counts::FactoredKtModel::update)
      .def("pseudo_count", &counts::FactoredKtModel::pseudo_count)
      .def("to_text", [](const counts::FactoredKtModel& model) {
        std::ostringstream out;
        model.write(out);
        return out.str();
      });

  py::class_<counts::TemperatureSchedule>(m, "TemperatureSchedule")
      .def_static("constant", &counts::TemperatureSchedule::constant, py::arg("beta"))
      .def_static("linear", &counts::TemperatureSchedule::linear, py::arg("kappa"))
      .def_static("count_based", &counts::TemperatureSchedule::count_based, py::arg("kappa"))
      .def("beta_for", &counts::TemperatureSchedule::beta_for, py::arg("count"), py::arg("iteration"));

  m.def(
      "chain_optimal_return",
      [](int n_states, int horizon) {
        env::ChainSpec spec;
        spec.n_states = n_states;
        spec.horizon = horizon;
        const auto best = env::optimal_return_oracle(spec);
        return py::make_tuple(best.numerator(), best.denominator());
      },
      py::arg("n_states") = 5, py::arg("horizon") = 5,
      "Exact optimum of the noiseless chain as (numerator, denominator).");

  m.def(
      "project_to_support",
      [](const std::vector<double>& values, const std::vector<double>& masses, double v_min, double v_max,
         int n_atoms) { return dist::project_to_support(values, masses, dist::AtomGrid(v_min, v_max, n_atoms)); },
      py::arg("values"), py::arg("masses"), py::arg("v_min"), py::arg("v_max"), py::arg("n_atoms"));
  m.def(
      "distributional_soft_target",
      [](double r, double gamma, const std::vector<std::vector<double>>& probs, double beta, double v_min,
         double v_max) {
        const int n_atoms = probs.empty() ? 0 : static_cast<int>(probs.front().size());
        dist::CategoricalReturnDistribution d(dist::AtomGrid(v_min, v_max, n_atoms), probs);
        return dist::distributional_soft_target(r, gamma, d, beta);
      },
      py::arg("r"), py::arg("gamma"), py::arg("probs"), py::arg("beta"), py::arg("v_min") = -10.0,
      py::arg("v_max") = 10.0);

  m.def(
      "run_experiment",
      [](const std::string& config_text, int workers) {
        auto cfg = harness::parse_config(config_text);
        cfg.output.clear();  // returned as text instead
        std::vector<harness::RunRecord> records;
        {
          py::gil_scoped_release release;
          records = harness::run_experiment(cfg, workers);
        }
        return harness::to_csv(records);
      },
      py::arg("config_text"), py::arg("workers") = 0, "Run a config; returns the results CSV text. The config's output key is not written.");

  m.def(
      "aggregate",
      [](const std::string& csv_text, int window) {
        std::istringstream in(csv_text);
        const auto records = harness::read_csv(in);
        py::list out;
        for (const auto& agg : harness::aggregate_by_agent(records, window)) {
          py::dict row;
          row["agent"] = agg.agent;
          row["mean"] = agg.mean;
          row["std"] = agg.stddev;
          row["trailing_mean"] = agg.trailing_mean;
          row["trailing_std"] = agg.trailing_std;
          out.append(row);
        }
        return out;
      },
      py::arg("csv_text"), py::arg("window"));

  m.def(
      "reproduce_chainwalk",
      [](int runs, int episodes, std::uint64_t seed, int workers) {
        harness::ChainwalkOptions opts;
        opts.runs = runs;
        opts.episodes = episodes;
        opts.base_seed = seed;
        opts.workers = workers;
        harness::ChainwalkReport report;
        {
          py::gil_scoped_release release;
          report = harness::reproduce_chainwalk(opts);
        }
        py::dict rows;
        for (const auto& row : report.rows) rows[py::str(row.agent)] = row.trailing_mean;
        return py::make_tuple(rows, report.pass);
      },
      py::arg("runs") = 1000, py::arg("episodes") = 300, py::arg("seed") = harness::ChainwalkOptions{}.base_seed,
      py::arg("workers") = 0);
}
