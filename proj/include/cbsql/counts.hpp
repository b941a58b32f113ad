#pragma once

// Update-count machinery: exact per-state counters, a factored
// Krichevsky-Trofimov density model with pseudo-counts, and the schedules
// that turn counts into inverse temperatures.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cbsql/observation.hpp"

namespace cbsql::counts {

class ExactCounter {
 public:
  void record(const Observation& s) { ++counts_[s]; }
  std::uint64_t count(const Observation& s) const;
  std::size_t distinct_states() const noexcept { return counts_.size(); }
  const std::map<Observation, std::uint64_t>& entries() const noexcept { return counts_; }

  // One line per state, in key order: "<state_key> <count>".
  void write(std::ostream& out) const;
  static ExactCounter read(std::istream& in);

  bool operator==(const ExactCounter&) const = default;

 private:
  std::map<Observation, std::uint64_t> counts_;
};

// Sequential KT estimator over a K-symbol alphabet:
//   P(x) = (c_x + 1/2) / (n + K/2)
class KtEstimator {
 public:
  explicit KtEstimator(int alphabet_size);

  int alphabet_size() const noexcept { return static_cast<int>(counts_.size()); }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t count(int symbol) const { return counts_.at(static_cast<std::size_t>(symbol)); }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  double prob(int symbol) const;
  // Probability of `symbol` after one more observation of it.
  double recoding_prob(int symbol) const;
  void update(int symbol);

  bool operator==(const KtEstimator&) const = default;

 private:
  friend class FactoredKtModel;
  void check(int symbol) const;

  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

// Product of independent per-factor KT estimators. Stands in for a pixel-level
// sequential density model: it is a proper density and learning-positive,
// which is all the pseudo-count construction needs.
class FactoredKtModel {
 public:
  explicit FactoredKtModel(std::vector<int> alphabet_sizes);

  std::size_t factor_count() const noexcept { return factors_.size(); }
  const KtEstimator& factor(std::size_t i) const { return factors_.at(i); }
  std::uint64_t updates() const noexcept { return updates_; }

  double model_prob(const Observation& s) const;
  // Probability of s under a copy of the model updated once on s. Does not
  // mutate the model.
  double recoding_prob(const Observation& s) const;
  void update(const Observation& s);

  // rho (1 - rho') / (rho' - rho), evaluated from the count ratios directly.
  // Going through the rounded probabilities loses about half of the
  // significant digits once rho' - rho is small, so this is the route agents
  // use; the free pseudo_count() below is the textbook formula.
  double pseudo_count(const Observation& s) const;

  // Text form, stable across versions:
  //   kt-model <factor_count>
  //   factor <index> <alphabet_size> <count_0> ... <count_{K-1}>
  // followed by "updates <n>".
  void write(std::ostream& out) const;
  static FactoredKtModel read(std::istream& in);

  bool operator==(const FactoredKtModel&) const = default;

 private:
  void check(const Observation& s) const;

  std::vector<KtEstimator> factors_;
  std::uint64_t updates_ = 0;
};

// Pseudo-count from a model probability rho and recoding probability rho'.
// Requires 0 < rho < 1 and 0 < rho' < 1 (InvalidParameter) and rho' > rho
// (NonLearningModel).
double pseudo_count(double rho, double rho_prime);

enum class ScheduleKind { Constant, Linear, CountBased };

// Maps (count, iteration) to an inverse temperature.
//   Constant:   beta
//   Linear:     kappa * iteration
//   CountBased: kappa * count
// Results are clamped below at maxent::kMinBeta.
class TemperatureSchedule {
 public:
  static TemperatureSchedule constant(double beta);
  static TemperatureSchedule linear(double kappa);
  static TemperatureSchedule count_based(double kappa);

  ScheduleKind kind() const noexcept { return kind_; }
  // beta for Constant, kappa otherwise
  double parameter() const noexcept { return parameter_; }

  double beta_for(double count, std::uint64_t iteration) const;

  bool operator==(const TemperatureSchedule&) const = default;

 private:
  TemperatureSchedule(ScheduleKind kind, double parameter);

  ScheduleKind kind_;
  double parameter_;
};

std::string to_string(ScheduleKind kind);

}  // namespace cbsql::counts
