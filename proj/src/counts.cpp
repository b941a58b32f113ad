#include "cbsql/counts.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "cbsql/errors.hpp"
#include "cbsql/maxent.hpp"

namespace cbsql::counts {

std::uint64_t ExactCounter::count(const Observation& s) const {
  auto it = counts_.find(s);
  return it == counts_.end() ? 0 : it->second;
}

void ExactCounter::write(std::ostream& out) const {
  for (const auto& [s, n] : counts_) out << state_key(s) << ' ' << n << '\n';
}

ExactCounter ExactCounter::read(std::istream& in) {
  ExactCounter counter;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string key;
    std::uint64_t n = 0;
    if (!(fields >> key >> n)) throw InvalidParameter("malformed counter line '" + line + "'");
    counter.counts_[parse_state_key(key)] = n;
  }
  return counter;
}

KtEstimator::KtEstimator(int alphabet_size) {
  if (alphabet_size < 2) throw InvalidParameter("KT alphabet needs at least two symbols");
  counts_.assign(static_cast<std::size_t>(alphabet_size), 0);
}

void KtEstimator::check(int symbol) const {
  if (symbol < 0 || symbol >= alphabet_size()) {
    throw InvalidObservation("symbol " + std::to_string(symbol) + " outside alphabet of size " +
                             std::to_string(alphabet_size()));
  }
}

double KtEstimator::prob(int symbol) const {
  check(symbol);
  const double half_k = 0.5 * alphabet_size();
  return (static_cast<double>(counts_[symbol]) + 0.5) / (static_cast<double>(total_) + half_k);
}

double KtEstimator::recoding_prob(int symbol) const {
  check(symbol);
  const double half_k = 0.5 * alphabet_size();
  return (static_cast<double>(counts_[symbol]) + 1.5) / (static_cast<double>(total_) + 1.0 + half_k);
}

void KtEstimator::update(int symbol) {
  check(symbol);
  ++counts_[symbol];
  ++total_;
}

FactoredKtModel::FactoredKtModel(std::vector<int> alphabet_sizes) {
  if (alphabet_sizes.empty()) throw InvalidParameter("density model needs at least one factor");
  factors_.reserve(alphabet_sizes.size());
  for (int k : alphabet_sizes) factors_.emplace_back(k);
}

void FactoredKtModel::check(const Observation& s) const {
  if (s.size() != factors_.size()) {
    throw InvalidObservation("observation has " + std::to_string(s.size()) + " factors, model has " +
                             std::to_string(factors_.size()));
  }
  for (std::size_t i = 0; i < s.size(); ++i) factors_[i].check(s[i]);
}

double FactoredKtModel::model_prob(const Observation& s) const {
  check(s);
  double p = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) p *= factors_[i].prob(s[i]);
  return p;
}

double FactoredKtModel::recoding_prob(const Observation& s) const {
  check(s);
  double p = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i) p *= factors_[i].recoding_prob(s[i]);
  return p;
}

void FactoredKtModel::update(const Observation& s) {
  check(s);
  for (std::size_t i = 0; i < s.size(); ++i) factors_[i].update(s[i]);
  ++updates_;
}

double FactoredKtModel::pseudo_count(const Observation& s) const {
  check(s);
  // Per factor, with a = n + K/2 and c the symbol count:
  //   rho'/rho - 1 = (a - c - 1/2) / ((c + 1/2)(a + 1))
  //   1 - rho'     = (a - c - 1/2) / (a + 1)
  // The numerators are exact half-integers, so both quantities keep full
  // relative precision; products across factors go through log1p/expm1.
  double log_ratio = 0.0;
  double log_recoding = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const KtEstimator& f = factors_[i];
    const double a = static_cast<double>(f.total_) + 0.5 * f.alphabet_size();
    const double c = static_cast<double>(f.counts_[s[i]]);
    const double slack = a - c - 0.5;
    log_ratio += std::log1p(slack / ((c + 0.5) * (a + 1.0)));
    log_recoding += std::log1p(-slack / (a + 1.0));
  }
  const double ratio_excess = std::expm1(log_ratio);
  const double recoding_complement = -std::expm1(log_recoding);
  if (!(ratio_excess > 0.0)) throw NonLearningModel("density model is not learning-positive at this state");
  return recoding_complement / ratio_excess;
}

void FactoredKtModel::write(std::ostream& out) const {
  out << "kt-model " << factors_.size() << '\n';
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    out << "factor " << i << ' ' << factors_[i].alphabet_size();
    for (auto c : factors_[i].counts()) out << ' ' << c;
    out << '\n';
  }
  out << "updates " << updates_ << '\n';
}

FactoredKtModel FactoredKtModel::read(std::istream& in) {
  auto fail = [](const std::string& why) { return InvalidParameter("malformed kt-model: " + why); };
  std::string tag;
  std::size_t factor_count = 0;
  if (!(in >> tag >> factor_count) || tag != "kt-model" || factor_count == 0) throw fail("header");

  std::vector<int> sizes;
  std::vector<std::vector<std::uint64_t>> counts;
  for (std::size_t i = 0; i < factor_count; ++i) {
    std::size_t index = 0;
    int k = 0;
    if (!(in >> tag >> index >> k) || tag != "factor" || index != i || k < 2) throw fail("factor line");
    std::vector<std::uint64_t> c(static_cast<std::size_t>(k));
    for (auto& v : c) {
      if (!(in >> v)) throw fail("factor counts");
    }
    sizes.push_back(k);
    counts.push_back(std::move(c));
  }
  std::uint64_t updates = 0;
  if (!(in >> tag >> updates) || tag != "updates") throw fail("updates line");

  FactoredKtModel model(sizes);
  for (std::size_t i = 0; i < factor_count; ++i) {
    std::uint64_t total = 0;
    for (auto v : counts[i]) total += v;
    if (total != updates) throw fail("factor totals disagree with update count");
    model.factors_[i].counts_ = counts[i];
    model.factors_[i].total_ = total;
  }
  model.updates_ = updates;
  return model;
}

double pseudo_count(double rho, double rho_prime) {
  if (!(rho > 0.0 && rho < 1.0) || !(rho_prime > 0.0 && rho_prime < 1.0)) {
    throw InvalidParameter("pseudo-count needs probabilities strictly inside (0,1)");
  }
  if (!(rho_prime > rho)) {
    throw NonLearningModel("recoding probability does not exceed model probability");
  }
  return rho * (1.0 - rho_prime) / (rho_prime - rho);
}

TemperatureSchedule::TemperatureSchedule(ScheduleKind kind, double parameter)
    : kind_(kind), parameter_(parameter) {
  if (!(parameter > 0.0) || !std::isfinite(parameter)) {
    throw InvalidParameter(to_string(kind) + " schedule parameter must be positive and finite");
  }
}

TemperatureSchedule TemperatureSchedule::constant(double beta) {
  return TemperatureSchedule(ScheduleKind::Constant, beta);
}

TemperatureSchedule TemperatureSchedule::linear(double kappa) {
  return TemperatureSchedule(ScheduleKind::Linear, kappa);
}

TemperatureSchedule TemperatureSchedule::count_based(double kappa) {
  return TemperatureSchedule(ScheduleKind::CountBased, kappa);
}

double TemperatureSchedule::beta_for(double count, std::uint64_t iteration) const {
  double beta = parameter_;
  switch (kind_) {
    case ScheduleKind::Constant:
      break;
    case ScheduleKind::Linear:
      beta = parameter_ * static_cast<double>(iteration);
      break;
    case ScheduleKind::CountBased:
      beta = parameter_ * count;
      break;
  }
  return std::max(beta, maxent::kMinBeta);
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Constant:
      return "constant";
    case ScheduleKind::Linear:
      return "linear";
    case ScheduleKind::CountBased:
      return "count_based";
  }
  return "unknown";
}

}  // namespace cbsql::counts
