#include "cbsql/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbsql/errors.hpp"

namespace cbsql::maxent {

PolicyDistribution::PolicyDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidParameter("policy distribution must have at least one action");
  double total = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter("policy probability outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("policy probabilities do not sum to 1");
}

void check_action_values(std::span<const double> q) {
  if (q.empty()) throw InvalidParameter("action values must not be empty");
  for (double v : q) {
    if (!std::isfinite(v)) throw InvalidParameter("action values must be finite");
  }
}

double mellowmax(std::span<const double> q, double beta, OperatorMode mode) {
  check_action_values(q);
  if (!(beta > 0.0)) throw InvalidParameter("mellowmax requires beta > 0");
  beta = std::max(beta, kMinBeta);

  const double top = *std::max_element(q.begin(), q.end());
  // mean of exp(beta (q - max)) - 1, kept in expm1/log1p form so that tiny
  // beta does not lose the first-order term to cancellation.
  double excess = 0.0;
  for (double v : q) excess += std::expm1(beta * (v - top));
  excess /= static_cast<double>(q.size());

  double value = top + std::log1p(excess) / beta;
  if (mode == OperatorMode::LogPartition) {
    value += std::log(static_cast<double>(q.size())) / beta;
  }
  return value;
}

PolicyDistribution softmax_policy(std::span<const double> q, double beta) {
  check_action_values(q);
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InvalidParameter("softmax policy requires a finite beta >= 0");
  }
  const double top = *std::max_element(q.begin(), q.end());
  std::vector<double> probs(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) probs[a] = std::exp(beta * (q[a] - top));
  const double z = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= z;
  return PolicyDistribution(std::move(probs));
}

double policy_entropy(const PolicyDistribution& pi) {
  double h = 0.0;
  for (double p : pi.probs()) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double soft_backup_target(double reward, double gamma, std::span<const double> q_next,
                          double beta, OperatorMode mode) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must lie in [0,1)");
  if (gamma == 0.0) {
    // Still validate the operands so errors do not depend on gamma.
    check_action_values(q_next);
    if (!(beta > 0.0)) throw InvalidParameter("mellowmax requires beta > 0");
    return reward;
  }
  return reward + gamma * mellowmax(q_next, beta, mode);
}

double nstep_soft_return(std::span<const double> rewards, std::span<const double> entropies,
                         double gamma, double beta) {
  if (rewards.empty()) throw InvalidParameter("n-step return needs at least one reward");
  if (entropies.size() + 1 != rewards.size()) {
    throw InvalidParameter("n-step return needs exactly n-1 entropies for n rewards");
  }
  if (!(beta > 0.0)) throw InvalidParameter("n-step soft return requires beta > 0");

  double ret = 0.0;
  double entropy_term = 0.0;
  double discount = 1.0;
  for (std::size_t k = 0; k < rewards.size(); ++k) {
    ret += discount * rewards[k];
    if (k > 0) entropy_term += discount * entropies[k - 1];
    discount *= gamma;
  }
  return ret + entropy_term / beta;
}

}  // namespace cbsql::maxent
