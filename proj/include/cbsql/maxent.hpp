#pragma once

// Soft operators shared by every agent: mellowmax, Boltzmann policies,
// entropy and soft backup targets. All functions are pure.

#include <span>
#include <vector>

namespace cbsql::maxent {

// Smallest inverse temperature the soft operators will evaluate. A count of
// zero gives beta = 0, whose mellowmax limit is the mean; the clamp
// approximates that limit without dividing by zero.
inline constexpr double kMinBeta = 1e-8;

enum class OperatorMode {
  // (1/beta) log( (1/|A|) sum_a exp(beta q_a) )
  MellowmaxMean,
  // (1/beta) log( sum_a exp(beta q_a) ); exceeds MellowmaxMean by log|A|/beta
  LogPartition,
};

// A probability vector over actions. Construction validates that every entry
// lies in [0,1] and that the entries sum to 1 within 1e-9.
class PolicyDistribution {
 public:
  explicit PolicyDistribution(std::vector<double> probs);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t action_count() const noexcept { return probs_.size(); }
  double operator[](std::size_t a) const { return probs_[a]; }

 private:
  std::vector<double> probs_;
};

// Throws InvalidParameter unless q is non-empty and every entry is finite.
void check_action_values(std::span<const double> q);

double mellowmax(std::span<const double> q, double beta,
                 OperatorMode mode = OperatorMode::MellowmaxMean);

// pi(a) proportional to exp(beta q_a), evaluated after subtracting max(q).
// beta = 0 gives the uniform policy.
PolicyDistribution softmax_policy(std::span<const double> q, double beta);

// Natural-log Shannon entropy with 0 log 0 = 0.
double policy_entropy(const PolicyDistribution& pi);

// r + gamma * mellowmax(q_next). Terminal masking is the caller's job: pass
// gamma = 0 for a transition that ends the episode.
double soft_backup_target(double reward, double gamma, std::span<const double> q_next,
                          double beta, OperatorMode mode = OperatorMode::MellowmaxMean);

// n-step truncated soft return:
//   sum_{k<n} gamma^k r_k + (1/beta) sum_{k=1}^{n-1} gamma^k H_k
// entropies[k-1] is the policy entropy at s_{t+k}.
double nstep_soft_return(std::span<const double> rewards, std::span<const double> entropies,
                         double gamma, double beta);

}  // namespace cbsql::maxent
