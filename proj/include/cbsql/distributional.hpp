#pragma once

// Categorical return distributions with soft (entropy-regularized) targets.
// The greedy next action of C51 is replaced by a Boltzmann policy over the
// per-action means, and the target support is shifted by the policy's KL
// divergence from uniform.

#include <span>
#include <vector>

#include "cbsql/maxent.hpp"

namespace cbsql::dist {

// N evenly spaced atoms over [v_min, v_max].
class AtomGrid {
 public:
  AtomGrid(double v_min, double v_max, int n_atoms);

  // 51 atoms over [-10, 10].
  static AtomGrid standard() { return AtomGrid(-10.0, 10.0, 51); }

  double v_min() const noexcept { return v_min_; }
  double v_max() const noexcept { return v_max_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double spacing() const noexcept { return delta_; }
  std::span<const double> atoms() const noexcept { return atoms_; }
  double operator[](std::size_t j) const { return atoms_[j]; }

  bool operator==(const AtomGrid& other) const {
    return v_min_ == other.v_min_ && v_max_ == other.v_max_ && atoms_.size() == other.atoms_.size();
  }

 private:
  double v_min_;
  double v_max_;
  double delta_;
  std::vector<double> atoms_;
};

// Per-action categorical distributions over a shared grid.
class CategoricalReturnDistribution {
 public:
  CategoricalReturnDistribution(AtomGrid grid, std::vector<std::vector<double>> probs);

  const AtomGrid& grid() const noexcept { return grid_; }
  std::size_t action_count() const noexcept { return probs_.size(); }
  std::span<const double> probs(std::size_t action) const { return probs_.at(action); }
  double mean(std::size_t action) const;
  std::vector<double> means() const;

 private:
  AtomGrid grid_;
  std::vector<std::vector<double>> probs_;
};

// Throws InvalidParameter unless probs has one non-negative entry per atom
// summing to 1 within 1e-9.
void check_probs(std::span<const double> probs, const AtomGrid& grid);

double dist_mean(const AtomGrid& grid, std::span<const double> probs);

maxent::PolicyDistribution soft_policy_from_dist(const CategoricalReturnDistribution& dists, double beta);

// KL(pi || uniform) = log|A| - H[pi], computed as sum_a pi_a log(|A| pi_a)
// so that an exactly uniform pi gives exactly zero.
double kl_from_uniform(const maxent::PolicyDistribution& pi);

// Categorical projection: each value is clamped to [v_min, v_max] and its
// mass split linearly between the two neighbouring atoms.
std::vector<double> project_to_support(std::span<const double> values, std::span<const double> masses,
                                       const AtomGrid& grid);

// Soft categorical target for one transition:
//   pi   = softmax_beta(z . p(s', a'))
//   D    = KL(pi || uniform)
//   mass = sum_a' pi(a') p(s', a')
//   projected onto the grid at values r + gamma (z - D / beta).
std::vector<double> distributional_soft_target(double reward, double gamma, const CategoricalReturnDistribution& dists,
                                               double beta);

}  // namespace cbsql::dist
