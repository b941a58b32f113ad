#include "cbsql/distributional.hpp"

#include <algorithm>
#include <cmath>

#include "cbsql/errors.hpp"

namespace cbsql::dist {

AtomGrid::AtomGrid(double v_min, double v_max, int n_atoms) : v_min_(v_min), v_max_(v_max) {
  if (n_atoms < 2) throw InvalidParameter("atom grid needs at least two atoms");
  if (!std::isfinite(v_min) || !std::isfinite(v_max) || !(v_max > v_min)) {
    throw InvalidParameter("atom grid needs finite v_min < v_max");
  }
  delta_ = (v_max - v_min) / (n_atoms - 1);
  atoms_.resize(static_cast<std::size_t>(n_atoms));
  for (int j = 0; j < n_atoms; ++j) atoms_[j] = v_min + j * delta_;
  atoms_.back() = v_max;
}

void check_probs(std::span<const double> probs, const AtomGrid& grid) {
  if (probs.size() != grid.size()) throw InvalidParameter("probability vector does not match the atom grid");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidParameter("atom probabilities must be non-negative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("atom probabilities do not sum to 1");
}

CategoricalReturnDistribution::CategoricalReturnDistribution(AtomGrid grid, std::vector<std::vector<double>> probs)
    : grid_(std::move(grid)), probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidParameter("return distribution needs at least one action");
  for (const auto& p : probs_) check_probs(p, grid_);
}

double CategoricalReturnDistribution::mean(std::size_t action) const {
  return dist_mean(grid_, probs_.at(action));
}

std::vector<double> CategoricalReturnDistribution::means() const {
  std::vector<double> out(probs_.size());
  for (std::size_t a = 0; a < probs_.size(); ++a) out[a] = mean(a);
  return out;
}

double dist_mean(const AtomGrid& grid, std::span<const double> probs) {
  check_probs(probs, grid);
  double m = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) m += grid[j] * probs[j];
  return m;
}

maxent::PolicyDistribution soft_policy_from_dist(const CategoricalReturnDistribution& dists, double beta) {
  if (!(beta > 0.0)) throw InvalidParameter("soft policy requires beta > 0");
  const auto means = dists.means();
  return maxent::softmax_policy(means, beta);
}

double kl_from_uniform(const maxent::PolicyDistribution& pi) {
  const double n = static_cast<double>(pi.action_count());
  double kl = 0.0;
  for (double p : pi.probs()) {
    if (p > 0.0) kl += p * std::log(n * p);
  }
  return std::max(kl, 0.0);
}

std::vector<double> project_to_support(std::span<const double> values, std::span<const double> masses,
                                       const AtomGrid& grid) {
  if (values.size() != masses.size()) throw InvalidParameter("values and masses differ in length");
  if (values.empty()) throw InvalidParameter("nothing to project");
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidParameter("masses must be non-negative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("masses do not sum to 1");

  const std::size_t last = grid.size() - 1;
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw InvalidParameter("projected values must be finite");
    const double v = std::clamp(values[i], grid.v_min(), grid.v_max());
    const double b = std::clamp((v - grid.v_min()) / grid.spacing(), 0.0, static_cast<double>(last));
    const auto lower = static_cast<std::size_t>(std::floor(b));
    const auto upper = static_cast<std::size_t>(std::ceil(b));
    if (lower == upper) {
      out[lower] += masses[i];
    } else {
      out[lower] += masses[i] * (static_cast<double>(upper) - b);
      out[upper] += masses[i] * (b - static_cast<double>(lower));
    }
  }
  return out;
}

std::vector<double> distributional_soft_target(double reward, double gamma, const CategoricalReturnDistribution& dists,
                                               double beta) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidParameter("gamma must lie in [0,1)");
  const auto pi = soft_policy_from_dist(dists, beta);
  const double shift = kl_from_uniform(pi) / beta;

  const AtomGrid& grid = dists.grid();
  std::vector<double> mixture(grid.size(), 0.0);
  for (std::size_t a = 0; a < dists.action_count(); ++a) {
    const auto p = dists.probs(a);
    for (std::size_t j = 0; j < grid.size(); ++j) mixture[j] += pi[a] * p[j];
  }
  // Renormalize the mixture against accumulated rounding.
  double total = 0.0;
  for (double m : mixture) total += m;
  for (double& m : mixture) m /= total;

  std::vector<double> shifted(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) shifted[j] = reward + gamma * (grid[j] - shift);
  return project_to_support(shifted, mixture, grid);
}

}  // namespace cbsql::dist
