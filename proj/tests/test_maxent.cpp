#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cbsql/errors.hpp"
#include "cbsql/maxent.hpp"
#include "oracles.hpp"

using namespace cbsql;
using namespace cbsql::maxent;

namespace {

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> q(n);
  for (auto& v : q) v = u(rng);
  return q;
}

}  // namespace

TEST_CASE("mellowmax examples") {
  const std::vector<double> q{1.0, 0.0};
  // ln((e + 1) / 2) and ln(e + 1)
  CHECK(std::abs(mellowmax(q, 1.0, OperatorMode::MellowmaxMean) - 0.620115) < 1e-6);
  CHECK(std::abs(mellowmax(q, 1.0, OperatorMode::LogPartition) - 1.313262) < 1e-6);
  CHECK(std::abs(mellowmax(q, 1e6, OperatorMode::MellowmaxMean) - 1.0) < 1e-5);
  CHECK(std::abs(mellowmax(q, 1e6, OperatorMode::LogPartition) - 1.0) < 1e-5);

  for (double beta : {1e-6, 0.3, 7.0, 1e4}) {
    const std::vector<double> flat{2.5, 2.5, 2.5};
    CHECK(mellowmax(flat, beta, OperatorMode::MellowmaxMean) == doctest::Approx(2.5).epsilon(1e-12));
  }
}

TEST_CASE("mellowmax matches a long-double direct evaluation") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto q = random_values(rng, 1 + i % 6, -5.0, 5.0);
    const double beta = std::exp(std::uniform_real_distribution<double>(-3.0, 2.0)(rng));
    for (bool mean : {true, false}) {
      const auto mode = mean ? OperatorMode::MellowmaxMean : OperatorMode::LogPartition;
      CHECK(std::abs(mellowmax(q, beta, mode) - static_cast<double>(oracle::mellowmax_direct(q, beta, mean))) <
            1e-10);
    }
  }
}

TEST_CASE("the two operator modes differ by log|A| / beta") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_values(rng, 1 + i % 5, -10.0, 10.0);
    const double beta = 0.1 + i;
    const double gap = mellowmax(q, beta, OperatorMode::LogPartition) - mellowmax(q, beta, OperatorMode::MellowmaxMean);
    CHECK(gap == doctest::Approx(std::log(static_cast<double>(q.size())) / beta).epsilon(1e-9));
  }
}

TEST_CASE("mellowmax rejects bad input") {
  const std::vector<double> q{1.0, 0.0};
  CHECK_THROWS_AS(mellowmax(q, 0.0), InvalidParameter);
  CHECK_THROWS_AS(mellowmax(q, -1.0), InvalidParameter);
  CHECK_THROWS_AS(mellowmax(std::vector<double>{}, 1.0), InvalidParameter);
  CHECK_THROWS_AS(mellowmax(std::vector<double>{1.0, NAN}, 1.0), InvalidParameter);
}

TEST_CASE("tiny beta is clamped and approaches the mean") {
  const std::vector<double> q{3.0, -1.0, 4.0};
  const double mean = 2.0;
  CHECK(mellowmax(q, 1e-12) == mellowmax(q, kMinBeta));
  CHECK(std::abs(mellowmax(q, 1e-12) - mean) < 1e-6);
}

TEST_CASE("mellowmax does not overflow") {
  const std::vector<double> big{1000.0, 999.0};
  const double v = mellowmax(big, 1.0, OperatorMode::MellowmaxMean);
  REQUIRE(std::isfinite(v));
  // 1000 + ln((1 + e^-1) / 2) by hand
  CHECK(std::abs(v - (1000.0 + std::log((1.0 + std::exp(-1.0)) / 2.0))) < 1e-6);
  CHECK(std::isfinite(mellowmax(big, 1e9, OperatorMode::LogPartition)));
  CHECK(std::isfinite(mellowmax(std::vector<double>{-1000.0, 1000.0}, 1e9)));
}

TEST_CASE("operator properties on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> log_beta(-4.0, 6.0);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + i % 7;
    const auto q1 = random_values(rng, n, -10.0, 10.0);
    const auto q2 = random_values(rng, n, -10.0, 10.0);
    double b1 = std::exp(log_beta(rng));
    double b2 = std::exp(log_beta(rng));
    if (b1 > b2) std::swap(b1, b2);

    // The mean form is a generalized mean and rises with beta; the
    // log-partition form falls from +inf toward max(q).
    CHECK(mellowmax(q1, b1, OperatorMode::MellowmaxMean) <= mellowmax(q1, b2, OperatorMode::MellowmaxMean) + 1e-12);
    CHECK(mellowmax(q1, b1, OperatorMode::LogPartition) >= mellowmax(q1, b2, OperatorMode::LogPartition) - 1e-12);

    double sup = 0.0;
    for (std::size_t a = 0; a < n; ++a) sup = std::max(sup, std::abs(q1[a] - q2[a]));
    CHECK(std::abs(mellowmax(q1, b1) - mellowmax(q2, b1)) <= sup + 1e-12);

    const double top = *std::max_element(q1.begin(), q1.end());
    const double mm = mellowmax(q1, b1);
    CHECK(mm <= top + 1e-12);
    CHECK(mm >= top - std::log(static_cast<double>(n)) / b1 - 1e-12);
  }
}

TEST_CASE("softmax policy") {
  const auto pi = softmax_policy(std::vector<double>{1.0, 0.0}, 1.0);
  CHECK(std::abs(pi[0] - 0.731059) < 1e-6);
  CHECK(std::abs(pi[1] - 0.268941) < 1e-6);

  const auto flat = softmax_policy(std::vector<double>{5.0, 5.0, 5.0}, 3.0);
  for (double p : flat.probs()) CHECK(p == doctest::Approx(1.0 / 3.0));

  const auto cold = softmax_policy(std::vector<double>{1.0, 0.0}, 0.0);
  CHECK(cold[0] == 0.5);
  CHECK(cold[1] == 0.5);

  CHECK_THROWS_AS(softmax_policy(std::vector<double>{1.0}, -0.5), InvalidParameter);
}

TEST_CASE("softmax policy is shift invariant") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto q = random_values(rng, 2 + i % 4, -10.0, 10.0);
    const double c = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    auto shifted = q;
    for (auto& v : shifted) v += c;
    const double beta = 0.5 + i % 10;
    const auto a = softmax_policy(q, beta);
    const auto b = softmax_policy(shifted, beta);
    for (std::size_t k = 0; k < q.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
  }
}

TEST_CASE("policy entropy") {
  CHECK(policy_entropy(PolicyDistribution({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(policy_entropy(PolicyDistribution({1.0, 0.0, 0.0})) == 0.0);
  CHECK(std::abs(policy_entropy(PolicyDistribution({0.731059, 0.268941})) - 0.582203) < 1e-5);

  for (std::size_t n = 1; n <= 12; ++n) {
    const auto pi = softmax_policy(std::vector<double>(n, 0.7), 0.0);
    CHECK(std::abs(policy_entropy(pi) - std::log(static_cast<double>(n))) < 1e-12);
  }
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_values(rng, 1 + i % 6, -3.0, 3.0);
    const double h = policy_entropy(softmax_policy(q, 1.3));
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(q.size())) + 1e-12);
  }
}

TEST_CASE("policy distribution validates its entries") {
  CHECK_THROWS_AS(PolicyDistribution({0.5, 0.6}), InvalidParameter);
  CHECK_THROWS_AS(PolicyDistribution({1.5, -0.5}), InvalidParameter);
  CHECK_THROWS_AS(PolicyDistribution({}), InvalidParameter);
}

TEST_CASE("soft backup target") {
  const std::vector<double> q{1.0, 0.0};
  CHECK(std::abs(soft_backup_target(1.0, 0.99, q, 1.0) - 1.613913) < 1e-5);
  CHECK(soft_backup_target(0.0, 0.0, q, 3.0) == 0.0);
  const double c = 4.2;
  CHECK(soft_backup_target(-0.1, 0.99, std::vector<double>{c, c}, 10.0) == doctest::Approx(-0.1 + 0.99 * c));
  CHECK_THROWS_AS(soft_backup_target(0.0, 1.0, q, 1.0), InvalidParameter);
  CHECK_THROWS_AS(soft_backup_target(0.0, 0.5, q, 0.0), InvalidParameter);
  CHECK_THROWS_AS(soft_backup_target(0.0, 0.0, std::vector<double>{}, 1.0), InvalidParameter);
}

TEST_CASE("n-step soft return") {
  CHECK(nstep_soft_return(std::vector<double>{3.7}, std::vector<double>{}, 0.9, 2.0) == 3.7);
  CHECK(std::abs(nstep_soft_return(std::vector<double>{1.0, 2.0}, std::vector<double>{0.693147}, 0.5, 2.0) -
                 2.173287) < 1e-5);

  const std::vector<double> rewards{0.5, -1.0, 2.0, 0.25};
  const std::vector<double> entropies{0.6, 0.1, 1.0};
  const double plain = 0.5 - 0.9 + 0.81 * 2.0 + 0.729 * 0.25;
  CHECK(std::abs(nstep_soft_return(rewards, entropies, 0.9, 1e12) - plain) < 1e-9);

  CHECK_THROWS_AS(nstep_soft_return(rewards, std::vector<double>{0.1}, 0.9, 1.0), InvalidParameter);
  CHECK_THROWS_AS(nstep_soft_return(std::vector<double>{}, std::vector<double>{}, 0.9, 1.0), InvalidParameter);
}
