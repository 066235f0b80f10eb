#include <doctest.h>

#include "mmturbo/markov_middleton.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace mmturbo;

namespace {

MarkovMiddletonParams params(int w, double a, double lambda, double r, double var = 1.0) {
  return {w, a, lambda, r, var};
}

double mean_run_length(const std::vector<int>& states) {
  std::size_t runs = 1;
  for (std::size_t t = 1; t < states.size(); ++t) runs += states[t] != states[t - 1];
  return static_cast<double>(states.size()) / static_cast<double>(runs);
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(params(4, 0.3, 10, 0.9).validate());
  CHECK_THROWS_AS(params(0, 0.3, 10, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, 0, 10, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, 0.3, -1, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, 0.3, 10, 1.0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, 0.3, 10, -0.1).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, 0.3, 10, 0, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(params(4, std::nan(""), 10, 0).validate(), std::invalid_argument);
}

TEST_CASE("truncated priors") {
  CHECK(truncated_priors(params(1, 0.7, 10, 0))(0) == 1.0);
  const auto p2 = truncated_priors(params(2, 0.3, 10, 0));
  CHECK(p2(0) == doctest::Approx(1 / 1.3).epsilon(1e-14));
  CHECK(p2(1) == doctest::Approx(0.3 / 1.3).epsilon(1e-14));

  // golden values from a separate evaluation of the Poisson terms
  const double golden[] = {0.9048408988086262, 0.09048408988086262, 0.0045242044940431315, 0.0001508068164681044};
  const auto p4 = truncated_priors(params(4, 0.1, 10, 0));
  for (int j = 0; j < 4; ++j) CHECK(p4(j) == doctest::Approx(golden[j]).epsilon(1e-13));
  CHECK(std::abs(p4.sum() - 1.0) < 1e-12);

  // large W does not overflow
  const auto big = truncated_priors(params(200, 50, 10, 0));
  CHECK(big.allFinite());
  CHECK(std::abs(big.sum() - 1.0) < 1e-12);
}

TEST_CASE("state variances") {
  const auto v = state_variances(params(4, 0.1, 10, 0, 1));
  CHECK(v(0) == 1.0);
  CHECK(v(1) == doctest::Approx(101));
  CHECK(state_variances(params(4, 0.3, 50, 0, 1))(3) == doctest::Approx(501));
  CHECK(state_variances(params(4, 0.3, 50, 0, 0.25))(0) == 0.25);
  for (int j = 1; j < 4; ++j) CHECK(v(j) > v(j - 1));
}

TEST_CASE("transition matrix") {
  const auto memoryless = transition_matrix(params(4, 0.3, 10, 0));
  const auto p = truncated_priors(params(4, 0.3, 10, 0));
  for (int i = 0; i < 4; ++i) CHECK((memoryless.row(i).transpose() - p).cwiseAbs().maxCoeff() < 1e-15);

  // W = 2 with p' = [0.8, 0.2] needs A = 0.25
  const auto two = transition_matrix(params(2, 0.25, 10, 0.9));
  CHECK(two(0, 0) == doctest::Approx(0.98));
  CHECK(two(0, 1) == doctest::Approx(0.02));
  CHECK(two(1, 0) == doctest::Approx(0.08));
  CHECK(two(1, 1) == doctest::Approx(0.92));

  for (double r : {0.0, 0.5, 0.9, 0.999}) {
    const auto prm = params(5, 0.4, 10, r);
    const auto trans = transition_matrix(prm);
    const auto prior = truncated_priors(prm);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(trans.row(i).sum() - 1.0) < 1e-12);
    Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(5, 0.2);
    for (int k = 0; k < 100000 && (pi * trans - pi).cwiseAbs().maxCoeff() > 1e-15; ++k) pi = pi * trans;
    CHECK((pi.transpose() - prior).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("log likelihood") {
  CHECK(log_likelihood({0.3, -0.2}, {0.3, -0.2}, 2.0) == doctest::Approx(-std::log(std::numbers::pi * 2.0)));
  CHECK(log_likelihood({1, 0}, {0, 0}, 1.0) == doctest::Approx(-1 - std::log(std::numbers::pi)));
  const std::complex<double> y{0.4, 1.3}, x{0, 1};
  const auto density = [&](double v) { return std::exp(-std::norm(y - x) / v) / (std::numbers::pi * v); };
  CHECK(log_likelihood(y, x, 1.0) - log_likelihood(y, x, 34.0) ==
        doctest::Approx(std::log(density(1.0) / density(34.0))));
}

TEST_CASE("average powers") {
  const auto w1 = average_powers(params(1, 0.3, 10, 0, 0.7));
  CHECK(w1.background == doctest::Approx(0.7));
  CHECK(w1.impulsive == 0.0);
  const auto w2 = average_powers(params(2, 0.3, 10, 0, 1));
  CHECK(w2.background == doctest::Approx(1 / 1.3));
  CHECK(w2.impulsive == doctest::Approx(0.3 / 1.3 * (1 + 10 / 0.3)));
}

TEST_CASE("sampler is deterministic and seeds decorrelate") {
  const auto prm = params(4, 0.3, 10, 0.5);
  const auto a = sample_noise(prm, 1000, 42);
  const auto b = sample_noise(prm, 1000, 42);
  CHECK(a.states == b.states);
  CHECK(a.samples == b.samples);

  const auto x = sample_noise(prm, 100000, 1);
  const auto y = sample_noise(prm, 100000, 2);
  const std::complex<double> cross = x.samples.dot(y.samples);
  const double rho = std::abs(cross) / std::sqrt(x.samples.squaredNorm() * y.samples.squaredNorm());
  CHECK(rho < 0.01);
}

TEST_CASE("W = 1 sampler is plain complex AWGN") {
  const std::size_t n = 100000;
  const auto noise = sample_noise(params(1, 0.3, 10, 0, 0.5), n, 9);
  const double power = noise.samples.squaredNorm() / n;
  // |n|^2 is exponential with mean 0.5, so its sample mean has standard error 0.5 / sqrt(n)
  CHECK(std::abs(power - 0.5) < 3 * 0.5 / std::sqrt(double(n)));
  const double re = noise.samples.real().squaredNorm() / n;
  CHECK(std::abs(re - 0.25) < 0.01);
}

TEST_CASE("sampler statistics at T = 1e6") {
  const auto prm = params(4, 0.3, 10, 0, 1);
  const std::size_t n = 1000000;
  const auto noise = sample_noise(prm, n, 2024);
  const auto prior = truncated_priors(prm);
  const auto var = state_variances(prm);
  std::vector<double> count(4, 0), power(4, 0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto w = static_cast<std::size_t>(noise.states[t]);
    count[w] += 1;
    power[w] += std::norm(noise.samples(static_cast<Eigen::Index>(t)));
  }
  for (int j = 0; j < 4; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double freq = count[k] / n;
    CHECK(std::abs(freq - prior(j)) < 3 * std::sqrt(prior(j) * (1 - prior(j)) / n));
    // 1% of the state variance, widened to three standard errors for rarely visited states
    const double tol = std::max(0.01, 3 / std::sqrt(count[k]));
    CHECK(std::abs(power[k] / count[k] / var(j) - 1) < tol);
  }

  // two-sample chi-square against a direct categorical sampler, 3 degrees of freedom, p = 0.001
  std::mt19937_64 rng(77);
  std::discrete_distribution<int> categorical(prior.data(), prior.data() + prior.size());
  std::vector<double> direct(4, 0);
  for (std::size_t t = 0; t < n; ++t) direct[static_cast<std::size_t>(categorical(rng))] += 1;
  double chi2 = 0;
  for (std::size_t j = 0; j < 4; ++j) chi2 += (count[j] - direct[j]) * (count[j] - direct[j]) / (count[j] + direct[j]);
  CHECK(chi2 < 16.266);
}

TEST_CASE("correlated sampler holds states longer") {
  const auto memoryless = sample_noise(params(4, 0.3, 10, 0), 200000, 5);
  const auto sticky = sample_noise(params(4, 0.3, 10, 0.999), 200000, 5);
  CHECK(mean_run_length(sticky.states) > 10 * mean_run_length(memoryless.states));
  CHECK_THROWS_AS(sample_noise(params(4, 0.3, 10, 0), 0, 1), std::invalid_argument);
}
