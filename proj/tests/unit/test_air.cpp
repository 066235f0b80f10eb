#include <doctest.h>

#include "mmturbo/air.hpp"
#include "mmturbo/random.hpp"
#include "oracles/brute_force.hpp"

#include <numbers>

using namespace mmturbo;

namespace {

Eigen::VectorXcd random_y(int n, std::uint64_t seed, double spread = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> g(0, spread);
  Eigen::VectorXcd y(n);
  for (auto& v : y) v = {g(rng), g(rng)};
  return y;
}

}  // namespace

TEST_CASE("aux trellis structure") {
  const MarkovMiddletonParams rx{2, 0.3, 10, 0.7, 1};
  const AuxTrellis aux(rx, 4);
  CHECK(aux.num_states() == 8);
  const auto trans = aux.transition_probabilities();
  for (int i = 0; i < 8; ++i) CHECK(std::abs(trans.row(i).sum() - 1) < 1e-12);
  CHECK(std::abs(log_sum_exp(aux.initial())) < 1e-12);

  const AuxTrellis awgn(MarkovMiddletonParams{1, 0.3, 10, 0, 1}, 4);
  CHECK((awgn.transition_probabilities().array() - 0.25).abs().maxCoeff() < 1e-15);

  const AuxTrellis degenerate(rx, 1);
  CHECK((degenerate.transition_probabilities() - transition_matrix(rx)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("log p(y) closed form and enumeration") {
  const MarkovMiddletonParams awgn{1, 0.3, 10, 0, 0.8};
  const AuxTrellis aux(awgn, 2);
  Eigen::VectorXcd y(1);
  y << std::complex<double>(0.3, -0.4);
  const double want = std::log(0.5 * (std::exp(oracle::gauss(y(0), 0, 2, 0.8)) + std::exp(oracle::gauss(y(0), 1, 2, 0.8))));
  CHECK(log_p_y(y, aux) == doctest::Approx(want).epsilon(1e-12));

  const MarkovMiddletonParams rx{2, 0.3, 10, 0.6, 0.5};
  const AuxTrellis aux2(rx, 2);
  const auto y2 = random_y(2, 3);
  const auto var = state_variances(rx);
  double total = kNegInf<double>;
  oracle::for_each_sequence(2, 2, [&](const std::vector<int>& x) {
    oracle::for_each_sequence(2, 2, [&](const std::vector<int>& w) {
      double acc = 2 * std::log(0.5) + oracle::noise_path(rx, w);
      for (int t = 0; t < 2; ++t) acc += oracle::gauss(y2(t), x[t], 2, var(w[t]));
      total = log_add(total, acc);
    });
  });
  CHECK(log_p_y(y2, aux2) == doctest::Approx(total).epsilon(1e-12));

  const SymbolFrame x{2, {1, 0}};
  double given = kNegInf<double>;
  oracle::for_each_sequence(2, 2, [&](const std::vector<int>& w) {
    double acc = oracle::noise_path(rx, w);
    for (int t = 0; t < 2; ++t) acc += oracle::gauss(y2(t), x.phases[t], 2, var(w[t]));
    given = log_add(given, acc);
  });
  CHECK(log_p_y_given_x(y2, x, aux2) == doctest::Approx(given).epsilon(1e-12));
}

TEST_CASE("AWGN factorization of log p(y | x)") {
  const MarkovMiddletonParams awgn{1, 0.3, 10, 0, 0.4};
  const AuxTrellis aux(awgn, 4);
  const auto y = random_y(20, 8);
  SymbolFrame x{4, std::vector<int>(20)};
  for (int t = 0; t < 20; ++t) x.phases[t] = (t * 7) % 4;
  double want = 0;
  for (int t = 0; t < 20; ++t) want += oracle::gauss(y(t), x.phases[t], 4, 0.4);
  CHECK(log_p_y_given_x(y, x, aux) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("log p(y) is invariant to a common constellation rotation") {
  const MarkovMiddletonParams rx{3, 0.3, 10, 0.5, 0.5};
  const AuxTrellis aux(rx, 4);
  const auto y = random_y(12, 21);
  const Eigen::VectorXcd rotated = y * std::complex<double>(0, 1);  // quarter turn maps the QPSK set to itself
  CHECK(log_p_y(rotated, aux) == doctest::Approx(log_p_y(y, aux)).epsilon(1e-10));
}

TEST_CASE("AIR estimator") {
  AirRequest req;
  req.channel = {1, 0.3, 10, 0, 1};
  req.receiver = req.channel;
  req.snr_db = 20;
  req.seq_length = 2000;
  req.n_sequences = 4;
  const auto hi = estimate_air(req);
  CHECK(hi.air == doctest::Approx(2.0).epsilon(0.005));
  CHECK(hi.air <= 2.0 + 1e-3);
  CHECK(hi.per_sequence.size() == 4);

  req.channel = {4, 0.3, 10, 0.9, 1};
  req.receiver = req.channel;
  req.snr_db = 0;
  req.n_sequences = 6;
  const auto one = estimate_air(req);
  req.threads = 3;
  const auto many = estimate_air(req);
  CHECK(one.per_sequence == many.per_sequence);
  CHECK(one.air >= 0);
  CHECK(one.std_error > 0);
  CHECK(one.channel.background_var == doctest::Approx(1.0));

  auto bad = req;
  bad.seq_length = 0;
  CHECK_THROWS_AS(estimate_air(bad), std::invalid_argument);
  bad = req;
  bad.channel.correlation = 1.5;
  CHECK_THROWS_AS(estimate_air(bad), std::invalid_argument);
}
