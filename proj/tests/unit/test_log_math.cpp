#include <doctest.h>

#include "mmturbo/log_math.hpp"

#include <vector>

using namespace mmturbo;

TEST_CASE("log_add matches the direct sum") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(log_add(kNegInf<double>, 1.5) == 1.5);
  CHECK(log_add(kNegInf<double>, kNegInf<double>) == kNegInf<double>);
  // far apart arguments keep the larger one
  CHECK(log_add(-1000.0, 0.0) == 0.0);
}

TEST_CASE("log_sum_exp is exact and handles -inf") {
  std::vector<double> v = {std::log(1.0), std::log(2.0), std::log(7.0)};
  CHECK(log_sum_exp(std::span<const double>(v)) == doctest::Approx(std::log(10.0)));
  Eigen::VectorXd e(3);
  e << -800, -800, kNegInf<double>;
  CHECK(log_sum_exp(e) == doctest::Approx(-800 + std::log(2.0)));
  e.setConstant(kNegInf<double>);
  CHECK(log_sum_exp(e) == kNegInf<double>);
  CHECK_THROWS_AS(log_sum_exp(Eigen::VectorXd()), std::invalid_argument);
}

TEST_CASE("normalize_rows leaves empty rows alone") {
  Eigen::Matrix<double, 2, 3, Eigen::RowMajor> m;
  m << 1, 2, 3, kNegInf<double>, kNegInf<double>, kNegInf<double>;
  normalize_rows(m);
  CHECK(log_sum_exp(m.row(0)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(m(1, 0) == kNegInf<double>);
}
