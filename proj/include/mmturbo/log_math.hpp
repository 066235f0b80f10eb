#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace mmturbo {

template <typename Scalar>
inline constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

inline constexpr double kLn2 = 0.693147180559945309417232121458176568;

/// Exact log(exp(a) + exp(b)).
template <typename Scalar>
inline Scalar log_add(Scalar a, Scalar b) {
  if (a < b) std::swap(a, b);
  if (a == kNegInf<Scalar>) return a;
  return a + std::log1p(std::exp(b - a));
}

/// log of the sum of exponentials, max-shifted. Returns -inf iff every input is -inf.
template <typename Scalar>
Scalar log_sum_exp(std::span<const Scalar> values) {
  if (values.empty()) throw std::invalid_argument("empty reduction");
  const Scalar peak = *std::max_element(values.begin(), values.end());
  if (peak == kNegInf<Scalar>) return peak;
  Scalar acc = 0;
  for (Scalar v : values) acc += std::exp(v - peak);
  return peak + std::log(acc);
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  if (values.size() == 0) throw std::invalid_argument("empty reduction");
  const Scalar peak = values.maxCoeff();
  if (peak == kNegInf<Scalar>) return peak;
  return peak + std::log((values.derived().array() - peak).exp().sum());
}

/// Subtracts the log-sum-exp of every row so each row is a normalized log distribution.
/// Rows that are entirely -inf are left untouched.
template <typename Derived>
void normalize_rows(Eigen::DenseBase<Derived>& table) {
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    const auto norm = log_sum_exp(table.row(r));
    if (norm != kNegInf<typename Derived::Scalar>) table.row(r).array() -= norm;
  }
}

}  // namespace mmturbo
