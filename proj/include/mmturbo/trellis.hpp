#pragma once

// Dense log-domain forward-backward over a finite-state trellis.
//
// Time runs over steps t = 1..T. The forward lattice has T+1 rows, row 0 being the
// caller-supplied initial distribution over s_0; the backward lattice also has T+1
// rows with row T equal to the terminal vector. The step-t branch metric table holds
// log gamma_t(i, j) = log p(y_t, s_t = j | s_{t-1} = i).

#include "mmturbo/log_math.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmturbo {

template <typename Scalar>
using LogVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Row-major table: one row per time index.
template <typename Scalar>
using LogTable = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using LogSquare = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct Transition {
  int from = 0;
  int to = 0;
  int label = 0;
};

/// Connectivity of a time-invariant trellis. At most one transition joins any (from, to)
/// pair, and every (from, label) pair has a unique destination.
class TrellisSpec {
 public:
  TrellisSpec(int num_states, int input_alphabet_size, std::vector<Transition> transitions);

  int num_states() const { return num_states_; }
  int input_alphabet_size() const { return alphabet_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  /// N x N matrix of transition indices, -1 where no transition exists.
  const Eigen::MatrixXi& transition_index() const { return index_; }
  bool allowed(int from, int to) const { return index_(from, to) >= 0; }

 private:
  int num_states_;
  int alphabet_;
  std::vector<Transition> transitions_;
  Eigen::MatrixXi index_;
};

/// T tables of N x N log branch metrics; -inf marks forbidden transitions.
template <typename Scalar>
class BranchMetricTable {
 public:
  BranchMetricTable(std::size_t steps, int num_states)
      : states_(num_states),
        steps_(steps, LogSquare<Scalar>::Constant(num_states, num_states, kNegInf<Scalar>)) {}

  std::size_t steps() const { return steps_.size(); }
  int num_states() const { return states_; }

  /// Step t in 1..T.
  LogSquare<Scalar>& at(std::size_t t) { return steps_.at(t - 1); }
  const LogSquare<Scalar>& at(std::size_t t) const { return steps_.at(t - 1); }

  void validate() const {
    for (const auto& m : steps_) {
      if (m.rows() != states_ || m.cols() != states_)
        throw std::invalid_argument("branch metric step has wrong shape");
      if (m.hasNaN()) throw std::invalid_argument("branch metric contains NaN");
      if ((m.array() == std::numeric_limits<Scalar>::infinity()).any())
        throw std::invalid_argument("branch metric contains +inf");
    }
  }

 private:
  int states_;
  std::vector<LogSquare<Scalar>> steps_;
};

/// Joint log-probabilities log p(s_t = j, s_{t-1} = i, y_1^T) for every step.
template <typename Scalar>
struct PosteriorJoint {
  std::vector<LogSquare<Scalar>> values;  // values[t - 1](i, j)

  std::size_t steps() const { return values.size(); }
  /// log-sum-exp over (i, j) at step t; identical for every t up to rounding.
  Scalar normalizer(std::size_t t) const { return log_sum_exp(values.at(t - 1)); }
};

namespace detail {

template <typename Scalar>
void check_dims(const TrellisSpec& trellis, const BranchMetricTable<Scalar>& metrics,
                Eigen::Index boundary_size, const char* what) {
  if (metrics.num_states() != trellis.num_states())
    throw std::invalid_argument("branch metric table does not match trellis state count");
  if (boundary_size != trellis.num_states())
    throw std::invalid_argument(std::string(what) + " vector has wrong length");
  if (metrics.steps() == 0) throw std::invalid_argument("branch metric table is empty");
  metrics.validate();
}

}  // namespace detail

/// alpha(t, j) = log p(s_t = j, y_1^t). Row 0 is `init`.
template <typename Scalar>
LogTable<Scalar> forward(const TrellisSpec& trellis, const BranchMetricTable<Scalar>& metrics,
                         const LogVector<Scalar>& init) {
  detail::check_dims(trellis, metrics, init.size(), "initial");
  const int n = trellis.num_states();
  const auto steps = static_cast<Eigen::Index>(metrics.steps());
  LogTable<Scalar> alpha(steps + 1, n);
  alpha.row(0) = init.transpose();
  LogVector<Scalar> terms(n);
  for (Eigen::Index t = 1; t <= steps; ++t) {
    const auto& gamma = metrics.at(static_cast<std::size_t>(t));
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i)
        terms(i) = trellis.allowed(i, j) ? alpha(t - 1, i) + gamma(i, j) : kNegInf<Scalar>;
      alpha(t, j) = log_sum_exp(terms);
    }
  }
  return alpha;
}

/// beta(t, i) = log p(y_{t+1}^T | s_t = i). Row T is `term`.
template <typename Scalar>
LogTable<Scalar> backward(const TrellisSpec& trellis, const BranchMetricTable<Scalar>& metrics,
                          const LogVector<Scalar>& term) {
  detail::check_dims(trellis, metrics, term.size(), "terminal");
  const int n = trellis.num_states();
  const auto steps = static_cast<Eigen::Index>(metrics.steps());
  LogTable<Scalar> beta(steps + 1, n);
  beta.row(steps) = term.transpose();
  LogVector<Scalar> terms(n);
  for (Eigen::Index t = steps; t >= 1; --t) {
    const auto& gamma = metrics.at(static_cast<std::size_t>(t));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        terms(j) = trellis.allowed(i, j) ? gamma(i, j) + beta(t, j) : kNegInf<Scalar>;
      beta(t - 1, i) = log_sum_exp(terms);
    }
  }
  return beta;
}

template <typename Scalar>
PosteriorJoint<Scalar> posterior_joint(const TrellisSpec& trellis, const LogTable<Scalar>& alpha,
                                       const BranchMetricTable<Scalar>& metrics,
                                       const LogTable<Scalar>& beta) {
  const int n = trellis.num_states();
  const auto steps = static_cast<Eigen::Index>(metrics.steps());
  if (alpha.rows() != steps + 1 || beta.rows() != steps + 1 || alpha.cols() != n ||
      beta.cols() != n || metrics.num_states() != n)
    throw std::invalid_argument("forward/backward lattices do not match the metric table");
  PosteriorJoint<Scalar> joint;
  joint.values.reserve(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 1; t <= steps; ++t) {
    const auto& gamma = metrics.at(static_cast<std::size_t>(t));
    LogSquare<Scalar> step(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        step(i, j) = trellis.allowed(i, j) && alpha(t - 1, i) != kNegInf<Scalar> &&
                             beta(t, j) != kNegInf<Scalar>
                         ? alpha(t - 1, i) + gamma(i, j) + beta(t, j)
                         : kNegInf<Scalar>;
    joint.values.push_back(std::move(step));
  }
  return joint;
}

/// out(t - 1, m) = log sum over transitions carrying output label m of the joint at step t.
/// `label_of` is indexed like trellis.transitions().
template <typename Scalar>
LogTable<Scalar> marginalize_by_label(const PosteriorJoint<Scalar>& joint,
                                      const TrellisSpec& trellis, const std::vector<int>& label_of,
                                      int num_labels) {
  if (label_of.size() != trellis.transitions().size())
    throw std::invalid_argument("unlabeled allowed transition");
  for (int label : label_of)
    if (label < 0 || label >= num_labels) throw std::invalid_argument("unlabeled allowed transition");
  const auto steps = static_cast<Eigen::Index>(joint.steps());
  LogTable<Scalar> out = LogTable<Scalar>::Constant(steps, num_labels, kNegInf<Scalar>);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto& step = joint.values[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < label_of.size(); ++k) {
      const auto& tr = trellis.transitions()[k];
      out(t, label_of[k]) = log_add(out(t, label_of[k]), step(tr.from, tr.to));
    }
  }
  return out;
}

}  // namespace mmturbo
