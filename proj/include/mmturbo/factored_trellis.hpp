#pragma once

// Forward-backward over trellises whose branch metrics factor as
//
//   log gamma_t(i, j) = node(t, j) + edge(i, j) + cls(t, class(i, j))
//
// where node is a per-destination observation term, edge a time-invariant transition
// weight and cls a per-step term attached to a branch class (typically the input symbol
// or bit driving the transition). Every receiver in the library has this shape. The
// recursions stay exact: each log-sum-exp is evaluated as a max-shifted sum of products,
// and any sum that would lose precision to underflow is recomputed term by term.

#include "mmturbo/log_math.hpp"
#include "mmturbo/trellis.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mmturbo {

template <typename Scalar>
class FactoredTrellis {
 public:
  struct Branch {
    int from;
    int to;
    int cls;
    Scalar log_weight;
  };

  FactoredTrellis(const LogSquare<Scalar>& edge_log, const Eigen::MatrixXi& branch_class,
                  int num_classes)
      : states_(static_cast<int>(edge_log.rows())), classes_(num_classes) {
    if (edge_log.rows() != edge_log.cols() || branch_class.rows() != edge_log.rows() ||
        branch_class.cols() != edge_log.cols())
      throw std::invalid_argument("edge weights and branch classes must be square and equal-sized");
    if (states_ < 1 || classes_ < 1) throw std::invalid_argument("empty factored trellis");
    edge_max_ = kNegInf<Scalar>;
    for (int i = 0; i < states_; ++i)
      for (int j = 0; j < states_; ++j) {
        const int c = branch_class(i, j);
        const Scalar w = edge_log(i, j);
        if (c < 0 || w == kNegInf<Scalar>) continue;
        if (c >= classes_) throw std::invalid_argument("branch class out of range");
        if (std::isnan(w) || w == std::numeric_limits<Scalar>::infinity())
          throw std::invalid_argument("edge weight must be finite or -inf");
        branches_.push_back({i, j, c, w});
        edge_max_ = std::max(edge_max_, w);
      }
    if (branches_.empty()) throw std::invalid_argument("factored trellis has no branches");
    scaled_.reserve(branches_.size());
    incoming_.resize(static_cast<std::size_t>(states_));
    outgoing_.resize(static_cast<std::size_t>(states_));
    by_class_.resize(static_cast<std::size_t>(classes_));
    for (std::size_t k = 0; k < branches_.size(); ++k) {
      const auto& b = branches_[k];
      scaled_.push_back(std::exp(b.log_weight - edge_max_));
      incoming_[static_cast<std::size_t>(b.to)].push_back(k);
      outgoing_[static_cast<std::size_t>(b.from)].push_back(k);
      by_class_[static_cast<std::size_t>(b.cls)].push_back(k);
    }
  }

  int num_states() const { return states_; }
  int num_classes() const { return classes_; }
  const std::vector<Branch>& branches() const { return branches_; }

  /// Connectivity as a TrellisSpec; the input label of a branch is its destination state.
  TrellisSpec spec() const {
    std::vector<Transition> transitions;
    transitions.reserve(branches_.size());
    for (const auto& b : branches_) transitions.push_back({b.from, b.to, b.to});
    return TrellisSpec(states_, states_, std::move(transitions));
  }

  /// Branch class of every transition of spec(), in the same order.
  std::vector<int> class_labels() const {
    std::vector<int> out;
    out.reserve(branches_.size());
    for (const auto& b : branches_) out.push_back(b.cls);
    return out;
  }

  BranchMetricTable<Scalar> to_dense(const LogTable<Scalar>& node, const LogTable<Scalar>& cls) const {
    check_frame(node, cls);
    BranchMetricTable<Scalar> table(static_cast<std::size_t>(node.rows()), states_);
    for (Eigen::Index t = 0; t < node.rows(); ++t) {
      auto& step = table.at(static_cast<std::size_t>(t + 1));
      for (const auto& b : branches_) step(b.from, b.to) = node(t, b.to) + b.log_weight + cls(t, b.cls);
    }
    return table;
  }

  LogTable<Scalar> forward(const LogTable<Scalar>& node, const LogTable<Scalar>& cls,
                           const LogVector<Scalar>& init) const {
    check_frame(node, cls);
    if (init.size() != states_) throw std::invalid_argument("initial vector has wrong length");
    const Eigen::Index steps = node.rows();
    LogTable<Scalar> alpha(steps + 1, states_);
    alpha.row(0) = init.transpose();
    std::vector<Scalar> pa(static_cast<std::size_t>(states_)), pc(static_cast<std::size_t>(classes_));
    std::vector<Scalar> acc(static_cast<std::size_t>(states_));
    for (Eigen::Index t = 1; t <= steps; ++t) {
      const Scalar a_max = alpha.row(t - 1).maxCoeff();
      const Scalar c_max = scale_row(cls, t - 1, pc);
      if (a_max == kNegInf<Scalar> || c_max == kNegInf<Scalar>) {
        alpha.row(t).setConstant(kNegInf<Scalar>);
        continue;
      }
      for (int i = 0; i < states_; ++i) pa[static_cast<std::size_t>(i)] = std::exp(alpha(t - 1, i) - a_max);
      std::fill(acc.begin(), acc.end(), Scalar(0));
      for (std::size_t k = 0; k < branches_.size(); ++k) {
        const auto& b = branches_[k];
        acc[static_cast<std::size_t>(b.to)] +=
            pa[static_cast<std::size_t>(b.from)] * scaled_[k] * pc[static_cast<std::size_t>(b.cls)];
      }
      const Scalar base = a_max + edge_max_ + c_max;
      for (int j = 0; j < states_; ++j) {
        const Scalar nd = node(t - 1, j);
        const Scalar s = acc[static_cast<std::size_t>(j)];
        if (nd == kNegInf<Scalar>) {
          alpha(t, j) = kNegInf<Scalar>;
        } else if (s > tiny()) {
          alpha(t, j) = nd + base + std::log(s);
        } else {
          Scalar exact = kNegInf<Scalar>;
          for (std::size_t k : incoming_[static_cast<std::size_t>(j)]) {
            const auto& b = branches_[k];
            exact = log_add(exact, alpha(t - 1, b.from) + b.log_weight + cls(t - 1, b.cls));
          }
          alpha(t, j) = nd + exact;
        }
      }
    }
    return alpha;
  }

  LogTable<Scalar> backward(const LogTable<Scalar>& node, const LogTable<Scalar>& cls,
                            const LogVector<Scalar>& term) const {
    check_frame(node, cls);
    if (term.size() != states_) throw std::invalid_argument("terminal vector has wrong length");
    const Eigen::Index steps = node.rows();
    LogTable<Scalar> beta(steps + 1, states_);
    beta.row(steps) = term.transpose();
    std::vector<Scalar> v(static_cast<std::size_t>(states_)), pv(static_cast<std::size_t>(states_));
    std::vector<Scalar> pc(static_cast<std::size_t>(classes_)), acc(static_cast<std::size_t>(states_));
    for (Eigen::Index t = steps; t >= 1; --t) {
      const Scalar v_max = combine(node, beta, t, v);
      const Scalar c_max = scale_row(cls, t - 1, pc);
      if (v_max == kNegInf<Scalar> || c_max == kNegInf<Scalar>) {
        beta.row(t - 1).setConstant(kNegInf<Scalar>);
        continue;
      }
      for (int j = 0; j < states_; ++j)
        pv[static_cast<std::size_t>(j)] = std::exp(v[static_cast<std::size_t>(j)] - v_max);
      std::fill(acc.begin(), acc.end(), Scalar(0));
      for (std::size_t k = 0; k < branches_.size(); ++k) {
        const auto& b = branches_[k];
        acc[static_cast<std::size_t>(b.from)] +=
            pv[static_cast<std::size_t>(b.to)] * scaled_[k] * pc[static_cast<std::size_t>(b.cls)];
      }
      const Scalar base = v_max + edge_max_ + c_max;
      for (int i = 0; i < states_; ++i) {
        const Scalar s = acc[static_cast<std::size_t>(i)];
        if (s > tiny()) {
          beta(t - 1, i) = base + std::log(s);
        } else {
          Scalar exact = kNegInf<Scalar>;
          for (std::size_t k : outgoing_[static_cast<std::size_t>(i)]) {
            const auto& b = branches_[k];
            exact = log_add(exact, b.log_weight + cls(t - 1, b.cls) + v[static_cast<std::size_t>(b.to)]);
          }
          beta(t - 1, i) = exact;
        }
      }
    }
    return beta;
  }

  /// out(t - 1, c) = log sum over branches of class c of alpha(t-1, i) + gamma_t(i, j) + beta(t, j).
  LogTable<Scalar> class_posteriors(const LogTable<Scalar>& node, const LogTable<Scalar>& cls,
                                    const LogTable<Scalar>& alpha, const LogTable<Scalar>& beta) const {
    check_frame(node, cls);
    const Eigen::Index steps = node.rows();
    if (alpha.rows() != steps + 1 || beta.rows() != steps + 1 || alpha.cols() != states_ ||
        beta.cols() != states_)
      throw std::invalid_argument("forward/backward lattices do not match the frame");
    LogTable<Scalar> out(steps, classes_);
    std::vector<Scalar> v(static_cast<std::size_t>(states_)), pv(static_cast<std::size_t>(states_));
    std::vector<Scalar> pa(static_cast<std::size_t>(states_)), bucket(static_cast<std::size_t>(classes_));
    for (Eigen::Index t = 1; t <= steps; ++t) {
      const Scalar a_max = alpha.row(t - 1).maxCoeff();
      const Scalar v_max = combine(node, beta, t, v);
      if (a_max == kNegInf<Scalar> || v_max == kNegInf<Scalar>) {
        out.row(t - 1).setConstant(kNegInf<Scalar>);
        continue;
      }
      for (int i = 0; i < states_; ++i) {
        pa[static_cast<std::size_t>(i)] = std::exp(alpha(t - 1, i) - a_max);
        pv[static_cast<std::size_t>(i)] = std::exp(v[static_cast<std::size_t>(i)] - v_max);
      }
      std::fill(bucket.begin(), bucket.end(), Scalar(0));
      for (std::size_t k = 0; k < branches_.size(); ++k) {
        const auto& b = branches_[k];
        bucket[static_cast<std::size_t>(b.cls)] +=
            pa[static_cast<std::size_t>(b.from)] * scaled_[k] * pv[static_cast<std::size_t>(b.to)];
      }
      const Scalar base = a_max + v_max + edge_max_;
      for (int c = 0; c < classes_; ++c) {
        const Scalar term = cls(t - 1, c);
        const Scalar s = bucket[static_cast<std::size_t>(c)];
        if (term == kNegInf<Scalar>) {
          out(t - 1, c) = kNegInf<Scalar>;
        } else if (s > tiny()) {
          out(t - 1, c) = term + base + std::log(s);
        } else {
          Scalar exact = kNegInf<Scalar>;
          for (std::size_t k : by_class_[static_cast<std::size_t>(c)]) {
            const auto& b = branches_[k];
            exact = log_add(exact, alpha(t - 1, b.from) + b.log_weight + v[static_cast<std::size_t>(b.to)]);
          }
          out(t - 1, c) = term + exact;
        }
      }
    }
    return out;
  }

  /// Runs both recursions and returns the per-class joint posteriors.
  LogTable<Scalar> run(const LogTable<Scalar>& node, const LogTable<Scalar>& cls,
                       const LogVector<Scalar>& init, const LogVector<Scalar>& term) const {
    const auto alpha = forward(node, cls, init);
    const auto beta = backward(node, cls, term);
    return class_posteriors(node, cls, alpha, beta);
  }

 private:
  static constexpr Scalar tiny() { return Scalar(1e-150) > std::numeric_limits<Scalar>::min() ? Scalar(1e-150) : Scalar(1e-18); }

  void check_frame(const LogTable<Scalar>& node, const LogTable<Scalar>& cls) const {
    if (node.cols() != states_) throw std::invalid_argument("node table has wrong state count");
    if (cls.cols() != classes_) throw std::invalid_argument("class table has wrong class count");
    if (node.rows() != cls.rows()) throw std::invalid_argument("node and class tables differ in length");
    if (node.rows() == 0) throw std::invalid_argument("empty frame");
  }

  // pc = exp(cls(row, :) - max); returns the max.
  Scalar scale_row(const LogTable<Scalar>& cls, Eigen::Index row, std::vector<Scalar>& pc) const {
    const Scalar c_max = cls.row(row).maxCoeff();
    if (c_max == kNegInf<Scalar>) return c_max;
    for (int c = 0; c < classes_; ++c) pc[static_cast<std::size_t>(c)] = std::exp(cls(row, c) - c_max);
    return c_max;
  }

  // v = node(t - 1, :) + beta(t, :); returns the max.
  Scalar combine(const LogTable<Scalar>& node, const LogTable<Scalar>& beta, Eigen::Index t,
                 std::vector<Scalar>& v) const {
    Scalar v_max = kNegInf<Scalar>;
    for (int j = 0; j < states_; ++j) {
      const Scalar nd = node(t - 1, j);
      const Scalar bt = beta(t, j);
      const Scalar sum = (nd == kNegInf<Scalar> || bt == kNegInf<Scalar>) ? kNegInf<Scalar> : nd + bt;
      v[static_cast<std::size_t>(j)] = sum;
      v_max = std::max(v_max, sum);
    }
    return v_max;
  }

  int states_;
  int classes_;
  Scalar edge_max_;
  std::vector<Branch> branches_;
  std::vector<Scalar> scaled_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> by_class_;
};

}  // namespace mmturbo
