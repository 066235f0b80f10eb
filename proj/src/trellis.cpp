#include "mmturbo/trellis.hpp"

#include <set>
#include <utility>

namespace mmturbo {

TrellisSpec::TrellisSpec(int num_states, int input_alphabet_size,
                         std::vector<Transition> transitions)
    : num_states_(num_states), alphabet_(input_alphabet_size), transitions_(std::move(transitions)) {
  if (num_states_ < 1) throw std::invalid_argument("trellis needs at least one state");
  if (alphabet_ < 1) throw std::invalid_argument("trellis needs a non-empty input alphabet");
  index_ = Eigen::MatrixXi::Constant(num_states_, num_states_, -1);
  std::set<std::pair<int, int>> seen_inputs;
  for (std::size_t k = 0; k < transitions_.size(); ++k) {
    const auto& tr = transitions_[k];
    if (tr.from < 0 || tr.from >= num_states_ || tr.to < 0 || tr.to >= num_states_)
      throw std::invalid_argument("transition state index out of range");
    if (tr.label < 0 || tr.label >= alphabet_)
      throw std::invalid_argument("transition input label out of range");
    if (!seen_inputs.emplace(tr.from, tr.label).second)
      throw std::invalid_argument("non-deterministic trellis: repeated (from, input) pair");
    if (index_(tr.from, tr.to) >= 0)
      throw std::invalid_argument("parallel transitions between the same pair of states");
    index_(tr.from, tr.to) = static_cast<int>(k);
  }
}

}  // namespace mmturbo
