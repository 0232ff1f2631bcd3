#pragma once

#include <functional>
#include <vector>

#include "mssit/common.hpp"
#include "mssit/tensor/tensor.hpp"

namespace mssit {

// Record of executed differentiable operations. Ops append their backward
// rule as they run, so the list is already topologically ordered; backward()
// visits it exactly once in reverse.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> backward_rule) {
    nodes_.push_back(std::move(backward_rule));
  }

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and propagates to every recorded input.
  // Gradients accumulate: leaves used several times receive the sum.
  void backward(Tensor<T> loss) {
    require(loss.defined() && loss.numel() == 1, "backward() requires a scalar loss");
    require(!nodes_.empty(), "backward() on an empty tape");
    loss.grad()[0] += T{1};
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> nodes_;
};

}  // namespace mssit
