#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "mssit/common.hpp"

namespace mssit {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Dense n-dimensional value with optional gradient. Copying a Tensor copies a
// handle; the payload is shared. The scalar type selects precision: float for
// training, double for gradient checks.
template <typename T>
class Tensor {
  struct Data {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;  // allocated on first accumulation
    bool requires_grad = false;
  };

 public:
  Tensor() = default;

  static Tensor zeros(Shape shape) {
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->values.assign(shape_numel(shape), T{0});
    t.d_->shape = std::move(shape);
    return t;
  }

  static Tensor from(Shape shape, std::vector<T> values) {
    require(shape_numel(shape) == values.size(), "tensor shape/data mismatch");
    Tensor t;
    t.d_ = std::make_shared<Data>();
    t.d_->shape = std::move(shape);
    t.d_->values = std::move(values);
    return t;
  }

  static Tensor scalar(T v) { return from({1}, {v}); }

  bool defined() const { return d_ != nullptr; }
  const Shape& shape() const { return d_->shape; }
  std::size_t rank() const { return d_->shape.size(); }
  std::size_t numel() const { return d_->values.size(); }
  std::size_t size(std::size_t axis) const { return d_->shape[axis]; }

  std::vector<T>& values() { return d_->values; }
  const std::vector<T>& values() const { return d_->values; }
  T* data() { return d_->values.data(); }
  const T* data() const { return d_->values.data(); }
  T item() const {
    require(numel() == 1, "item() requires a scalar tensor");
    return d_->values[0];
  }

  bool requires_grad() const { return d_ && d_->requires_grad; }
  Tensor& set_requires_grad(bool v = true) {
    d_->requires_grad = v;
    return *this;
  }

  // Gradient buffer, zero-filled on first use.
  std::vector<T>& grad() {
    if (d_->grad.size() != d_->values.size()) d_->grad.assign(d_->values.size(), T{0});
    return d_->grad;
  }
  bool has_grad() const { return d_ && d_->grad.size() == d_->values.size(); }
  void zero_grad() {
    if (d_) d_->grad.assign(d_->values.size(), T{0});
  }

  // Deep copy of the values; gradient state is not carried over.
  Tensor clone() const {
    Tensor t = from(d_->shape, d_->values);
    t.d_->requires_grad = d_->requires_grad;
    return t;
  }

  // Identity of the underlying payload, for parameter bookkeeping.
  const void* id() const { return d_.get(); }

 private:
  std::shared_ptr<Data> d_;
};

}  // namespace mssit
