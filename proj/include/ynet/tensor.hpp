#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ynet {

using Shape = std::vector<int>;

inline int shape_volume(const Shape& s) {
  int n = 1;
  for (int e : s) n *= e;
  return n;
}

inline std::string shape_string(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

/// Dense tensor with shared storage and an optional same-shape gradient
/// buffer. Copies alias the same storage (clone() deep-copies), which is what
/// lets backward closures accumulate into the buffers the forward pass used.
/// Canonical layouts are C x H x W (row-major per channel) plus rank-1/rank-4
/// for biases and convolution weights.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using GridMap = Eigen::Map<Grid>;
  using ConstGridMap = Eigen::Map<const Grid>;

  Tensor() = default;

  explicit Tensor(Shape shape) : store_(std::make_shared<Store>()) {
    for (int e : shape) {
      if (e <= 0) {
        throw std::invalid_argument("tensor extents must be positive, got " + shape_string(shape));
      }
    }
    store_->shape = std::move(shape);
    store_->values = Array::Zero(shape_volume(store_->shape));
  }

  static Tensor full(Shape shape, Scalar v) {
    Tensor t(std::move(shape));
    t.values() = v;
    return t;
  }

  static Tensor from(Shape shape, const std::vector<Scalar>& v) {
    Tensor t(std::move(shape));
    if (static_cast<int>(v.size()) != t.size()) {
      throw std::invalid_argument("value count does not match shape " + shape_string(t.shape()));
    }
    for (int i = 0; i < t.size(); ++i) t.values()[i] = v[static_cast<std::size_t>(i)];
    return t;
  }

  bool valid() const { return store_ != nullptr; }
  const Shape& shape() const { return store_->shape; }
  int rank() const { return static_cast<int>(store_->shape.size()); }
  int extent(int axis) const { return store_->shape[static_cast<std::size_t>(axis)]; }
  int size() const { return static_cast<int>(store_->values.size()); }

  Array& values() { return store_->values; }
  const Array& values() const { return store_->values; }
  Scalar* data() { return store_->values.data(); }
  const Scalar* data() const { return store_->values.data(); }

  /// Element access for rank-3 tensors (channel, row, col).
  Scalar& at(int c, int i, int j) {
    return store_->values[(c * extent(1) + i) * extent(2) + j];
  }
  Scalar at(int c, int i, int j) const {
    return store_->values[(c * extent(1) + i) * extent(2) + j];
  }

  /// H x W view of one channel of a rank-3 tensor.
  GridMap channel(int c) {
    return GridMap(data() + c * extent(1) * extent(2), extent(1), extent(2));
  }
  ConstGridMap channel(int c) const {
    return ConstGridMap(data() + c * extent(1) * extent(2), extent(1), extent(2));
  }

  bool has_grad() const { return valid() && store_->grad.size() == store_->values.size(); }

  /// Allocates (zeroed) the gradient buffer if absent.
  void ensure_grad() {
    if (!has_grad()) store_->grad = Array::Zero(store_->values.size());
  }

  void zero_grad() {
    if (has_grad()) store_->grad.setZero();
  }

  Array& grad() {
    if (!has_grad()) throw std::invalid_argument("tensor has no gradient buffer");
    return store_->grad;
  }
  const Array& grad() const {
    if (!has_grad()) throw std::invalid_argument("tensor has no gradient buffer");
    return store_->grad;
  }

  GridMap grad_channel(int c) {
    return GridMap(grad().data() + c * extent(1) * extent(2), extent(1), extent(2));
  }

  Tensor clone() const {
    Tensor t(shape());
    t.values() = values();
    return t;
  }

  bool same_storage(const Tensor& other) const { return store_ == other.store_; }

 private:
  struct Store {
    Shape shape;
    Array values;
    Array grad;  // size 0 while absent
  };
  std::shared_ptr<Store> store_;
};

/// Reverse-mode tape: a linear record of hand-written backward steps, replayed
/// in reverse creation order (a valid reverse-topological order because ops
/// execute sequentially). There is no general graph machinery; only the fixed
/// op set in ops.hpp records onto it.
template <typename Scalar>
class Tape {
 public:
  void record(std::function<void()> step) { steps_.push_back(std::move(step)); }

  void backward() {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
  }

  std::size_t size() const { return steps_.size(); }
  void clear() { steps_.clear(); }

 private:
  std::vector<std::function<void()>> steps_;
};

/// Trainable tensor bundled with its Adam state.
template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> value;
  typename Tensor<Scalar>::Array moment1;
  typename Tensor<Scalar>::Array moment2;
  long step = 0;

  Parameter() = default;
  Parameter(std::string param_name, Shape shape)
      : name(std::move(param_name)), value(std::move(shape)) {
    moment1 = Tensor<Scalar>::Array::Zero(value.size());
    moment2 = Tensor<Scalar>::Array::Zero(value.size());
    value.ensure_grad();
  }
};

}  // namespace ynet
