#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mvtrans/core/error.hpp"

namespace mvtrans {

/// Dense row-major array of fixed rank. Value semantics, owns its storage.
template <class T, std::size_t Rank>
class Tensor {
 public:
  using value_type = T;
  using Shape = std::array<std::size_t, Rank>;

  Tensor() { shape_.fill(0); }

  explicit Tensor(const Shape& shape, T fill = T{}) : shape_(shape), data_(count(shape), fill) {}

  Tensor(const Shape& shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    require(data_.size() == count(shape_), ErrorCode::ShapeMismatch,
            "tensor payload size does not match shape");
  }

  static constexpr std::size_t rank() { return Rank; }
  const Shape& shape() const { return shape_; }
  std::size_t dim(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  const std::vector<T>& storage() const { return data_; }

  template <class... Idx>
  T& operator()(Idx... idx) {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <class... Idx>
  const T& operator()(Idx... idx) const {
    static_assert(sizeof...(Idx) == Rank);
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Tensor& other) const = default;

  static std::size_t count(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

 private:
  std::size_t offset(const Shape& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Rank; ++a) off = off * shape_[a] + idx[a];
    return off;
  }

  Shape shape_;
  std::vector<T> data_;
};

template <class T>
using Grid2 = Tensor<T, 2>;  // (H, W)
template <class T>
using Grid3 = Tensor<T, 3>;  // (C, H, W) or (H, W, C); documented per use

/// (H, W, 3) colour image, values in [0, 1].
using Image = Tensor<double, 3>;
using DepthMap = Grid2<double>;
using LabelMap = Grid2<int>;
using Mask = Grid2<unsigned char>;

template <class T, std::size_t R>
std::string shape_string(const Tensor<T, R>& t) {
  std::string s = "(";
  for (std::size_t a = 0; a < R; ++a) {
    if (a) s += ",";
    s += std::to_string(t.dim(a));
  }
  return s + ")";
}

}  // namespace mvtrans
