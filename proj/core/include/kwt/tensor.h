/* Copyright 2026 The KWT Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kwt/error.h"

namespace kwt {

template <typename T>
concept Real = std::floating_point<T>;

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array with an optional gradient slot. Every numeric value
// exchanged between modules travels in one of these.
template <Real T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> data);

  static Tensor from(std::initializer_list<T> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<T> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Rows/cols of the tensor viewed as a matrix whose last axis is the
  // column axis.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const T& at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }
  std::span<T> row(std::size_t r) { return data().subspan(r * cols(), cols()); }
  std::span<const T> row(std::size_t r) const {
    return data().subspan(r * cols(), cols());
  }

  void reshape(Shape shape);
  void fill(T value);

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }
  bool has_grad() const { return grad_.has_value(); }
  // Allocates a zeroed gradient slot on first use.
  std::vector<T>& grad();
  const std::vector<T>& grad() const;
  void set_grad(std::vector<T> grad);
  void zero_grad();
  void clear_grad() { grad_.reset(); }

  bool all_finite() const;

  template <Real U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<T> data_;
  std::optional<std::vector<T>> grad_;
  bool requires_grad_ = false;
};

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace kwt
