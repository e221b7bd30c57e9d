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

#include "kwt/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kwt {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw ConfigError("tensor shape must have rank >= 1");
  for (std::size_t d : shape) {
    if (d == 0) {
      throw ConfigError("tensor dimensions must be positive, got " +
                        shape_string(shape));
    }
  }
}

}  // namespace

template <Real T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <Real T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (shape_size(shape_) != data_.size()) {
    throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                      " does not match shape " + shape_string(shape_));
  }
}

template <Real T>
Tensor<T> Tensor<T>::from(std::initializer_list<T> values) {
  return Tensor(Shape{values.size()}, std::vector<T>(values));
}

template <Real T>
Tensor<T> Tensor<T>::matrix(std::size_t rows, std::size_t cols,
                            std::initializer_list<T> values) {
  return Tensor(Shape{rows, cols}, std::vector<T>(values));
}

template <Real T>
std::size_t Tensor<T>::rows() const {
  return shape_.empty() ? 0 : data_.size() / shape_.back();
}

template <Real T>
std::size_t Tensor<T>::cols() const {
  return shape_.empty() ? 0 : shape_.back();
}

template <Real T>
void Tensor<T>::reshape(Shape shape) {
  check_shape(shape);
  if (shape_size(shape) != data_.size()) {
    throw ConfigError("cannot reshape " + shape_string(shape_) + " to " +
                      shape_string(shape));
  }
  shape_ = std::move(shape);
  if (grad_) grad_->resize(data_.size());
}

template <Real T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <Real T>
std::vector<T>& Tensor<T>::grad() {
  if (!grad_) grad_.emplace(data_.size(), T(0));
  return *grad_;
}

template <Real T>
const std::vector<T>& Tensor<T>::grad() const {
  if (!grad_) throw ConfigError("tensor has no gradient slot");
  return *grad_;
}

template <Real T>
void Tensor<T>::set_grad(std::vector<T> grad) {
  if (grad.size() != data_.size()) {
    throw ConfigError("gradient length does not match tensor " +
                      shape_string(shape_));
  }
  grad_ = std::move(grad);
}

template <Real T>
void Tensor<T>::zero_grad() {
  grad().assign(data_.size(), T(0));
}

template <Real T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace kwt
