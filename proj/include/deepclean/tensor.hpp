// Copyright 2026 The DeepClean Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DEEPCLEAN_TENSOR_HPP
#define DEEPCLEAN_TENSOR_HPP

#include "deepclean/common.hpp"

#include <Eigen/Core>

#include <functional>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <utility>

namespace deepclean {

using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

/// Dense row-major n-dimensional array.
///
/// Values are immutable once constructed and the storage is shared, so copies
/// are cheap and a Tensor may be read from several threads. A Tensor can also
/// view a contiguous slice of a larger shared buffer (used for parameters).
template <typename Scalar>
class Tensor {
  public:
    using VectorType = Vector<Scalar>;
    using ConstMap = Eigen::Map<const VectorType>;
    using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

    Tensor() : storage_(std::make_shared<const VectorType>()) {}

    /// Takes ownership of `values`; rejects size mismatches and NaN/Inf.
    Tensor(Shape shape, VectorType values) : shape_(std::move(shape)) {
        validate_shape(shape_);
        if (shape_size(shape_) != values.size()) {
            throw DimensionError("tensor: shape " + shape_string(shape_) + " holds " +
                                 std::to_string(shape_size(shape_)) + " values, got " +
                                 std::to_string(values.size()));
        }
        if (!values.allFinite()) throw NumericError("tensor: non-finite value on creation");
        storage_ = std::make_shared<const VectorType>(std::move(values));
    }

    Tensor(Shape shape, std::initializer_list<Scalar> values)
        : Tensor(std::move(shape), from_list(values)) {}

    static Tensor zeros(Shape shape) {
        const Index n = shape_size(shape);
        return Tensor(std::move(shape), VectorType::Zero(n));
    }

    static Tensor scalar(Scalar value) { return Tensor(Shape{1}, VectorType::Constant(1, value)); }

    /// View of `shape_size(shape)` values of `storage` starting at `offset`.
    /// No copy and no finiteness scan; the caller owns the storage contract.
    static Tensor view(Shape shape, std::shared_ptr<const VectorType> storage, Index offset) {
        validate_shape(shape);
        if (offset < 0 || offset + shape_size(shape) > storage->size()) {
            throw DimensionError("tensor view: slice exceeds storage");
        }
        Tensor t;
        t.shape_ = std::move(shape);
        t.storage_ = std::move(storage);
        t.offset_ = offset;
        return t;
    }

    /// Same values, new shape. Shares storage.
    Tensor reshaped(Shape shape) const {
        if (shape_size(shape) != size()) {
            throw DimensionError("reshape: " + shape_string(shape_) + " -> " + shape_string(shape));
        }
        return view(std::move(shape), storage_, offset_);
    }

    template <typename Other>
    Tensor<Other> cast() const {
        return Tensor<Other>(shape_, values().template cast<Other>());
    }

    const Shape& shape() const { return shape_; }
    Index rank() const { return static_cast<Index>(shape_.size()); }
    Index dim(Index i) const { return shape_.at(static_cast<std::size_t>(i)); }
    Index size() const { return shape_.empty() ? 0 : shape_size(shape_); }

    ConstMap values() const { return ConstMap(storage_->data() + offset_, size()); }

    /// 2-D row-major view; rank must be 2.
    ConstMatrixMap matrix() const {
        if (rank() != 2) throw DimensionError("matrix view needs rank 2, got " + shape_string(shape_));
        return ConstMatrixMap(storage_->data() + offset_, shape_[0], shape_[1]);
    }

    Scalar operator[](Index i) const { return storage_->coeff(offset_ + i); }

    Scalar item() const {
        if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape_));
        return (*this)[0];
    }

  private:
    static void validate_shape(const Shape& shape) {
        if (shape.empty()) throw DimensionError("tensor: empty shape");
        for (Index d : shape) {
            if (d <= 0) throw DimensionError("tensor: non-positive extent in " + shape_string(shape));
        }
    }

    static VectorType from_list(std::initializer_list<Scalar> values) {
        VectorType v(static_cast<Index>(values.size()));
        Index i = 0;
        for (Scalar x : values) v[i++] = x;
        return v;
    }

    Shape shape_;
    std::shared_ptr<const VectorType> storage_;
    Index offset_ = 0;
};

}  // namespace deepclean

#endif  // DEEPCLEAN_TENSOR_HPP
