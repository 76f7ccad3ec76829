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
#ifndef DEEPCLEAN_COMMON_HPP
#define DEEPCLEAN_COMMON_HPP

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace deepclean {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape or geometry disagreement between operands.
class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Class label or flat index outside its valid range.
class IndexError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Malformed file contents (bad magic, truncation, version mismatch).
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated by a caller (wrong argument value, bad call order).
class ContractError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// Non-finite value produced by a computation (e.g. a diverging loss).
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::string shape_string(const std::vector<Index>& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

}  // namespace deepclean

#endif  // DEEPCLEAN_COMMON_HPP
