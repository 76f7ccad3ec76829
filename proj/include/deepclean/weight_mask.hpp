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
#ifndef DEEPCLEAN_WEIGHT_MASK_HPP
#define DEEPCLEAN_WEIGHT_MASK_HPP

#include "deepclean/common.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace deepclean {

/// Partition of the flat parameter index into the forget-informed set W_f
/// (bit set) and the retained set W_r (bit clear).
struct WeightMask {
    std::vector<std::uint8_t> bits;
    double gamma = std::numeric_limits<double>::infinity();
    Index forget_count = 0;  // |W_f|
    Index retain_count = 0;  // |W_r|

    static WeightMask none(Index n) { return WeightMask{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0), std::numeric_limits<double>::infinity(), 0, n}; }

    static WeightMask all(Index n) { return WeightMask{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 1), 0.0, n, 0}; }

    static WeightMask from_indices(Index n, const std::vector<Index>& indices) {
        WeightMask m = none(n);
        for (Index i : indices) m.bits.at(static_cast<std::size_t>(i)) = 1;
        m.recount();
        return m;
    }

    Index size() const { return static_cast<Index>(bits.size()); }
    bool test(Index i) const { return bits[static_cast<std::size_t>(i)] != 0; }

    void recount() {
        forget_count = 0;
        for (auto b : bits) forget_count += b ? 1 : 0;
        retain_count = size() - forget_count;
    }
};

}  // namespace deepclean

#endif  // DEEPCLEAN_WEIGHT_MASK_HPP
