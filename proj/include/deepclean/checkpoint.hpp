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
#ifndef DEEPCLEAN_CHECKPOINT_HPP
#define DEEPCLEAN_CHECKPOINT_HPP

// Binary container shared by checkpoints and FIM/ratio dumps. Layout, all
// little-endian:
//
//   "DCLN" | u32 format version | u32 length + UTF-8 JSON descriptor |
//   u64 value count | count raw IEEE-754 values (f32 or f64)

#include "deepclean/common.hpp"
#include "deepclean/model.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <type_traits>
#include <vector>

namespace deepclean {

inline constexpr std::uint32_t kFormatVersion = 1;

template <typename Scalar>
constexpr const char* dtype_tag() {
    static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>);
    return std::is_same_v<Scalar, float> ? "f32" : "f64";
}

struct RawContainer {
    std::uint32_t version = 0;
    std::string descriptor;
    std::uint64_t count = 0;
    std::size_t width = 0;  // bytes per value
    std::vector<std::uint8_t> payload;

    template <typename Scalar>
    Vector<Scalar> values() const {
        Vector<Scalar> out(static_cast<Index>(count));
        if (width == sizeof(float)) {
            for (std::uint64_t i = 0; i < count; ++i) {
                float v;
                std::memcpy(&v, payload.data() + i * width, sizeof v);
                out[static_cast<Index>(i)] = static_cast<Scalar>(v);
            }
        } else {
            for (std::uint64_t i = 0; i < count; ++i) {
                double v;
                std::memcpy(&v, payload.data() + i * width, sizeof v);
                out[static_cast<Index>(i)] = static_cast<Scalar>(v);
            }
        }
        return out;
    }
};

void write_container(const std::filesystem::path& path, const std::string& descriptor, const void* values,
                     std::uint64_t count, std::size_t width);

/// Throws FormatError on bad magic, version mismatch or truncation.
RawContainer read_container(const std::filesystem::path& path);

std::string model_descriptor(const ModelSpec& spec, const std::vector<ParameterInfo>& layout, const char* dtype);

/// Parses a model descriptor and checks its flat index map against the
/// layout rebuilt from the embedded spec.
ModelSpec parse_model_descriptor(const std::string& descriptor);

template <typename Scalar>
void save_checkpoint(const Model<Scalar>& model, const std::filesystem::path& path) {
    const auto& values = model.parameters().values();
    write_container(path, model_descriptor(model.spec(), model.parameters().entries(), dtype_tag<Scalar>()),
                    values.data(), static_cast<std::uint64_t>(values.size()), sizeof(Scalar));
}

/// Loads a checkpoint in any stored precision, converting to `Scalar`.
template <typename Scalar>
Model<Scalar> load_checkpoint(const std::filesystem::path& path) {
    const RawContainer raw = read_container(path);
    Model<Scalar> model(parse_model_descriptor(raw.descriptor));
    if (static_cast<Index>(raw.count) != model.parameter_count()) {
        throw FormatError(path.string() + ": stores " + std::to_string(raw.count) + " values, spec needs " +
                          std::to_string(model.parameter_count()));
    }
    model.parameters().assign(raw.values<Scalar>());
    return model;
}

}  // namespace deepclean

#endif  // DEEPCLEAN_CHECKPOINT_HPP
