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
#include "deepclean/checkpoint.hpp"

#include <json.hpp>

#include <bit>
#include <fstream>
#include <iterator>

namespace deepclean {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'D', 'C', 'L', 'N'};

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(const std::vector<std::uint8_t>& bytes, std::size_t& pos, const std::string& what) {
    if (pos + sizeof(T) > bytes.size()) {
        throw FormatError(what + ": truncated at byte offset " + std::to_string(bytes.size()));
    }
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof v);
    pos += sizeof v;
    return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, const std::string& descriptor, const void* values,
                     std::uint64_t count, std::size_t width) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kFormatVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(descriptor.size()));
    out.write(descriptor.data(), static_cast<std::streamsize>(descriptor.size()));
    put<std::uint64_t>(out, count);
    out.write(static_cast<const char*>(values), static_cast<std::streamsize>(count * width));
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

RawContainer read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string what = path.string();
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw FormatError(what + ": bad magic header (expected DCLN)");
    }
    std::size_t pos = sizeof kMagic;
    RawContainer raw;
    raw.version = get<std::uint32_t>(bytes, pos, what);
    if (raw.version != kFormatVersion) {
        throw FormatError(what + ": format version " + std::to_string(raw.version) + ", reader supports " +
                          std::to_string(kFormatVersion));
    }
    const auto len = get<std::uint32_t>(bytes, pos, what);
    if (pos + len > bytes.size()) throw FormatError(what + ": truncated descriptor");
    raw.descriptor.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                          bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
    raw.count = get<std::uint64_t>(bytes, pos, what);

    std::string dtype;
    try {
        dtype = nlohmann::json::parse(raw.descriptor).at("dtype").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(what + ": malformed descriptor: " + e.what());
    }
    if (dtype == "f32") {
        raw.width = 4;
    } else if (dtype == "f64") {
        raw.width = 8;
    } else {
        throw FormatError(what + ": unknown dtype '" + dtype + "'");
    }
    if (bytes.size() - pos != raw.count * raw.width) {
        throw FormatError(what + ": payload holds " + std::to_string(bytes.size() - pos) + " bytes, expected " +
                          std::to_string(raw.count * raw.width));
    }
    raw.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return raw;
}

std::string model_descriptor(const ModelSpec& spec, const std::vector<ParameterInfo>& layout, const char* dtype) {
    nlohmann::ordered_json j;
    j["kind"] = "model";
    j["dtype"] = dtype;
    j["spec"] = nlohmann::ordered_json::parse(spec.descriptor());
    auto& params = j["parameters"] = nlohmann::ordered_json::array();
    for (const auto& p : layout) {
        params.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", p.offset}});
    }
    return j.dump();
}

ModelSpec parse_model_descriptor(const std::string& descriptor) {
    try {
        const auto j = nlohmann::json::parse(descriptor);
        if (j.at("kind").get<std::string>() != "model") throw FormatError("container does not hold a model");
        ModelSpec spec = ModelSpec::from_descriptor(j.at("spec").dump());
        const auto layout = parameter_layout(spec);
        const auto& params = j.at("parameters");
        if (params.size() != layout.size()) throw FormatError("checkpoint parameter map disagrees with spec");
        for (std::size_t i = 0; i < layout.size(); ++i) {
            if (params[i].at("name").get<std::string>() != layout[i].name ||
                params[i].at("shape").get<Shape>() != layout[i].shape ||
                params[i].at("offset").get<Index>() != layout[i].offset) {
                throw FormatError("checkpoint parameter map disagrees with spec at '" + layout[i].name + "'");
            }
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed model descriptor: ") + e.what());
    }
}

}  // namespace deepclean
