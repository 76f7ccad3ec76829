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
#include "oracles.hpp"

#include "deepclean/metrics.hpp"

#include <doctest.h>
#include <zlib.h>

#include <set>

using namespace deepclean;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "deepclean_test_dataset";
    fs::create_directories(dir);
    return dir / name;
}

void put_be32(std::string& s, std::uint32_t v) {
    for (int k = 3; k >= 0; --k) s.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

std::string idx_images(const std::vector<std::uint8_t>& pixels, std::uint32_t n, std::uint32_t rows, std::uint32_t cols) {
    std::string s;
    put_be32(s, 0x803);
    put_be32(s, n);
    put_be32(s, rows);
    put_be32(s, cols);
    s.append(pixels.begin(), pixels.end());
    return s;
}

std::string idx_labels(const std::vector<std::uint8_t>& labels) {
    std::string s;
    put_be32(s, 0x801);
    put_be32(s, static_cast<std::uint32_t>(labels.size()));
    s.append(labels.begin(), labels.end());
    return s;
}

void write_gz(const fs::path& p, const std::string& data) {
    gzFile f = gzopen(p.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    gzwrite(f, data.data(), static_cast<unsigned>(data.size()));
    gzclose(f);
}

LabeledDataset toy(std::size_t n, int classes, std::uint64_t seed) { return oracle::synthetic_dataset(n, classes, {1, 2, 2}, seed); }

void check_partition(const DataSplit& s, std::size_t n) {
    std::set<std::size_t> r(s.retain.origin.begin(), s.retain.origin.end());
    std::set<std::size_t> f(s.forget.origin.begin(), s.forget.origin.end());
    CHECK(r.size() == s.retain.size());
    CHECK(f.size() == s.forget.size());
    for (auto i : f) CHECK(r.count(i) == 0);
    CHECK(r.size() + f.size() == n);
}

}  // namespace

TEST_CASE("load_mnist parses IDX, scales pixels and reads gzip transparently") {
    std::vector<std::uint8_t> px(2 * 28 * 28, 0);
    px[0] = 255;
    px[28 * 28 + 5] = 51;
    write_text_file(scratch("img.idx"), idx_images(px, 2, 28, 28));
    write_text_file(scratch("lbl.idx"), idx_labels({3, 9}));
    const auto d = load_mnist(scratch("img.idx"), scratch("lbl.idx"));
    CHECK(d.size() == 2);
    CHECK(d.images.shape() == Shape{2, 1, 28, 28});
    CHECK(d.images.values()[0] == 1.0f);
    CHECK(d.images.values()[28 * 28 + 5] == 51.0f / 255.0f);
    CHECK(d.labels == std::vector<int>{3, 9});
    CHECK(d.class_count == 10);

    write_gz(scratch("img.idx.gz"), idx_images(px, 2, 28, 28));
    write_gz(scratch("lbl.idx.gz"), idx_labels({3, 9}));
    const auto g = load_mnist(scratch("img.idx.gz"), scratch("lbl.idx.gz"));
    CHECK(g.images.values() == d.images.values());
    CHECK(g.labels == d.labels);
}

TEST_CASE("load_mnist errors") {
    std::vector<std::uint8_t> px(2 * 4 * 4, 7);
    const std::string full = idx_images(px, 2, 4, 4);
    write_text_file(scratch("trunc.idx"), full.substr(0, full.size() - 5));
    write_text_file(scratch("lbl2.idx"), idx_labels({1, 2}));
    try {
        load_mnist(scratch("trunc.idx"), scratch("lbl2.idx"));
        FAIL("expected a truncation error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
    }
    std::string bad = full;
    bad[3] = 0x01;
    write_text_file(scratch("magic.idx"), bad);
    CHECK_THROWS_AS(load_mnist(scratch("magic.idx"), scratch("lbl2.idx")), FormatError);
    write_text_file(scratch("ok.idx"), full);
    write_text_file(scratch("lbl3.idx"), idx_labels({1, 2, 3}));
    CHECK_THROWS_AS(load_mnist(scratch("ok.idx"), scratch("lbl3.idx")), FormatError);
}

TEST_CASE("load_cifar10 records") {
    std::string one(3073, '\0');
    one[0] = 9;
    one[1] = static_cast<char>(255);
    write_text_file(scratch("one.bin"), one);
    const auto d = load_cifar10({scratch("one.bin")});
    CHECK(d.size() == 1);
    CHECK(d.labels[0] == 9);
    CHECK(d.images.shape() == Shape{1, 3, 32, 32});
    CHECK(d.images.values()[0] == 1.0f);
    write_text_file(scratch("two.bin"), one + one);
    CHECK(load_cifar10({scratch("one.bin"), scratch("two.bin")}).size() == 3);
    write_text_file(scratch("bad.bin"), one.substr(0, 3000));
    CHECK_THROWS_AS(load_cifar10({scratch("bad.bin")}), FormatError);
}

TEST_CASE("split_random sizes, determinism and partition") {
    const auto data = toy(10, 3, 1);
    const auto test = toy(4, 3, 2);
    const auto s = split_random(data, test, 0.5, 42);
    CHECK(s.forget.size() == 5);
    CHECK(s.retain.size() == 5);
    check_partition(s, 10);
    const auto again = split_random(data, test, 0.5, 42);
    CHECK(again.forget.origin == s.forget.origin);
    CHECK(split_random(data, test, 0.5, 43).forget.origin != s.forget.origin);

    const auto big = toy(1000, 10, 3);
    const auto tenth = split_random(big, test, 0.1, 7);
    CHECK(tenth.forget.size() == 100);
    check_partition(tenth, 1000);

    CHECK_THROWS_AS(split_random(data, test, 0.0, 1), ContractError);
    CHECK_THROWS_AS(split_random(data, test, 1.0, 1), ContractError);
}

TEST_CASE("split_class partitions by label") {
    const auto data = toy(200, 4, 9);
    const auto test = toy(10, 4, 8);
    const auto s = split_class(data, test, 2);
    check_partition(s, 200);
    for (int y : s.forget.labels) CHECK(y == 2);
    for (int y : s.retain.labels) CHECK(y != 2);
    CHECK(s.forget.size() == data.histogram()[2]);
    CHECK_THROWS_AS(split_class(data, test, 4), IndexError);

    auto no_three = data;
    for (auto& y : no_three.labels)
        if (y == 3) y = 0;
    CHECK_THROWS_AS(split_class(no_three, test, 3), ContractError);
}

TEST_CASE("cap_per_class keeps the first k per class in file order") {
    const auto data = toy(100, 3, 4);
    const auto capped = cap_per_class(data, 5);
    const auto h = capped.histogram();
    for (auto c : h) CHECK(c == 5);
    std::vector<int> seen(3, 0);
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < data.size(); ++i)
        if (seen[static_cast<std::size_t>(data.labels[i])]++ < 5) expect.push_back(i);
    CHECK(capped.origin == expect);
}

TEST_CASE("desk MNIST subset loads with the expected shape and counts") {
    const auto dir = oracle::desk_mnist_dir();
    const auto train = load_mnist(dir / "train-images-idx3-ubyte.gz", dir / "train-labels-idx1-ubyte.gz");
    const auto test = load_mnist(dir / "t10k-images-idx3-ubyte.gz", dir / "t10k-labels-idx1-ubyte.gz");
    CHECK(train.size() == 8000);
    CHECK(test.size() == 2000);
    CHECK(train.sample_shape() == Shape{1, 28, 28});
    CHECK(train.images.values().minCoeff() >= 0.0f);
    CHECK(train.images.values().maxCoeff() <= 1.0f);
    const auto h = train.histogram();
    std::size_t total = 0;
    for (auto c : h) {
        CHECK(c > 0);
        total += c;
    }
    CHECK(total == 8000);
    const auto s = split_class(train, test, 0);
    CHECK(s.forget.size() == h[0]);
    check_partition(s, 8000);
}
