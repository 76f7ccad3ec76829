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
#ifndef DEEPCLEAN_FIM_HPP
#define DEEPCLEAN_FIM_HPP

#include "deepclean/common.hpp"
#include "deepclean/dataset.hpp"
#include "deepclean/model.hpp"
#include "deepclean/random.hpp"
#include "deepclean/tape.hpp"
#include "deepclean/weight_mask.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace deepclean {

/// Diagonal of the empirical Fisher information over one dataset.
struct FimDiagonal {
    Vector<double> values;
    std::string dataset;
    std::size_t sample_count = 0;

    Index size() const { return values.size(); }
};

/// Per-weight forget/retain information ratio.
struct RatioVector {
    Vector<double> values;
    double epsilon = 0.0;

    Index size() const { return values.size(); }
};

inline constexpr double kDefaultRatioEpsilon = 1e-12;

struct FimOptions {
    /// Samples per accumulation chunk. Each chunk is summed on its own before
    /// being folded into the running total.
    std::size_t chunk_size = 32;
    /// Worker threads. Chunk c goes to worker c % workers; worker partials are
    /// added in worker order, so results are reproducible per worker count.
    int workers = 1;
    /// 0 = every sample; otherwise a seeded uniform subsample of this size.
    std::size_t sample_cap = 0;
    std::uint64_t cap_seed = 0;
    std::string dataset_id;
};

/// Averages per-chunk sums of squared per-sample gradients over all samples.
///
/// `chunk_squares(begin, end)` returns, for samples [begin, end), the sum of
/// their squared gradients as a double vector of length `parameter_count`.
/// It must be callable concurrently when workers > 1.
template <typename ChunkFn>
FimDiagonal accumulate_fim_chunks(Index parameter_count, std::size_t sample_count, ChunkFn&& chunk_squares,
                                  const FimOptions& opt) {
    if (sample_count == 0) throw ContractError("fim_diagonal: empty dataset");
    const std::size_t chunk = std::max<std::size_t>(1, opt.chunk_size);
    const std::size_t chunks = (sample_count + chunk - 1) / chunk;
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opt.workers, 1)), 1, chunks);

    std::vector<Vector<double>> partial(workers, Vector<double>::Zero(parameter_count));
    std::vector<std::exception_ptr> errors(workers);
    auto run = [&](std::size_t w) {
        try {
            for (std::size_t c = w; c < chunks; c += workers) {
                const std::size_t end = std::min(sample_count, (c + 1) * chunk);
                const Vector<double> chunk_sum = chunk_squares(c * chunk, end);
                if (chunk_sum.size() != parameter_count) throw DimensionError("fim: gradient length mismatch");
                partial[w] += chunk_sum;
            }
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    FimDiagonal out;
    out.values = Vector<double>::Zero(parameter_count);
    for (const auto& p : partial) out.values += p;
    out.values /= static_cast<double>(sample_count);
    out.dataset = opt.dataset_id;
    out.sample_count = sample_count;
    return out;
}

/// Same reduction from a per-sample gradient callback: entry i is
/// mean_s grad(s)_i^2, squares taken in double.
template <typename GradFn>
FimDiagonal accumulate_fim(Index parameter_count, std::size_t sample_count, GradFn&& grad, const FimOptions& opt) {
    return accumulate_fim_chunks(
        parameter_count, sample_count,
        [&](std::size_t begin, std::size_t end) {
            Vector<double> sum = Vector<double>::Zero(parameter_count);
            for (std::size_t s = begin; s < end; ++s) {
                const auto g = grad(s);
                if (g.size() != parameter_count) throw DimensionError("fim: gradient length mismatch");
                sum.array() += g.template cast<double>().array().square();
            }
            return sum;
        },
        opt);
}

/// Sample positions used for a FIM pass under `opt.sample_cap`.
inline std::vector<std::size_t> fim_sample_indices(std::size_t n, const FimOptions& opt) {
    if (opt.sample_cap == 0 || opt.sample_cap >= n) {
        std::vector<std::size_t> all(n);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    return Rng(opt.cap_seed).fork(streams::kFimCap).sample_without_replacement(n, opt.sample_cap);
}

/// Empirical FIM diagonal of `model` over `data` at the observed labels,
/// from per-sample gradients of log p(y | x, w). Each chunk runs as one
/// batch; the tape recovers the per-sample squares from the batched pass.
template <typename Scalar>
FimDiagonal fim_diagonal(const Model<Scalar>& model, const LabeledDataset& data, const FimOptions& opt = {}) {
    if (data.empty()) throw ContractError("fim_diagonal: empty dataset");
    if (data.class_count != model.class_count()) throw DimensionError("fim_diagonal: class count mismatch");
    const auto idx = fim_sample_indices(data.size(), opt);
    const Index n = model.parameter_count();
    return accumulate_fim_chunks(
        n, idx.size(),
        [&](std::size_t begin, std::size_t end) {
            const std::span<const std::size_t> rows(idx.data() + begin, end - begin);
            Tape<Scalar> tape(n);
            Var logits = model.forward(tape, tape.constant(data.batch<Scalar>(rows)));
            // nll_loss averages over rows; rescale to the per-sample sum.
            Var total = tape.scale(tape.nll_loss(tape.log_softmax(logits), data.labels_at(rows)),
                                   static_cast<Scalar>(rows.size()));
            return tape.backward_per_sample_squares(total);
        },
        opt);
}

/// r_i = I_f,i / max(I_r,i, eps); entries below eps on both sides get 0.
RatioVector ratio(const FimDiagonal& forget, const FimDiagonal& retain, double epsilon = kDefaultRatioEpsilon);
RatioVector ratio(const Vector<double>& forget, const Vector<double>& retain, double epsilon = kDefaultRatioEpsilon);

/// W_f = { i : r_i > gamma } (strict).
WeightMask mask_from_threshold(const RatioVector& r, double gamma);

struct CurvePoint {
    double gamma = 0.0;
    Index retain_count = 0;  // |W_r|(gamma)
};

/// |W_r| for every gamma of an ascending grid.
std::vector<CurvePoint> mask_size_curve(const RatioVector& r, std::span<const double> gamma_grid);

void save_fim(const FimDiagonal& fim, const std::filesystem::path& path);
FimDiagonal load_fim(const std::filesystem::path& path);
void save_ratio(const RatioVector& r, const std::filesystem::path& path);
RatioVector load_ratio(const std::filesystem::path& path);

/// "flat_index,value" rows with a header line.
void write_index_csv(const Vector<double>& values, const std::filesystem::path& path);
Vector<double> read_index_csv(const std::filesystem::path& path);

}  // namespace deepclean

#endif  // DEEPCLEAN_FIM_HPP
