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
#ifndef DEEPCLEAN_TAPE_HPP
#define DEEPCLEAN_TAPE_HPP

#include "deepclean/common.hpp"
#include "deepclean/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deepclean {

/// Handle to a node recorded on a Tape.
struct Var {
    std::size_t id = 0;
};

/// Gradient over the flat parameter index of a model.
template <typename Scalar>
using GradientVector = Vector<Scalar>;

/// Reverse-mode differentiation tape.
///
/// Every op appends one node whose inputs were recorded earlier, so node order
/// is a topological order and `backward` is a single reverse sweep. Parameter
/// leaves carry a flat offset; `backward` scatters their gradients into a
/// vector of length `parameter_count`. Gradients of constants and of nodes that
/// do not depend on a parameter are never computed.
///
/// A Tape is single-owner. Concurrent gradient work uses one tape per worker.
template <typename Scalar>
class Tape {
  public:
    using TensorType = Tensor<Scalar>;
    using VectorType = Vector<Scalar>;

    explicit Tape(Index parameter_count = 0) : parameter_count_(parameter_count) {}

    Index parameter_count() const { return parameter_count_; }
    std::size_t node_count() const { return nodes_.size(); }

    /// Scan every op output for NaN/Inf. On by default in debug builds.
    void set_finite_checks(bool on) { check_finite_ = on; }
    bool finite_checks() const { return check_finite_; }

    Var constant(TensorType value) { return push(std::move(value), false, nullptr); }

    /// Differentiable leaf mapped to flat indices [offset, offset + size).
    Var parameter(TensorType value, Index offset) {
        if (offset < 0 || offset + value.size() > parameter_count_) {
            throw IndexError("parameter slice [" + std::to_string(offset) + ", " +
                             std::to_string(offset + value.size()) + ") outside flat index of size " +
                             std::to_string(parameter_count_));
        }
        Var v = push(std::move(value), true, nullptr);
        nodes_[v.id].param_offset = offset;
        return v;
    }

    const TensorType& value(Var v) const { return node(v).value; }

    bool requires_grad(Var v) const { return node(v).requires_grad; }

    // ---------------------------------------------------------------- ops

    /// [m x k] * [k x p] -> [m x p]
    Var matmul(Var a, Var b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
            throw DimensionError("matmul: " + shape_string(av.shape()) + " x " + shape_string(bv.shape()));
        }
        const Index m = av.dim(0), p = bv.dim(1);
        RowMatrix<Scalar> out = av.matrix() * bv.matrix();
        return push_op(TensorType({m, p}, flat(std::move(out))), {a, b},
                       [a, b, m, p](const VectorType& g, Tape& t) {
                           Eigen::Map<const RowMatrix<Scalar>> gm(g.data(), m, p);
                           if (t.requires_grad(a)) {
                               RowMatrix<Scalar> ga = gm * t.value(b).matrix().transpose();
                               t.accumulate(a, ga.template reshaped<Eigen::RowMajor>());
                           }
                           if (t.requires_grad(b)) {
                               if (t.squares_mode_) {
                                   const Eigen::MatrixXd a2 = t.value(a).matrix().template cast<double>().array().square();
                                   const Eigen::MatrixXd g2 = gm.template cast<double>().array().square();
                                   const RowMatrix<double> s2 = a2.transpose() * g2;
                                   t.accumulate_squares(b, s2.reshaped<Eigen::RowMajor>());
                               }
                               RowMatrix<Scalar> gb = t.value(a).matrix().transpose() * gm;
                               t.accumulate(b, gb.template reshaped<Eigen::RowMajor>());
                           }
                       });
    }

    /// [B x k] + [k] broadcast over rows; [k] + [k] elementwise.
    Var add_bias(Var x, Var bias) {
        const auto& xv = value(x);
        const auto& bv = value(bias);
        const Index k = bv.size();
        if (bv.rank() != 1 || xv.shape().back() != k || xv.rank() > 2) {
            throw DimensionError("add_bias: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
        }
        const Index rows = xv.size() / k;
        RowMatrix<Scalar> out = xv.values().template reshaped<Eigen::RowMajor>(rows, k);
        out.rowwise() += bv.values().transpose();
        return push_op(TensorType(xv.shape(), flat(std::move(out))), {x, bias},
                       [x, bias, rows, k](const VectorType& g, Tape& t) {
                           t.accumulate(x, g);
                           if (t.requires_grad(bias)) {
                               auto gm = g.template reshaped<Eigen::RowMajor>(rows, k);
                               if (t.squares_mode_) {
                                   const Eigen::VectorXd s2 =
                                       gm.template cast<double>().array().square().colwise().sum().transpose();
                                   t.accumulate_squares(bias, s2);
                               }
                               VectorType gb = gm.colwise().sum().transpose();
                               t.accumulate(bias, gb);
                           }
                       });
    }

    /// Cross-correlation. Input [N x C x H x W] or [C x H x W]; kernel
    /// [O x C x kh x kw]. Output keeps the input's rank.
    Var conv2d(Var x, Var kernel, Index stride = 1, Index padding = 0) {
        const auto& xv = value(x);
        const auto& kv = value(kernel);
        const bool batched = xv.rank() == 4;
        if ((xv.rank() != 3 && !batched) || kv.rank() != 4) {
            throw DimensionError("conv2d: input " + shape_string(xv.shape()) + ", kernel " +
                                 shape_string(kv.shape()));
        }
        const ConvGeometry geo = conv_geometry(xv, kv, stride, padding);
        RowMatrix<Scalar> out(geo.n, geo.out_c * geo.out_h * geo.out_w);
        const auto kmat = kv.values().template reshaped<Eigen::RowMajor>(geo.out_c, geo.patch());
        for (Index s = 0; s < geo.n; ++s) {
            RowMatrix<Scalar> col = im2col(xv.values().data() + s * geo.in_size(), geo);
            RowMatrix<Scalar> o = kmat * col;
            out.row(s) = o.template reshaped<Eigen::RowMajor>().transpose();
        }
        Shape shape = batched ? Shape{geo.n, geo.out_c, geo.out_h, geo.out_w}
                              : Shape{geo.out_c, geo.out_h, geo.out_w};
        return push_op(TensorType(std::move(shape), flat(std::move(out))), {x, kernel},
                       [x, kernel, geo](const VectorType& g, Tape& t) {
                           const auto& xv = t.value(x);
                           const auto kmat = t.value(kernel).values().template reshaped<Eigen::RowMajor>(
                               geo.out_c, geo.patch());
                           const bool need_x = t.requires_grad(x);
                           const bool need_k = t.requires_grad(kernel);
                           RowMatrix<Scalar> gk = RowMatrix<Scalar>::Zero(geo.out_c, geo.patch());
                           RowMatrix<double> sk;
                           if (need_k && t.squares_mode_) sk = RowMatrix<double>::Zero(geo.out_c, geo.patch());
                           VectorType gx = need_x ? VectorType::Zero(xv.size()) : VectorType();
                           const Index out_plane = geo.out_h * geo.out_w;
                           for (Index s = 0; s < geo.n; ++s) {
                               Eigen::Map<const RowMatrix<Scalar>> go(
                                   g.data() + s * geo.out_c * out_plane, geo.out_c, out_plane);
                               if (need_k) {
                                   RowMatrix<Scalar> col = im2col(xv.values().data() + s * geo.in_size(), geo);
                                   if (t.squares_mode_) {
                                       RowMatrix<Scalar> one = go * col.transpose();
                                       sk.array() += one.template cast<double>().array().square();
                                       gk += one;
                                   } else {
                                       gk.noalias() += go * col.transpose();
                                   }
                               }
                               if (need_x) {
                                   RowMatrix<Scalar> gcol = kmat.transpose() * go;
                                   col2im(gcol, gx.data() + s * geo.in_size(), geo);
                               }
                           }
                           if (need_k && t.squares_mode_) t.accumulate_squares(kernel, sk.reshaped<Eigen::RowMajor>());
                           if (need_k) t.accumulate(kernel, gk.template reshaped<Eigen::RowMajor>());
                           if (need_x) t.accumulate(x, gx);
                       });
    }

    /// Per-channel bias for [N x O x H x W] or [O x H x W] activations.
    Var add_channel_bias(Var x, Var bias) {
        const auto& xv = value(x);
        const auto& bv = value(bias);
        const Index c_axis = xv.rank() == 4 ? 1 : 0;
        if ((xv.rank() != 3 && xv.rank() != 4) || bv.rank() != 1 || bv.size() != xv.dim(c_axis)) {
            throw DimensionError("add_channel_bias: " + shape_string(xv.shape()) + " + " +
                                 shape_string(bv.shape()));
        }
        const Index channels = bv.size();
        const Index plane = xv.dim(xv.rank() - 1) * xv.dim(xv.rank() - 2);
        const Index n = xv.size() / (channels * plane);
        VectorType out = xv.values();
        for (Index s = 0; s < n; ++s)
            for (Index c = 0; c < channels; ++c)
                out.segment((s * channels + c) * plane, plane).array() += bv[c];
        return push_op(TensorType(xv.shape(), std::move(out)), {x, bias},
                       [x, bias, n, channels, plane](const VectorType& g, Tape& t) {
                           t.accumulate(x, g);
                           if (t.requires_grad(bias)) {
                               VectorType gb = VectorType::Zero(channels);
                               Eigen::VectorXd sb = Eigen::VectorXd::Zero(channels);
                               for (Index s = 0; s < n; ++s)
                                   for (Index c = 0; c < channels; ++c) {
                                       const Scalar part = g.segment((s * channels + c) * plane, plane).sum();
                                       gb[c] += part;
                                       sb[c] += static_cast<double>(part) * static_cast<double>(part);
                                   }
                               if (t.squares_mode_) t.accumulate_squares(bias, sb);
                               t.accumulate(bias, gb);
                           }
                       });
    }

    /// max(0, x); the subgradient at exactly 0 is 0.
    Var relu(Var x) {
        const auto& xv = value(x);
        VectorType out = xv.values().cwiseMax(Scalar(0));
        return push_op(TensorType(xv.shape(), std::move(out)), {x}, [x](const VectorType& g, Tape& t) {
            const auto in = t.value(x).values();
            VectorType gx = (in.array() > Scalar(0)).select(g, VectorType::Zero(g.size()));
            t.accumulate(x, gx);
        });
    }

    /// Window max over the two trailing axes, no padding. The backward pass
    /// routes each output gradient to the first maximal element of its window.
    Var maxpool2d(Var x, Index window, Index stride) {
        const auto& xv = value(x);
        if ((xv.rank() != 3 && xv.rank() != 4) || window <= 0 || stride <= 0) {
            throw DimensionError("maxpool2d: input " + shape_string(xv.shape()));
        }
        const Index h = xv.dim(xv.rank() - 2), w = xv.dim(xv.rank() - 1);
        if (window > h || window > w) throw DimensionError("maxpool2d: window exceeds input");
        const Index oh = (h - window) / stride + 1, ow = (w - window) / stride + 1;
        const Index planes = xv.size() / (h * w);
        VectorType out(planes * oh * ow);
        std::vector<Index> argmax(static_cast<std::size_t>(out.size()));
        const auto in = xv.values();
        for (Index p = 0; p < planes; ++p) {
            for (Index i = 0; i < oh; ++i) {
                for (Index j = 0; j < ow; ++j) {
                    Index best = p * h * w + i * stride * w + j * stride;
                    for (Index di = 0; di < window; ++di) {
                        for (Index dj = 0; dj < window; ++dj) {
                            const Index idx = p * h * w + (i * stride + di) * w + (j * stride + dj);
                            if (in[idx] > in[best]) best = idx;
                        }
                    }
                    const Index o = (p * oh + i) * ow + j;
                    out[o] = in[best];
                    argmax[static_cast<std::size_t>(o)] = best;
                }
            }
        }
        Shape shape = xv.shape();
        shape[shape.size() - 2] = oh;
        shape[shape.size() - 1] = ow;
        const Index in_size = xv.size();
        return push_op(TensorType(std::move(shape), std::move(out)), {x},
                       [x, argmax = std::move(argmax), in_size](const VectorType& g, Tape& t) {
                           VectorType gx = VectorType::Zero(in_size);
                           for (Index o = 0; o < g.size(); ++o) gx[argmax[static_cast<std::size_t>(o)]] += g[o];
                           t.accumulate(x, gx);
                       });
    }

    /// Collapse all axes after the first `keep` into one.
    Var flatten(Var x, Index keep = 1) {
        const auto& xv = value(x);
        if (keep < 0 || keep >= xv.rank()) {
            if (keep == xv.rank()) return reshape(x, xv.shape());
            throw DimensionError("flatten: keep=" + std::to_string(keep) + " on " + shape_string(xv.shape()));
        }
        Shape shape(xv.shape().begin(), xv.shape().begin() + keep);
        Index rest = 1;
        for (Index i = keep; i < xv.rank(); ++i) rest *= xv.dim(i);
        shape.push_back(rest);
        return reshape(x, std::move(shape));
    }

    Var reshape(Var x, Shape shape) {
        return push_op(value(x).reshaped(std::move(shape)), {x},
                       [x](const VectorType& g, Tape& t) { t.accumulate(x, g); });
    }

    /// Log of softmax along the last axis (rank 1 or 2), max-shifted.
    Var log_softmax(Var x) {
        const auto& xv = value(x);
        if (xv.rank() > 2 || xv.shape().back() < 2) {
            throw DimensionError("log_softmax: needs [c] or [B x c] with c >= 2, got " + shape_string(xv.shape()));
        }
        const Index c = xv.shape().back();
        const Index rows = xv.size() / c;
        RowMatrix<Scalar> out = xv.values().template reshaped<Eigen::RowMajor>(rows, c);
        for (Index r = 0; r < rows; ++r) {
            const Scalar mx = out.row(r).maxCoeff();
            out.row(r).array() -= mx;
            const Scalar lse = std::log(out.row(r).array().exp().sum());
            out.row(r).array() -= lse;
        }
        Var y = push_op(TensorType(xv.shape(), flat(std::move(out))), {x}, nullptr);
        nodes_[y.id].pullback = [x, y, rows, c](const VectorType& g, Tape& t) {
            const auto lp = t.value(y).values().template reshaped<Eigen::RowMajor>(rows, c);
            const auto gm = g.template reshaped<Eigen::RowMajor>(rows, c);
            RowMatrix<Scalar> gx = gm;
            for (Index r = 0; r < rows; ++r) gx.row(r) -= lp.row(r).array().exp().matrix() * gm.row(r).sum();
            t.accumulate(x, gx.template reshaped<Eigen::RowMajor>());
        };
        return y;
    }

    /// Mean over rows of -log_probs[row, label[row]].
    Var nll_loss(Var log_probs, std::span<const int> labels) {
        const auto& lv = value(log_probs);
        if (lv.rank() > 2) throw DimensionError("nll_loss: log_probs " + shape_string(lv.shape()));
        const Index c = lv.shape().back();
        const Index rows = lv.size() / c;
        if (static_cast<Index>(labels.size()) != rows) {
            throw DimensionError("nll_loss: " + std::to_string(labels.size()) + " labels for " +
                                 std::to_string(rows) + " rows");
        }
        std::vector<Index> picks(labels.size());
        Scalar total = 0;
        for (Index r = 0; r < rows; ++r) {
            const int y = labels[static_cast<std::size_t>(r)];
            if (y < 0 || y >= c) {
                throw IndexError("nll_loss: label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
            }
            picks[static_cast<std::size_t>(r)] = r * c + y;
            total -= lv[r * c + y];
        }
        const Scalar inv = Scalar(1) / static_cast<Scalar>(rows);
        return push_op(TensorType::scalar(total * inv), {log_probs},
                       [log_probs, picks = std::move(picks), inv, n = lv.size()](const VectorType& g, Tape& t) {
                           VectorType gl = VectorType::Zero(n);
                           for (Index p : picks) gl[p] -= g[0] * inv;
                           t.accumulate(log_probs, gl);
                       });
    }

    Var nll_loss(Var log_probs, int label) { return nll_loss(log_probs, std::span<const int>(&label, 1)); }

    Var sum(Var x) {
        const auto& xv = value(x);
        return push_op(TensorType::scalar(xv.values().sum()), {x}, [x, n = xv.size()](const VectorType& g, Tape& t) {
            t.accumulate(x, VectorType::Constant(n, g[0]));
        });
    }

    Var square(Var x) {
        const auto& xv = value(x);
        VectorType out = xv.values().array().square();
        return push_op(TensorType(xv.shape(), std::move(out)), {x}, [x](const VectorType& g, Tape& t) {
            VectorType gx = Scalar(2) * t.value(x).values().cwiseProduct(g);
            t.accumulate(x, gx);
        });
    }

    Var add(Var a, Var b) {
        const auto& av = value(a);
        const auto& bv = value(b);
        if (av.shape() != bv.shape()) {
            throw DimensionError("add: " + shape_string(av.shape()) + " + " + shape_string(bv.shape()));
        }
        VectorType out = av.values() + bv.values();
        return push_op(TensorType(av.shape(), std::move(out)), {a, b}, [a, b](const VectorType& g, Tape& t) {
            t.accumulate(a, g);
            t.accumulate(b, g);
        });
    }

    Var scale(Var x, Scalar factor) {
        const auto& xv = value(x);
        VectorType out = xv.values() * factor;
        return push_op(TensorType(xv.shape(), std::move(out)), {x}, [x, factor](const VectorType& g, Tape& t) {
            t.accumulate(x, VectorType(g * factor));
        });
    }

    // ----------------------------------------------------------- backward

    /// Gradient of the scalar `root` with respect to every parameter leaf,
    /// laid out on the flat parameter index. Indices not bound to a leaf on
    /// this tape get 0. Repeated calls recompute from scratch.
    GradientVector<Scalar> backward(Var root) {
        const auto& rv = value(root);
        if (rv.size() != 1) {
            throw ContractError("backward: root must be scalar, got " + shape_string(rv.shape()));
        }
        GradientVector<Scalar> out = GradientVector<Scalar>::Zero(parameter_count_);
        grads_.assign(root.id + 1, VectorType());
        if (!nodes_[root.id].requires_grad) return out;
        grads_[root.id] = VectorType::Ones(1);
        for (std::size_t i = root.id + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (grads_[i].size() == 0) continue;
            if (n.param_offset >= 0) {
                out.segment(n.param_offset, n.value.size()) += grads_[i];
            } else if (n.pullback) {
                n.pullback(grads_[i], *this);
            }
            grads_[i] = VectorType();
        }
        return out;
    }

    /// Sum over batch rows of the squared per-sample gradients of `root`, in
    /// double, on the flat parameter index. `root` must be a sum of
    /// independent per-row terms, and each parameter leaf must feed exactly
    /// one matmul (as right operand), add_bias, conv2d (as kernel) or
    /// add_channel_bias; anything else throws ContractError.
    Vector<double> backward_per_sample_squares(Var root) {
        squares_ = Vector<double>::Zero(parameter_count_);
        square_hits_.assign(nodes_.size(), 0);
        squares_mode_ = true;
        try {
            backward(root);
        } catch (...) {
            squares_mode_ = false;
            throw;
        }
        squares_mode_ = false;
        return std::move(squares_);
    }

    /// Contribution sink used by pullbacks; ignores nodes without grad.
    template <typename Derived>
    void accumulate(Var v, const Eigen::MatrixBase<Derived>& g) {
        auto& n = nodes_[v.id];
        if (!n.requires_grad) return;
        if (squares_mode_ && n.param_offset >= 0 && square_hits_[v.id] == 0) {
            throw ContractError("per-sample squares: parameter leaf " + std::to_string(v.id) +
                                " reached through an op without per-sample support");
        }
        auto& slot = grads_[v.id];
        if (slot.size() == 0) {
            slot = g;
        } else {
            slot += g;
        }
    }

    template <typename Derived>
    void accumulate_squares(Var v, const Eigen::MatrixBase<Derived>& s) {
        const auto& n = nodes_[v.id];
        if (n.param_offset < 0) return;  // only leaves carry per-sample squares
        if (square_hits_[v.id]++ > 0) {
            throw ContractError("per-sample squares: parameter leaf " + std::to_string(v.id) + " used twice");
        }
        squares_.segment(n.param_offset, n.value.size()) += s;
    }

  private:
    using Pullback = std::function<void(const VectorType&, Tape&)>;

    struct Node {
        TensorType value;
        bool requires_grad = false;
        Index param_offset = -1;
        Pullback pullback;
    };

    struct ConvGeometry {
        Index n, in_c, h, w, out_c, kh, kw, stride, padding, out_h, out_w;
        Index in_size() const { return in_c * h * w; }
        Index patch() const { return in_c * kh * kw; }
    };

    static ConvGeometry conv_geometry(const TensorType& xv, const TensorType& kv, Index stride, Index padding) {
        const bool batched = xv.rank() == 4;
        ConvGeometry g{};
        g.n = batched ? xv.dim(0) : 1;
        g.in_c = xv.dim(batched ? 1 : 0);
        g.h = xv.dim(batched ? 2 : 1);
        g.w = xv.dim(batched ? 3 : 2);
        g.out_c = kv.dim(0);
        g.kh = kv.dim(2);
        g.kw = kv.dim(3);
        g.stride = stride;
        g.padding = padding;
        if (kv.dim(1) != g.in_c) {
            throw DimensionError("conv2d: kernel expects " + std::to_string(kv.dim(1)) + " channels, input has " +
                                 std::to_string(g.in_c));
        }
        if (stride <= 0 || padding < 0 || g.kh > g.h + 2 * padding || g.kw > g.w + 2 * padding) {
            throw DimensionError("conv2d: invalid geometry (kernel " + std::to_string(g.kh) + "x" +
                                 std::to_string(g.kw) + ", stride " + std::to_string(stride) + ", padding " +
                                 std::to_string(padding) + ")");
        }
        g.out_h = (g.h + 2 * padding - g.kh) / stride + 1;
        g.out_w = (g.w + 2 * padding - g.kw) / stride + 1;
        return g;
    }

    // Rows: (c, di, dj) patch coordinates. Columns: output pixels.
    static RowMatrix<Scalar> im2col(const Scalar* in, const ConvGeometry& g) {
        RowMatrix<Scalar> col = RowMatrix<Scalar>::Zero(g.patch(), g.out_h * g.out_w);
        for (Index c = 0; c < g.in_c; ++c)
            for (Index di = 0; di < g.kh; ++di)
                for (Index dj = 0; dj < g.kw; ++dj) {
                    const Index row = (c * g.kh + di) * g.kw + dj;
                    for (Index i = 0; i < g.out_h; ++i) {
                        const Index y = i * g.stride + di - g.padding;
                        if (y < 0 || y >= g.h) continue;
                        for (Index j = 0; j < g.out_w; ++j) {
                            const Index x = j * g.stride + dj - g.padding;
                            if (x < 0 || x >= g.w) continue;
                            col(row, i * g.out_w + j) = in[(c * g.h + y) * g.w + x];
                        }
                    }
                }
        return col;
    }

    static void col2im(const RowMatrix<Scalar>& col, Scalar* out, const ConvGeometry& g) {
        for (Index c = 0; c < g.in_c; ++c)
            for (Index di = 0; di < g.kh; ++di)
                for (Index dj = 0; dj < g.kw; ++dj) {
                    const Index row = (c * g.kh + di) * g.kw + dj;
                    for (Index i = 0; i < g.out_h; ++i) {
                        const Index y = i * g.stride + di - g.padding;
                        if (y < 0 || y >= g.h) continue;
                        for (Index j = 0; j < g.out_w; ++j) {
                            const Index x = j * g.stride + dj - g.padding;
                            if (x < 0 || x >= g.w) continue;
                            out[(c * g.h + y) * g.w + x] += col(row, i * g.out_w + j);
                        }
                    }
                }
    }

    static VectorType flat(RowMatrix<Scalar>&& m) { return m.template reshaped<Eigen::RowMajor>(); }

    const Node& node(Var v) const {
        if (v.id >= nodes_.size()) throw ContractError("tape: unknown node " + std::to_string(v.id));
        return nodes_[v.id];
    }

    Var push(TensorType value, bool requires_grad, Pullback pullback) {
        if (check_finite_ && !value.values().allFinite()) {
            throw NumericError("tape: non-finite value in op output " + std::to_string(nodes_.size()));
        }
        nodes_.push_back(Node{std::move(value), requires_grad, -1, std::move(pullback)});
        return Var{nodes_.size() - 1};
    }

    Var push_op(TensorType value, std::initializer_list<Var> inputs, Pullback pullback) {
        bool needs = false;
        for (Var in : inputs) needs = needs || node(in).requires_grad;
        return push(std::move(value), needs, needs ? std::move(pullback) : Pullback());
    }

    Index parameter_count_;
    std::vector<Node> nodes_;
    std::vector<VectorType> grads_;
    bool squares_mode_ = false;
    Vector<double> squares_;
    std::vector<int> square_hits_;
#ifdef NDEBUG
    bool check_finite_ = false;
#else
    bool check_finite_ = true;
#endif
};

}  // namespace deepclean

#endif  // DEEPCLEAN_TAPE_HPP
