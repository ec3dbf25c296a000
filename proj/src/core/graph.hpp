#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core/fourier.hpp"
#include "core/kernels.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace fnetae {

// Reverse-mode tape. Nodes are appended in evaluation order, which is a
// topological order by construction, so one reverse sweep from the loss
// accumulates every gradient exactly once. A graph serves one forward/backward
// pair and is then discarded.
template <typename T>
class Graph {
public:
    using NodeId = int32_t;

    NodeId leaf(Tensor<T> value, bool needs_grad = false) {
        return push(std::move(value), needs_grad, nullptr);
    }

    const Tensor<T>& value(NodeId id) const { return nodes_[check(id)].value; }

    // Accumulated gradient; zeros if the node never received one.
    const Tensor<T>& grad(NodeId id) {
        Node& n = nodes_[check(id)];
        if (n.grad.empty() && n.value.numel() > 0) n.grad = Tensor<T>(n.value.shape());
        return n.grad;
    }

    size_t size() const { return nodes_.size(); }

    // ---- elementwise ----

    // b may either match a's shape or be a suffix of it (bias / positional
    // table broadcast over the leading dims).
    NodeId add(NodeId a, NodeId b) {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        const int64_t stride = suffix_stride(va, vb, "add");
        Tensor<T> out = va;
        T* o = out.data();
        const T* pb = vb.data();
        const int64_t n = out.numel();
        for (int64_t i = 0; i < n; ++i) o[i] += pb[i % stride];
        return push(std::move(out), needs(a) || needs(b), [this, a, b, stride](NodeId self) {
            const Tensor<T>& g = nodes_[self].grad;
            if (needs(a)) accumulate(a, g.flat());
            if (needs(b)) {
                Tensor<T>& gb = grad_buffer(b);
                const int64_t n = g.numel();
                for (int64_t i = 0; i < n; ++i) gb[i % stride] += g[i];
            }
        });
    }

    NodeId mul(NodeId a, NodeId b) {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        if (!va.same_shape(vb))
            throw std::invalid_argument("mul: shape mismatch " + shape_str(va.shape()) + " vs " + shape_str(vb.shape()));
        Tensor<T> out(va.shape());
        const int64_t n = out.numel();
        for (int64_t i = 0; i < n; ++i) out[i] = va[i] * vb[i];
        return push(std::move(out), needs(a) || needs(b), [this, a, b](NodeId self) {
            const Tensor<T>& g = nodes_[self].grad;
            const int64_t n = g.numel();
            if (needs(a)) {
                Tensor<T>& ga = grad_buffer(a);
                const Tensor<T>& vb = nodes_[b].value;
                for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * vb[i];
            }
            if (needs(b)) {
                Tensor<T>& gb = grad_buffer(b);
                const Tensor<T>& va = nodes_[a].value;
                for (int64_t i = 0; i < n; ++i) gb[i] += g[i] * va[i];
            }
        });
    }

    NodeId scale(NodeId a, T s) {
        Tensor<T> out = value(a);
        for (T& v : out.flat()) v *= s;
        return push(std::move(out), needs(a), [this, a, s](NodeId self) {
            const Tensor<T>& g = nodes_[self].grad;
            Tensor<T>& ga = grad_buffer(a);
            const int64_t n = g.numel();
            for (int64_t i = 0; i < n; ++i) ga[i] += s * g[i];
        });
    }

    NodeId relu(NodeId a) {
        Tensor<T> out = value(a);
        for (T& v : out.flat())
            if (v < T(0)) v = T(0);
        return push(std::move(out), needs(a), [this, a](NodeId self) {
            const Tensor<T>& g = nodes_[self].grad;
            const Tensor<T>& va = nodes_[a].value;
            Tensor<T>& ga = grad_buffer(a);
            const int64_t n = g.numel();
            for (int64_t i = 0; i < n; ++i)
                if (va[i] > T(0)) ga[i] += g[i];  // relu'(0) = 0
        });
    }

    NodeId sigmoid(NodeId a) {
        Tensor<T> out = value(a);
        for (T& v : out.flat()) v = kernels::sigmoid(v);
        return push(std::move(out), needs(a), [this, a](NodeId self) {
            const Tensor<T>& g = nodes_[self].grad;
            const Tensor<T>& y = nodes_[self].value;
            Tensor<T>& ga = grad_buffer(a);
            const int64_t n = g.numel();
            for (int64_t i = 0; i < n; ++i) ga[i] += g[i] * y[i] * (T(1) - y[i]);
        });
    }

    // ---- matrix products ----

    // a: (..., m, k). b: (k, n) shared across the batch, or (..., k, n) with
    // identical leading dims. transpose_b treats b slices as (n, k).
    NodeId matmul(NodeId a, NodeId b, bool transpose_b = false) {
        const Tensor<T>& va = value(a);
        const Tensor<T>& vb = value(b);
        auto fail = [&] {
            throw std::invalid_argument("matmul: incompatible shapes " + shape_str(va.shape()) + " and " +
                                        shape_str(vb.shape()));
        };
        if (va.rank() < 2 || vb.rank() < 2) fail();
        const int64_t m = va.shape()[va.rank() - 2];
        const int64_t k = va.shape()[va.rank() - 1];
        const int64_t bk = vb.shape()[vb.rank() - (transpose_b ? 1 : 2)];
        const int64_t n = vb.shape()[vb.rank() - (transpose_b ? 2 : 1)];
        if (bk != k) fail();
        const bool shared_b = vb.rank() == 2;
        if (!shared_b) {
            if (va.rank() != vb.rank()) fail();
            for (size_t i = 0; i + 2 < va.rank(); ++i)
                if (va.shape()[i] != vb.shape()[i]) fail();
        }
        const int64_t batch = va.numel() / (m * k);

        Shape out_shape(va.shape().begin(), va.shape().end() - 2);
        out_shape.push_back(m);
        out_shape.push_back(n);
        Tensor<T> out(std::move(out_shape));
        for (int64_t g = 0; g < batch; ++g)
            kernels::gemm(va.data() + g * m * k, vb.data() + (shared_b ? 0 : g * k * n), out.data() + g * m * n,
                          m, k, n, false, transpose_b, false);

        return push(std::move(out), needs(a) || needs(b),
                    [this, a, b, m, k, n, batch, shared_b, transpose_b](NodeId self) {
                        const Tensor<T>& g = nodes_[self].grad;
                        const Tensor<T>& va = nodes_[a].value;
                        const Tensor<T>& vb = nodes_[b].value;
                        if (needs(a)) {
                            Tensor<T>& ga = grad_buffer(a);
                            for (int64_t i = 0; i < batch; ++i)
                                kernels::gemm(g.data() + i * m * n, vb.data() + (shared_b ? 0 : i * k * n),
                                              ga.data() + i * m * k, m, n, k, false, !transpose_b, true);
                        }
                        if (needs(b)) {
                            Tensor<T>& gb = grad_buffer(b);
                            for (int64_t i = 0; i < batch; ++i) {
                                const int64_t off = shared_b ? 0 : i * k * n;
                                if (transpose_b)
                                    kernels::gemm(g.data() + i * m * n, va.data() + i * m * k, gb.data() + off,
                                                  n, m, k, true, false, true);
                                else
                                    kernels::gemm(va.data() + i * m * k, g.data() + i * m * n, gb.data() + off,
                                                  k, m, n, true, false, true);
                            }
                        }
                    });
    }

    // ---- shape ----

    NodeId reshape(NodeId a, Shape shape) {
        Tensor<T> out = value(a).reshaped(std::move(shape));
        return push(std::move(out), needs(a), [this, a](NodeId self) {
            if (needs(a)) accumulate(a, nodes_[self].grad.flat());
        });
    }

    // (A,B,C,D) -> (A,C,B,D); used to split/merge attention heads.
    NodeId swap_mid_axes(NodeId x) {
        const Tensor<T>& v = value(x);
        if (v.rank() != 4) throw std::invalid_argument("swap_mid_axes: expected rank 4, got " + shape_str(v.shape()));
        const int64_t d0 = v.dim(0), d1 = v.dim(1), d2 = v.dim(2), d3 = v.dim(3);
        Tensor<T> out({d0, d2, d1, d3});
        permute_0213(v.data(), out.data(), d0, d1, d2, d3);
        return push(std::move(out), needs(x), [this, x, d0, d1, d2, d3](NodeId self) {
            if (!needs(x)) return;
            const Tensor<T>& g = nodes_[self].grad;
            Tensor<T> tmp({d0, d1, d2, d3});
            permute_0213(g.data(), tmp.data(), d0, d2, d1, d3);
            accumulate(x, tmp.flat());
        });
    }

    // ---- lookups ----

    // Row gather from table (V, E); ids_shape gives the leading output dims.
    NodeId embedding(NodeId table, std::vector<int32_t> ids, Shape ids_shape) {
        const Tensor<T>& tab = value(table);
        if (tab.rank() != 2) throw std::invalid_argument("embedding: table must be (V, E)");
        const int64_t v = tab.dim(0), e = tab.dim(1);
        if (shape_numel(ids_shape) != static_cast<int64_t>(ids.size()))
            throw std::invalid_argument("embedding: ids shape mismatch");
        for (int32_t id : ids)
            if (id < 0 || id >= v)
                throw std::out_of_range("embedding: id " + std::to_string(id) + " out of range for table rows " +
                                        std::to_string(v));
        Shape out_shape = ids_shape;
        out_shape.push_back(e);
        Tensor<T> out(std::move(out_shape));
        for (size_t i = 0; i < ids.size(); ++i)
            std::copy_n(tab.data() + static_cast<int64_t>(ids[i]) * e, e, out.data() + static_cast<int64_t>(i) * e);
        return push(std::move(out), needs(table), [this, table, ids = std::move(ids), e](NodeId self) {
            if (!needs(table)) return;
            const Tensor<T>& g = nodes_[self].grad;
            Tensor<T>& gt = grad_buffer(table);
            // duplicated ids scatter-add into the same row
            for (size_t i = 0; i < ids.size(); ++i) {
                const T* src = g.data() + static_cast<int64_t>(i) * e;
                T* dst = gt.data() + static_cast<int64_t>(ids[i]) * e;
                for (int64_t j = 0; j < e; ++j) dst[j] += src[j];
            }
        });
    }

    // ---- normalization / activations over rows ----

    NodeId softmax_lastdim(NodeId x, bool causal = false) {
        const Tensor<T>& v = value(x);
        if (v.rank() < 2) throw std::invalid_argument("softmax: rank >= 2 required, got " + shape_str(v.shape()));
        const int64_t cols = v.shape()[v.rank() - 1];
        const int64_t rows_per_block = v.shape()[v.rank() - 2];
        if (causal && rows_per_block != cols)
            throw std::invalid_argument("causal softmax: last two dims must match, got " + shape_str(v.shape()));
        const int64_t rows = v.numel() / cols;
        Tensor<T> out(v.shape());
        for (int64_t r = 0; r < rows; ++r) {
            const T* in = v.data() + r * cols;
            T* o = out.data() + r * cols;
            // row i of a causal block sees columns 0..i only; the rest stay
            // exactly zero, which keeps autoregressive masking bitwise strict.
            const int64_t allowed = causal ? (r % rows_per_block) + 1 : cols;
            kernels::softmax_row(in, o, allowed);
            for (int64_t j = allowed; j < cols; ++j) o[j] = T(0);
        }
        return push(std::move(out), needs(x), [this, x, cols, rows_per_block, causal](NodeId self) {
            if (!needs(x)) return;
            const Tensor<T>& g = nodes_[self].grad;
            const Tensor<T>& y = nodes_[self].value;
            Tensor<T>& gx = grad_buffer(x);
            const int64_t rows = g.numel() / cols;
            for (int64_t r = 0; r < rows; ++r) {
                const int64_t allowed = causal ? (r % rows_per_block) + 1 : cols;
                const T* gr = g.data() + r * cols;
                const T* yr = y.data() + r * cols;
                T* o = gx.data() + r * cols;
                T dot = 0;
                for (int64_t j = 0; j < allowed; ++j) dot += gr[j] * yr[j];
                for (int64_t j = 0; j < allowed; ++j) o[j] += yr[j] * (gr[j] - dot);
            }
        });
    }

    // Standardize over the last dim, then scale/shift: y = gamma*xhat + beta
    // with xhat = (x - mean) / sqrt(var + eps), biased variance.
    NodeId layer_norm(NodeId x, NodeId gamma, NodeId beta, T eps) {
        const Tensor<T>& v = value(x);
        const Tensor<T>& vg = value(gamma);
        const Tensor<T>& vb = value(beta);
        if (v.rank() < 1 || v.shape().back() == 0)
            throw std::invalid_argument("layer_norm: empty last dimension in " + shape_str(v.shape()));
        const int64_t n = v.shape().back();
        if (vg.numel() != n || vb.numel() != n)
            throw std::invalid_argument("layer_norm: gamma/beta must match last dim " + std::to_string(n));
        const int64_t rows = v.numel() / n;

        auto xhat = std::make_shared<Tensor<T>>(v.shape());
        auto inv_std = std::make_shared<std::vector<T>>(static_cast<size_t>(rows));
        Tensor<T> out(v.shape());
        for (int64_t r = 0; r < rows; ++r) {
            const T* in = v.data() + r * n;
            T mean = 0;
            for (int64_t j = 0; j < n; ++j) mean += in[j];
            mean /= static_cast<T>(n);
            T var = 0;
            for (int64_t j = 0; j < n; ++j) {
                const T d = in[j] - mean;
                var += d * d;
            }
            var /= static_cast<T>(n);
            const T istd = T(1) / std::sqrt(var + eps);
            (*inv_std)[static_cast<size_t>(r)] = istd;
            T* xh = xhat->data() + r * n;
            T* o = out.data() + r * n;
            for (int64_t j = 0; j < n; ++j) {
                xh[j] = (in[j] - mean) * istd;
                o[j] = vg[j] * xh[j] + vb[j];
            }
        }
        return push(std::move(out), needs(x) || needs(gamma) || needs(beta),
                    [this, x, gamma, beta, n, rows, xhat, inv_std](NodeId self) {
                        const Tensor<T>& g = nodes_[self].grad;
                        const Tensor<T>& vg = nodes_[gamma].value;
                        for (int64_t r = 0; r < rows; ++r) {
                            const T* gr = g.data() + r * n;
                            const T* xh = xhat->data() + r * n;
                            if (needs(gamma)) {
                                Tensor<T>& gg = grad_buffer(gamma);
                                for (int64_t j = 0; j < n; ++j) gg[j] += gr[j] * xh[j];
                            }
                            if (needs(beta)) {
                                Tensor<T>& gb = grad_buffer(beta);
                                for (int64_t j = 0; j < n; ++j) gb[j] += gr[j];
                            }
                            if (needs(x)) {
                                Tensor<T>& gx = grad_buffer(x);
                                T* o = gx.data() + r * n;
                                const T istd = (*inv_std)[static_cast<size_t>(r)];
                                T sum_d = 0, sum_dx = 0;
                                for (int64_t j = 0; j < n; ++j) {
                                    const T d = gr[j] * vg[j];
                                    sum_d += d;
                                    sum_dx += d * xh[j];
                                }
                                const T inv_n = T(1) / static_cast<T>(n);
                                for (int64_t j = 0; j < n; ++j) {
                                    const T d = gr[j] * vg[j];
                                    o[j] += istd * (d - inv_n * sum_d - xh[j] * inv_n * sum_dx);
                                }
                            }
                        }
                    });
    }

    // ---- Fourier mixing ----

    // Parameter-free; the map is self-adjoint so the backward pass reuses the
    // forward kernel on the incoming gradients.
    NodeId fourier_mix(NodeId x, const MixingPlan<T>& plan) {
        Tensor<T> out;
        fourier_mix_forward(plan, value(x), out);
        return push(std::move(out), needs(x), [this, x, &plan](NodeId self) {
            if (!needs(x)) return;
            Tensor<T> gx;
            fourier_mix_forward(plan, nodes_[self].grad, gx);
            accumulate(x, gx.flat());
        });
    }

    // ---- regularization ----

    // Inverted dropout; identity (and no rng consumption) when inactive.
    NodeId dropout(NodeId x, T rate, Rng* rng, bool active) {
        if (!active || rate <= T(0)) return x;
        if (rate >= T(1)) throw std::invalid_argument("dropout: rate must be < 1");
        if (rng == nullptr) throw std::invalid_argument("dropout: rng required in training mode");
        const Tensor<T>& v = value(x);
        const T keep = T(1) - rate;
        const T inv_keep = T(1) / keep;
        auto mask = std::make_shared<std::vector<T>>(static_cast<size_t>(v.numel()));
        Tensor<T> out(v.shape());
        for (int64_t i = 0; i < v.numel(); ++i) {
            const T m = rng->uniform() < static_cast<double>(keep) ? inv_keep : T(0);
            (*mask)[static_cast<size_t>(i)] = m;
            out[i] = v[i] * m;
        }
        return push(std::move(out), needs(x), [this, x, mask](NodeId self) {
            if (!needs(x)) return;
            const Tensor<T>& g = nodes_[self].grad;
            Tensor<T>& gx = grad_buffer(x);
            for (int64_t i = 0; i < g.numel(); ++i) gx[i] += g[i] * (*mask)[static_cast<size_t>(i)];
        });
    }

    // ---- reductions ----

    NodeId sum(NodeId a) {
        const Tensor<T>& v = value(a);
        T total = 0;
        for (const T& x : v.flat()) total += x;
        return push(Tensor<T>::scalar(total), needs(a), [this, a](NodeId self) {
            if (!needs(a)) return;
            const T g = nodes_[self].grad[0];
            Tensor<T>& ga = grad_buffer(a);
            for (T& x : ga.flat()) x += g;
        });
    }

    // Mean over all rows of -log softmax(logits)[target]. Rows are the
    // leading dims flattened; width is the last dim. Softmax is recomputed in
    // the backward pass instead of being cached.
    NodeId cross_entropy(NodeId logits, std::vector<int32_t> targets) {
        const Tensor<T>& v = value(logits);
        if (v.rank() < 2) throw std::invalid_argument("cross_entropy: logits rank must be >= 2");
        const int64_t vocab = v.shape().back();
        const double total = kernels::cross_entropy_total(v, targets, vocab);
        const int64_t rows = v.numel() / vocab;
        Tensor<T> out = Tensor<T>::scalar(static_cast<T>(total / static_cast<double>(rows)));
        return push(std::move(out), needs(logits), [this, logits, targets = std::move(targets), vocab, rows](NodeId self) {
            if (!needs(logits)) return;
            const T g = nodes_[self].grad[0];
            const T w = g / static_cast<T>(rows);
            const Tensor<T>& z = nodes_[logits].value;
            Tensor<T>& gz = grad_buffer(logits);
            std::vector<T> prob(static_cast<size_t>(vocab));
            for (int64_t r = 0; r < rows; ++r) {
                const T* zr = z.data() + r * vocab;
                T* o = gz.data() + r * vocab;
                kernels::softmax_row(zr, prob.data(), vocab);
                for (int64_t j = 0; j < vocab; ++j) o[j] += w * prob[static_cast<size_t>(j)];
                o[targets[static_cast<size_t>(r)]] -= w;
            }
        });
    }

    // Reverse sweep from a scalar loss node.
    void backward(NodeId loss) {
        Node& l = nodes_[check(loss)];
        if (l.value.numel() != 1) throw std::invalid_argument("backward: loss must be scalar, got " + shape_str(l.value.shape()));
        grad_buffer(loss)[0] = T(1);
        for (NodeId i = loss; i >= 0; --i) {
            Node& n = nodes_[static_cast<size_t>(i)];
            if (n.back && !n.grad.empty()) n.back(i);
        }
    }

private:
    struct Node {
        Tensor<T> value;
        Tensor<T> grad;
        bool needs_grad = false;
        std::function<void(NodeId)> back;
    };

    size_t check(NodeId id) const {
        if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) throw std::out_of_range("graph: bad node id");
        return static_cast<size_t>(id);
    }

    bool needs(NodeId id) const { return nodes_[check(id)].needs_grad; }

    Tensor<T>& grad_buffer(NodeId id) {
        Node& n = nodes_[check(id)];
        if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
        return n.grad;
    }

    void accumulate(NodeId id, std::span<const T> g) {
        Tensor<T>& dst = grad_buffer(id);
        for (size_t i = 0; i < g.size(); ++i) dst[static_cast<int64_t>(i)] += g[i];
    }

    template <typename F>
    NodeId push(Tensor<T> value, bool needs_grad, F&& back) {
        Node n;
        n.value = std::move(value);
        n.needs_grad = needs_grad;
        if constexpr (!std::is_same_v<std::decay_t<F>, std::nullptr_t>) {
            if (needs_grad) n.back = std::forward<F>(back);
        }
        nodes_.push_back(std::move(n));
        return static_cast<NodeId>(nodes_.size() - 1);
    }

    static int64_t suffix_stride(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
        if (b.rank() > a.rank() || b.numel() == 0 || a.numel() % b.numel() != 0)
            throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                                        shape_str(b.shape()));
        const size_t off = a.rank() - b.rank();
        for (size_t i = 0; i < b.rank(); ++i)
            if (a.shape()[off + i] != b.shape()[i])
                throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                                            shape_str(b.shape()));
        return b.numel();
    }

    static void permute_0213(const T* in, T* out, int64_t d0, int64_t d1, int64_t d2, int64_t d3) {
        for (int64_t a = 0; a < d0; ++a)
            for (int64_t b = 0; b < d1; ++b)
                for (int64_t c = 0; c < d2; ++c) {
                    const T* src = in + ((a * d1 + b) * d2 + c) * d3;
                    T* dst = out + ((a * d2 + c) * d1 + b) * d3;
                    std::copy_n(src, d3, dst);
                }
    }

    std::deque<Node> nodes_;  // deque: references stay valid as nodes are appended
};

}  // namespace fnetae
