#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include "core/tensor.hpp"

// Low-level numeric routines shared by the autodiff graph, the benchmark and
// the metrics code. Matrix products are delegated to Eigen; everything else
// is plain loops.
namespace fnetae::kernels {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// C (+)= A(m,k) · B(k,n), optionally transposing either operand in place.
template <typename T>
void gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n, bool trans_a, bool trans_b,
          bool accumulate) {
    ConstMatMap<T> ma(a, trans_a ? k : m, trans_a ? m : k);
    ConstMatMap<T> mb(b, trans_b ? n : k, trans_b ? k : n);
    MatMap<T> mc(c, m, n);
    if (!trans_a && !trans_b) {
        if (accumulate) mc.noalias() += ma * mb;
        else mc.noalias() = ma * mb;
    } else if (!trans_a && trans_b) {
        if (accumulate) mc.noalias() += ma * mb.transpose();
        else mc.noalias() = ma * mb.transpose();
    } else if (trans_a && !trans_b) {
        if (accumulate) mc.noalias() += ma.transpose() * mb;
        else mc.noalias() = ma.transpose() * mb;
    } else {
        if (accumulate) mc.noalias() += ma.transpose() * mb.transpose();
        else mc.noalias() = ma.transpose() * mb.transpose();
    }
}

template <typename T>
T sigmoid(T z) {
    if (z >= T(0)) return T(1) / (T(1) + std::exp(-z));
    const T e = std::exp(z);
    return e / (T(1) + e);
}

// Numerically stabilized softmax of one contiguous row.
template <typename T>
void softmax_row(const T* in, T* out, int64_t n) {
    T m = in[0];
    for (int64_t i = 1; i < n; ++i) m = std::max(m, in[i]);
    T sum = 0;
    for (int64_t i = 0; i < n; ++i) {
        out[i] = std::exp(in[i] - m);
        sum += out[i];
    }
    const T inv = T(1) / sum;
    for (int64_t i = 0; i < n; ++i) out[i] *= inv;
}

// Softmax along an arbitrary axis (strided rows).
template <typename T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
    const int rank = static_cast<int>(x.rank());
    if (rank == 0) throw std::invalid_argument("softmax: scalar input");
    if (axis < 0) axis += rank;
    if (axis < 0 || axis >= rank) throw std::invalid_argument("softmax: axis out of range");
    const int64_t n = x.shape()[static_cast<size_t>(axis)];
    int64_t inner = 1, outer = 1;
    for (int i = axis + 1; i < rank; ++i) inner *= x.shape()[static_cast<size_t>(i)];
    for (int i = 0; i < axis; ++i) outer *= x.shape()[static_cast<size_t>(i)];

    Tensor<T> y(x.shape());
    std::vector<T> row(static_cast<size_t>(n)), srow(static_cast<size_t>(n));
    for (int64_t o = 0; o < outer; ++o) {
        for (int64_t in_i = 0; in_i < inner; ++in_i) {
            const int64_t base = o * n * inner + in_i;
            for (int64_t i = 0; i < n; ++i) row[static_cast<size_t>(i)] = x[base + i * inner];
            softmax_row(row.data(), srow.data(), n);
            for (int64_t i = 0; i < n; ++i) y[base + i * inner] = srow[static_cast<size_t>(i)];
        }
    }
    return y;
}

// log(sum(exp(row))) with max subtraction; accumulation in double.
template <typename T>
double logsumexp_row(const T* z, int64_t n) {
    T m = z[0];
    for (int64_t i = 1; i < n; ++i) m = std::max(m, z[i]);
    double sum = 0;
    for (int64_t i = 0; i < n; ++i) sum += std::exp(static_cast<double>(z[i]) - static_cast<double>(m));
    return static_cast<double>(m) + std::log(sum);
}

// Index of the row maximum, ties resolved to the lowest index.
template <typename T>
int64_t argmax_row(const T* z, int64_t n) {
    int64_t best = 0;
    for (int64_t i = 1; i < n; ++i)
        if (z[i] > z[best]) best = i;
    return best;
}

// Mean cross-entropy from logits over rows of width `vocab`; `targets` holds
// one class id per row. Returns the total (not yet divided) in double.
template <typename T>
double cross_entropy_total(const Tensor<T>& logits, std::span<const int32_t> targets, int64_t vocab) {
    const int64_t rows = logits.numel() / vocab;
    if (static_cast<int64_t>(targets.size()) != rows)
        throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(rows) + " rows");
    double total = 0;
    for (int64_t r = 0; r < rows; ++r) {
        const int32_t t = targets[static_cast<size_t>(r)];
        if (t < 0 || t >= vocab)
            throw std::out_of_range("cross_entropy: target " + std::to_string(t) + " out of range for vocab " +
                                    std::to_string(vocab));
        const T* z = logits.data() + r * vocab;
        total += logsumexp_row(z, vocab) - static_cast<double>(z[t]);
    }
    return total;
}

}  // namespace fnetae::kernels
