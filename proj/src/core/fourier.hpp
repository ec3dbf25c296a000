#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core/kernels.hpp"
#include "core/tensor.hpp"

namespace fnetae {

// Unnormalized forward transform: X[n] = sum_k x[k] * exp(-2*pi*i*n*k/N).
// The O(N^2) evaluation is kept as the correctness oracle for the fast path.
template <typename T>
void dft_naive(std::span<const std::complex<T>> in, std::span<std::complex<T>> out) {
    const int64_t n = static_cast<int64_t>(in.size());
    if (n < 1) throw std::invalid_argument("dft_naive: empty input");
    if (out.size() != in.size()) throw std::invalid_argument("dft_naive: output size mismatch");
    // exp table indexed by (j*k) mod n keeps the twiddle arguments small.
    std::vector<std::complex<T>> w(static_cast<size_t>(n));
    for (int64_t m = 0; m < n; ++m) {
        const double arg = -2.0 * std::numbers::pi * static_cast<double>(m) / static_cast<double>(n);
        w[static_cast<size_t>(m)] = {static_cast<T>(std::cos(arg)), static_cast<T>(std::sin(arg))};
    }
    for (int64_t j = 0; j < n; ++j) {
        std::complex<T> acc{};
        for (int64_t k = 0; k < n; ++k) acc += in[static_cast<size_t>(k)] * w[static_cast<size_t>((j * k) % n)];
        out[static_cast<size_t>(j)] = acc;
    }
}

namespace detail {

// Iterative radix-2 Cooley-Tukey, in place. No normalization on either
// direction; callers scale when they need the inverse.
template <typename T>
void fft_pow2_inplace(std::span<std::complex<T>> a, bool inverse) {
    const size_t n = a.size();
    if (n < 2) return;
    if ((n & (n - 1)) != 0) throw std::invalid_argument("fft_pow2: length is not a power of two");

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        for (size_t i = 0; i < n; i += len) {
            for (size_t j = 0; j < len / 2; ++j) {
                const double arg = ang * static_cast<double>(j);
                const std::complex<T> w{static_cast<T>(std::cos(arg)), static_cast<T>(std::sin(arg))};
                const std::complex<T> u = a[i + j];
                const std::complex<T> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
}

inline size_t next_pow2(size_t n) {
    return std::bit_ceil(n);
}

// Bluestein's chirp-z trick: an arbitrary-length DFT becomes a circular
// convolution evaluated with padded power-of-two transforms. Chirp arguments
// are reduced mod 2N before the trig call so long sequences stay accurate.
template <typename T>
void fft_bluestein(std::span<const std::complex<T>> in, std::span<std::complex<T>> out) {
    const int64_t n = static_cast<int64_t>(in.size());
    const size_t m = next_pow2(static_cast<size_t>(2 * n - 1));

    std::vector<std::complex<T>> chirp(static_cast<size_t>(n));
    for (int64_t k = 0; k < n; ++k) {
        const int64_t r = (k * k) % (2 * n);
        const double arg = -std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
        chirp[static_cast<size_t>(k)] = {static_cast<T>(std::cos(arg)), static_cast<T>(std::sin(arg))};
    }

    std::vector<std::complex<T>> a(m), b(m);
    for (int64_t k = 0; k < n; ++k) a[static_cast<size_t>(k)] = in[static_cast<size_t>(k)] * chirp[static_cast<size_t>(k)];
    b[0] = std::conj(chirp[0]);
    for (int64_t k = 1; k < n; ++k) {
        const std::complex<T> c = std::conj(chirp[static_cast<size_t>(k)]);
        b[static_cast<size_t>(k)] = c;
        b[m - static_cast<size_t>(k)] = c;
    }

    fft_pow2_inplace<T>(a, false);
    fft_pow2_inplace<T>(b, false);
    for (size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2_inplace<T>(a, true);

    const T scale = T(1) / static_cast<T>(m);
    for (int64_t k = 0; k < n; ++k)
        out[static_cast<size_t>(k)] = a[static_cast<size_t>(k)] * scale * chirp[static_cast<size_t>(k)];
}

}  // namespace detail

// Fast transform for any N >= 1: radix-2 when N is a power of two, Bluestein
// otherwise. Matches dft_naive to ~1e-9 absolute at 64-bit for N <= 4096.
template <typename T>
void fft(std::span<const std::complex<T>> in, std::span<std::complex<T>> out) {
    const size_t n = in.size();
    if (n < 1) throw std::invalid_argument("fft: empty input");
    if (out.size() != n) throw std::invalid_argument("fft: output size mismatch");
    if (n == 1) {
        out[0] = in[0];
        return;
    }
    if ((n & (n - 1)) == 0) {
        std::copy(in.begin(), in.end(), out.begin());
        detail::fft_pow2_inplace<T>(out, false);
    } else {
        detail::fft_bluestein<T>(in, out);
    }
}

enum class MixStrategy { radix2, bluestein, matrix };

// Precomputed state for Fourier token mixing along a sequence of length N.
// The cosine matrix C[n][k] = cos(2*pi*n*k/N) doubles as the small-N fast
// path and as the oracle for the FFT path; it is exactly symmetric because
// entry (n,k) and (k,n) evaluate the same reduced argument.
template <typename T>
struct MixingPlan {
    int64_t seq_len = 0;
    MixStrategy strategy = MixStrategy::matrix;
    Tensor<T> cosine;  // (N, N)

    static MixingPlan make(int64_t n, std::optional<MixStrategy> force = std::nullopt) {
        if (n < 1) throw std::invalid_argument("MixingPlan: sequence length must be >= 1");
        MixingPlan plan;
        plan.seq_len = n;
        if (force) {
            plan.strategy = *force;
        } else if (n <= 512) {
            plan.strategy = MixStrategy::matrix;
        } else if ((n & (n - 1)) == 0) {
            plan.strategy = MixStrategy::radix2;
        } else {
            plan.strategy = MixStrategy::bluestein;
        }
        plan.cosine = Tensor<T>({n, n});
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t k = 0; k < n; ++k) {
                const int64_t r = (i * k) % n;
                plan.cosine[i * n + k] =
                    static_cast<T>(std::cos(2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(n)));
            }
        }
        return plan;
    }
};

// y[b,n,e] = Re(sum_k x[b,k,e] * exp(-2*pi*i*n*k/N)) = sum_k C[n,k] x[b,k,e].
// The map is linear and self-adjoint (C = C^T), so the same routine also
// propagates gradients.
template <typename T>
void fourier_mix_forward(const MixingPlan<T>& plan, const Tensor<T>& x, Tensor<T>& y) {
    if (x.rank() != 3) throw std::invalid_argument("fourier_mix: expected (batch, seq, embed), got " + shape_str(x.shape()));
    const int64_t batch = x.dim(0), n = x.dim(1), embed = x.dim(2);
    if (n != plan.seq_len)
        throw std::invalid_argument("fourier_mix: sequence length " + std::to_string(n) + " does not match plan " +
                                    std::to_string(plan.seq_len));
    if (!y.same_shape(x)) y = Tensor<T>(x.shape());

    if (plan.strategy == MixStrategy::matrix) {
        for (int64_t b = 0; b < batch; ++b)
            kernels::gemm(plan.cosine.data(), x.data() + b * n * embed, y.data() + b * n * embed, n, n, embed,
                          false, false, false);
        return;
    }

    std::vector<std::complex<T>> seq(static_cast<size_t>(n)), spec(static_cast<size_t>(n));
    for (int64_t b = 0; b < batch; ++b) {
        const T* xb = x.data() + b * n * embed;
        T* yb = y.data() + b * n * embed;
        for (int64_t e = 0; e < embed; ++e) {
            for (int64_t k = 0; k < n; ++k) seq[static_cast<size_t>(k)] = {xb[k * embed + e], T(0)};
            fft<T>(seq, spec);
            for (int64_t k = 0; k < n; ++k) yb[k * embed + e] = spec[static_cast<size_t>(k)].real();
        }
    }
}

}  // namespace fnetae
