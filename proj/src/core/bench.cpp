#include "core/bench.hpp"

#include <Eigen/Core>

#include <chrono>
#include <stdexcept>

#include "core/fourier.hpp"
#include "core/kernels.hpp"
#include "core/params.hpp"
#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace fnetae {

namespace {

using Clock = std::chrono::steady_clock;
using StridedMap = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>, 0,
                              Eigen::OuterStride<>>;
using StridedMutMap =
    Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>, 0, Eigen::OuterStride<>>;

// Forward-only multi-head self-attention working on head-strided views, so
// the timed region is projections + scores + softmax + context + output.
struct AttentionForward {
    int64_t batch, seq, embed, heads, key;
    Tensor<float> wq, wk, wv, wo;
    Tensor<float> bq, bk, bv, bo;
    Tensor<float> q, k, v, scores, probs, merged;

    AttentionForward(int64_t b, int64_t n, int64_t e, int64_t h, int64_t kd, Rng& rng)
        : batch(b), seq(n), embed(e), heads(h), key(kd) {
        const int64_t hk = h * kd;
        auto kernel = [&](Shape shape) {
            Tensor<float> t(std::move(shape));
            const double bound = std::sqrt(6.0 / static_cast<double>(t.dim(0) + t.dim(1)));
            for (float& x : t.flat()) x = static_cast<float>(rng.uniform(-bound, bound));
            return t;
        };
        wq = kernel({e, hk});
        wk = kernel({e, hk});
        wv = kernel({e, hk});
        wo = kernel({hk, e});
        bq = Tensor<float>({hk});
        bk = Tensor<float>({hk});
        bv = Tensor<float>({hk});
        bo = Tensor<float>({e});
        q = Tensor<float>({b, n, hk});
        k = Tensor<float>({b, n, hk});
        v = Tensor<float>({b, n, hk});
        scores = Tensor<float>({n, n});
        probs = Tensor<float>({n, n});
        merged = Tensor<float>({b, n, hk});
    }

    int64_t param_count() const {
        const int64_t hk = heads * key;
        return 3 * (embed * hk + hk) + hk * embed + embed;
    }

    void project(const Tensor<float>& x, const Tensor<float>& w, const Tensor<float>& bias, Tensor<float>& out) {
        kernels::gemm(x.data(), w.data(), out.data(), batch * seq, embed, heads * key, false, false, false);
        const int64_t hk = heads * key;
        for (int64_t r = 0; r < batch * seq; ++r) {
            float* row = out.data() + r * hk;
            for (int64_t j = 0; j < hk; ++j) row[j] += bias[j];
        }
    }

    void run(const Tensor<float>& x, Tensor<float>& y) {
        project(x, wq, bq, q);
        project(x, wk, bk, k);
        project(x, wv, bv, v);
        const int64_t hk = heads * key;
        const float inv_sqrt = 1.0f / std::sqrt(static_cast<float>(key));
        for (int64_t b = 0; b < batch; ++b) {
            for (int64_t h = 0; h < heads; ++h) {
                const int64_t off = b * seq * hk + h * key;
                StridedMap qh(q.data() + off, seq, key, Eigen::OuterStride<>(hk));
                StridedMap kh(k.data() + off, seq, key, Eigen::OuterStride<>(hk));
                StridedMap vh(v.data() + off, seq, key, Eigen::OuterStride<>(hk));
                kernels::MatMap<float> sc(scores.data(), seq, seq);
                sc.noalias() = (qh * kh.transpose()) * inv_sqrt;
                for (int64_t i = 0; i < seq; ++i)
                    kernels::softmax_row(scores.data() + i * seq, probs.data() + i * seq, seq);
                kernels::ConstMatMap<float> pb(probs.data(), seq, seq);
                StridedMutMap ctx(merged.data() + off, seq, key, Eigen::OuterStride<>(hk));
                ctx.noalias() = pb * vh;
            }
        }
        kernels::gemm(merged.data(), wo.data(), y.data(), batch * seq, hk, embed, false, false, false);
        for (int64_t r = 0; r < batch * seq; ++r) {
            float* row = y.data() + r * embed;
            for (int64_t j = 0; j < embed; ++j) row[j] += bo[j];
        }
    }
};

template <typename F>
std::pair<double, double> time_ms(F&& fn, int32_t reps) {
    for (int i = 0; i < 3; ++i) fn();  // warmup, excluded
    double total = 0, best = 0;
    for (int32_t i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        total += ms;
        best = i == 0 ? ms : std::min(best, ms);
    }
    return {total / reps, best};
}

}  // namespace

std::vector<BenchRow> bench_mixing(const BenchConfig& cfg, std::span<const int32_t> seq_lens) {
    const int32_t key = cfg.key_dim > 0 ? cfg.key_dim : cfg.embed_dim;
    const int32_t reps = std::max(cfg.repetitions, 10);
    Rng rng(cfg.seed);

    std::vector<BenchRow> rows;
    for (int32_t n : seq_lens) {
        if (n < 2) throw std::invalid_argument("bench: sequence lengths must be >= 2");
        Tensor<float> x({cfg.batch, n, cfg.embed_dim});
        for (float& v : x.flat()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
        Tensor<float> y(x.shape());

        const auto plan = MixingPlan<float>::make(n);
        AttentionForward attn(cfg.batch, n, cfg.embed_dim, cfg.num_heads, key, rng);

        BenchRow row;
        row.seq_len = n;
        std::tie(row.mix_mean_ms, row.mix_min_ms) = time_ms([&] { fourier_mix_forward(plan, x, y); }, reps);
        std::tie(row.attn_mean_ms, row.attn_min_ms) = time_ms([&] { attn.run(x, y); }, reps);
        row.mix_params = 0;
        row.attn_params = attn.param_count();
        row.ratio_mean = row.mix_mean_ms > 0 ? row.attn_mean_ms / row.mix_mean_ms : 0;
        row.ratio_min = row.mix_min_ms > 0 ? row.attn_min_ms / row.mix_min_ms : 0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fnetae
