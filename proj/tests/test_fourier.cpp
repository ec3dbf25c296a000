#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <vector>

#include "core/fourier.hpp"
#include "core/gradcheck.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"

using namespace fnetae;

namespace {

using Cx = std::complex<double>;

std::vector<Cx> random_signal(int64_t n, Rng& rng) {
    std::vector<Cx> x(static_cast<size_t>(n));
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return x;
}

double max_abs_diff(const std::vector<Cx>& a, const std::vector<Cx>& b) {
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

std::vector<Cx> naive(const std::vector<Cx>& x) {
    std::vector<Cx> out(x.size());
    dft_naive<double>(x, out);
    return out;
}

std::vector<Cx> fast(const std::vector<Cx>& x) {
    std::vector<Cx> out(x.size());
    fft<double>(x, out);
    return out;
}

}  // namespace

TEST_CASE("dft_naive closed forms") {
    CHECK(max_abs_diff(naive({1, 0, 0, 0}), {Cx(1), Cx(1), Cx(1), Cx(1)}) <= 1e-12);
    CHECK(max_abs_diff(naive({1, 1, 1, 1}), {Cx(4), Cx(0), Cx(0), Cx(0)}) <= 1e-12);
    // unit delay: X[n] = exp(-i pi n / 2) = [1, -i, -1, i]
    CHECK(max_abs_diff(naive({0, 1, 0, 0}), {Cx(1, 0), Cx(0, -1), Cx(-1, 0), Cx(0, 1)}) <= 1e-12);
}

TEST_CASE("fft matches the naive oracle") {
    Rng rng(17);
    SUBCASE("power-of-two and Bluestein lengths") {
        for (int64_t n : {1, 2, 3, 4, 5, 7, 8, 12, 16, 31, 64, 150, 256, 1000}) {
            CAPTURE(n);
            auto x = random_signal(n, rng);
            CHECK(max_abs_diff(fast(x), naive(x)) <= 1e-9);
        }
    }
    SUBCASE("zeros map to zeros") {
        std::vector<Cx> zeros(150, Cx(0));
        auto out = fast(zeros);
        for (const auto& v : out) CHECK(std::abs(v) == 0.0);
    }
    SUBCASE("linearity") {
        for (int64_t n : {16, 150}) {
            auto x = random_signal(n, rng);
            auto y = random_signal(n, rng);
            const Cx a(1.3, -0.2), b(-0.7, 0.9);
            std::vector<Cx> mix(x.size());
            for (size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
            auto lhs = fast(mix);
            auto fx = fast(x);
            auto fy = fast(y);
            std::vector<Cx> rhs(x.size());
            for (size_t i = 0; i < x.size(); ++i) rhs[i] = a * fx[i] + b * fy[i];
            CHECK(max_abs_diff(lhs, rhs) <= 1e-9);
        }
    }
    SUBCASE("Parseval identity") {
        for (int64_t n : {8, 150, 256}) {
            auto x = random_signal(n, rng);
            auto spec = fast(x);
            double time_energy = 0, freq_energy = 0;
            for (const auto& v : x) time_energy += std::norm(v);
            for (const auto& v : spec) freq_energy += std::norm(v);
            CHECK(std::abs(time_energy - freq_energy / static_cast<double>(n)) <= 1e-9);
        }
    }
}

TEST_CASE("mixing plan") {
    SUBCASE("strategy selection") {
        CHECK(MixingPlan<float>::make(150).strategy == MixStrategy::matrix);
        CHECK(MixingPlan<float>::make(512).strategy == MixStrategy::matrix);
        CHECK(MixingPlan<float>::make(1024).strategy == MixStrategy::radix2);
        CHECK(MixingPlan<float>::make(1000).strategy == MixStrategy::bluestein);
    }
    SUBCASE("cosine matrix is exactly symmetric with unit first row/column") {
        for (int64_t n : {4, 150}) {
            auto plan = MixingPlan<double>::make(n);
            for (int64_t i = 0; i < n; ++i) {
                CHECK(plan.cosine[i] == 1.0);          // row 0
                CHECK(plan.cosine[i * n] == 1.0);      // column 0
                for (int64_t k = 0; k < n; ++k) CHECK(plan.cosine[i * n + k] == plan.cosine[k * n + i]);
            }
        }
    }
}

TEST_CASE("fourier_mix") {
    SUBCASE("impulse at k=0 spreads to all ones") {
        Tensor<float> x({1, 4, 2});
        x[0] = 1.0f;  // b=0, k=0, e=0
        auto plan = MixingPlan<float>::make(4);
        Tensor<float> y;
        fourier_mix_forward(plan, x, y);
        for (int64_t n = 0; n < 4; ++n) {
            CHECK(y[n * 2 + 0] == doctest::Approx(1.0));
            CHECK(y[n * 2 + 1] == doctest::Approx(0.0));
        }
    }
    SUBCASE("constant sequence concentrates at n=0") {
        Tensor<float> x({1, 4, 1}, std::vector<float>(4, 1.0f));
        auto plan = MixingPlan<float>::make(4);
        Tensor<float> y;
        fourier_mix_forward(plan, x, y);
        CHECK(y[0] == doctest::Approx(4.0));
        for (int64_t n = 1; n < 4; ++n) CHECK(y[n] == doctest::Approx(0.0).epsilon(1e-6));
    }
    SUBCASE("FFT path agrees with the cosine-matrix oracle at 32-bit") {
        Rng rng(23);
        for (int64_t n : {8, 150}) {
            Tensor<float> x({2, n, 3});
            for (float& v : x.flat()) v = static_cast<float>(rng.uniform(-1, 1));
            auto matrix_plan = MixingPlan<float>::make(n, MixStrategy::matrix);
            auto fft_plan = MixingPlan<float>::make(n, (n & (n - 1)) == 0 ? MixStrategy::radix2 : MixStrategy::bluestein);
            Tensor<float> ym, yf;
            fourier_mix_forward(matrix_plan, x, ym);
            fourier_mix_forward(fft_plan, x, yf);
            for (int64_t i = 0; i < ym.numel(); ++i) CHECK(std::abs(ym[i] - yf[i]) <= 1e-5f * std::max(1.0f, std::abs(ym[i])));
        }
    }
    SUBCASE("sequence length mismatch with the plan") {
        auto plan = MixingPlan<float>::make(4);
        Tensor<float> x({1, 5, 2});
        Tensor<float> y;
        CHECK_THROWS_AS(fourier_mix_forward(plan, x, y), std::invalid_argument);
    }
    SUBCASE("gradient is exact up to rounding (linear map)") {
        Rng rng(29);
        auto plan = MixingPlan<double>::make(6);
        Tensor<double> x({1, 6, 2});
        for (double& v : x.flat()) v = rng.uniform(-1, 1);
        Tensor<double> w({1, 6, 2});
        for (double& v : w.flat()) v = rng.uniform(-1, 1);

        Graph<double> g;
        auto xid = g.leaf(x, true);
        auto loss = g.sum(g.mul(g.fourier_mix(xid, plan), g.leaf(w)));
        g.backward(loss);
        const Tensor<double> analytic = g.grad(xid);
        const auto f = [&]() {
            Graph<double> g2;
            return g2.value(g2.sum(g2.mul(g2.fourier_mix(g2.leaf(x), plan), g2.leaf(w))))[0];
        };
        CHECK(grad_check(x, f, analytic) <= 1e-6);
    }
    SUBCASE("FFT-path gradients match matrix-path gradients") {
        Rng rng(31);
        auto mplan = MixingPlan<double>::make(10, MixStrategy::matrix);
        auto bplan = MixingPlan<double>::make(10, MixStrategy::bluestein);
        Tensor<double> x({1, 10, 2});
        for (double& v : x.flat()) v = rng.uniform(-1, 1);
        auto run = [&](const MixingPlan<double>& plan) {
            Graph<double> g;
            auto xid = g.leaf(x, true);
            g.backward(g.sum(g.fourier_mix(xid, plan)));
            return g.grad(xid);
        };
        auto gm = run(mplan);
        auto gb = run(bplan);
        for (int64_t i = 0; i < gm.numel(); ++i) CHECK(gm[i] == doctest::Approx(gb[i]).epsilon(1e-9));
    }
}
