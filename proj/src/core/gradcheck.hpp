#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "core/tensor.hpp"

namespace fnetae {

// Central-difference gradient verification. `f` evaluates the scalar loss at
// the current contents of `x`; `analytic` is the gradient produced by the
// backward pass. Returns max over coordinates of |a - n| / max(1, |a|, |n|).
// Only meaningful at 64-bit precision.
inline double grad_check(Tensor<double>& x, const std::function<double()>& f, const Tensor<double>& analytic,
                         double h = 1e-5) {
    double worst = 0;
    for (int64_t i = 0; i < x.numel(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double fp = f();
        x[i] = saved - h;
        const double fm = f();
        x[i] = saved;
        const double numeric = (fp - fm) / (2 * h);
        const double a = analytic[i];
        const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace fnetae
