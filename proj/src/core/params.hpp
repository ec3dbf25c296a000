#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/rng.hpp"
#include "core/tensor.hpp"

namespace fnetae {

enum class InitKind {
    glorot_uniform,   // dense kernels: U(-b, b), b = sqrt(6 / (fan_in + fan_out))
    uniform_embedding,  // U(-0.05, 0.05)
    ones,             // norm scales
    zeros,            // norm shifts, biases
};

struct ParamSpec {
    std::string name;
    Shape shape;
    InitKind init;
};

// Named trainable tensors in a fixed registration order; the order drives
// both deterministic initialization and the checkpoint layout.
template <typename T>
class ParamStore {
public:
    void add(std::string name, Tensor<T> tensor) {
        if (tensors_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
        order_.push_back(name);
        tensors_.emplace(std::move(name), std::move(tensor));
    }

    bool contains(const std::string& name) const { return tensors_.count(name) != 0; }

    Tensor<T>& at(const std::string& name) {
        auto it = tensors_.find(name);
        if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
        return it->second;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = tensors_.find(name);
        if (it == tensors_.end()) throw std::out_of_range("unknown parameter: " + name);
        return it->second;
    }

    const std::vector<std::string>& names() const { return order_; }
    size_t size() const { return order_.size(); }

    int64_t scalar_count() const {
        int64_t n = 0;
        for (const auto& name : order_) n += tensors_.at(name).numel();
        return n;
    }

    bool operator==(const ParamStore& other) const {
        if (order_ != other.order_) return false;
        for (const auto& name : order_)
            if (!(tensors_.at(name) == other.tensors_.at(name))) return false;
        return true;
    }

private:
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor<T>> tensors_;
};

// Deterministic per seed: tensors are filled in spec order, row-major.
template <typename T>
ParamStore<T> init_params(const std::vector<ParamSpec>& specs, Rng& rng) {
    ParamStore<T> store;
    for (const auto& spec : specs) {
        Tensor<T> t(spec.shape);
        switch (spec.init) {
            case InitKind::glorot_uniform: {
                if (spec.shape.size() < 2)
                    throw std::invalid_argument("glorot init needs a rank >= 2 kernel: " + spec.name);
                const double fan_in = static_cast<double>(spec.shape[spec.shape.size() - 2]);
                const double fan_out = static_cast<double>(spec.shape.back());
                const double bound = std::sqrt(6.0 / (fan_in + fan_out));
                for (T& v : t.flat()) v = static_cast<T>(rng.uniform(-bound, bound));
                break;
            }
            case InitKind::uniform_embedding:
                for (T& v : t.flat()) v = static_cast<T>(rng.uniform(-0.05, 0.05));
                break;
            case InitKind::ones:
                for (T& v : t.flat()) v = T(1);
                break;
            case InitKind::zeros:
                break;
        }
        store.add(spec.name, std::move(t));
    }
    return store;
}

struct AdamHyper {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

// Adam with bias correction. Moments live here, keyed like the parameters;
// the step counter is incremented once per update call, before correction.
template <typename T>
class Adam {
public:
    explicit Adam(AdamHyper hyper = {}) : hyper_(hyper) {}

    const AdamHyper& hyper() const { return hyper_; }
    void set_hyper(const AdamHyper& h) { hyper_ = h; }
    int64_t step_count() const { return step_; }

    // grads may omit parameters; missing entries are treated as zero
    // gradients (the moments still decay).
    void step(ParamStore<T>& params, const std::unordered_map<std::string, const Tensor<T>*>& grads) {
        ensure_state(params);
        ++step_;
        const T b1 = static_cast<T>(hyper_.beta1);
        const T b2 = static_cast<T>(hyper_.beta2);
        const T lr = static_cast<T>(hyper_.learning_rate);
        const T eps = static_cast<T>(hyper_.eps);
        const T c1 = T(1) - static_cast<T>(std::pow(hyper_.beta1, static_cast<double>(step_)));
        const T c2 = T(1) - static_cast<T>(std::pow(hyper_.beta2, static_cast<double>(step_)));
        for (const auto& name : params.names()) {
            Tensor<T>& p = params.at(name);
            Moments& mo = state_.at(name);
            const auto it = grads.find(name);
            const Tensor<T>* g = it == grads.end() ? nullptr : it->second;
            if (g && !g->same_shape(p))
                throw std::invalid_argument("adam: gradient shape " + shape_str(g->shape()) +
                                            " does not match parameter " + name + " " + shape_str(p.shape()));
            const int64_t n = p.numel();
            for (int64_t i = 0; i < n; ++i) {
                const T gi = g ? (*g)[i] : T(0);
                mo.m[i] = b1 * mo.m[i] + (T(1) - b1) * gi;
                mo.v[i] = b2 * mo.v[i] + (T(1) - b2) * gi * gi;
                const T mhat = mo.m[i] / c1;
                const T vhat = mo.v[i] / c2;
                p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    // Serialized alongside the parameters in checkpoints.
    const Tensor<T>& first_moment(const std::string& name) const { return state_.at(name).m; }
    const Tensor<T>& second_moment(const std::string& name) const { return state_.at(name).v; }
    void restore(const std::string& name, Tensor<T> m, Tensor<T> v) {
        state_[name] = Moments{std::move(m), std::move(v)};
    }
    void set_step_count(int64_t s) { step_ = s; }
    bool has_state(const std::string& name) const { return state_.count(name) != 0; }

    void ensure_state(const ParamStore<T>& params) {
        for (const auto& name : params.names()) {
            auto it = state_.find(name);
            if (it == state_.end()) {
                state_.emplace(name, Moments{Tensor<T>(params.at(name).shape()), Tensor<T>(params.at(name).shape())});
            } else if (!it->second.m.same_shape(params.at(name))) {
                throw std::invalid_argument("adam: state shape mismatch for " + name);
            }
        }
    }

private:
    struct Moments {
        Tensor<T> m, v;
    };

    AdamHyper hyper_;
    int64_t step_ = 0;
    std::unordered_map<std::string, Moments> state_;
};

}  // namespace fnetae
