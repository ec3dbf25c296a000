#pragma once

#include <cstdint>
#include <span>

#include "core/tensor.hpp"

namespace fnetae {

struct Metrics {
    int32_t epoch = 0;
    double loss = 0;        // mean cross-entropy over all positions, pads included
    double acc_all = 0;     // argmax == target, pads included
    double acc_masked = 0;  // same, excluding pad targets; 0 when undefined
    bool acc_masked_defined = true;
    double tokens_per_sec = 0;
};

// Running tallies so per-batch results aggregate into exact epoch means.
struct MetricTotals {
    double ce_total = 0;
    int64_t positions = 0;
    int64_t correct_all = 0;
    int64_t masked_positions = 0;
    int64_t correct_masked = 0;

    void merge(const MetricTotals& o) {
        ce_total += o.ce_total;
        positions += o.positions;
        correct_all += o.correct_all;
        masked_positions += o.masked_positions;
        correct_masked += o.correct_masked;
    }

    Metrics finalize(int32_t epoch, double elapsed_sec) const {
        Metrics m;
        m.epoch = epoch;
        m.loss = positions > 0 ? ce_total / static_cast<double>(positions) : 0;
        m.acc_all = positions > 0 ? static_cast<double>(correct_all) / static_cast<double>(positions) : 0;
        m.acc_masked_defined = masked_positions > 0;
        m.acc_masked = m.acc_masked_defined ? static_cast<double>(correct_masked) / static_cast<double>(masked_positions) : 0;
        m.tokens_per_sec = elapsed_sec > 0 ? static_cast<double>(positions) / elapsed_sec : 0;
        return m;
    }
};

// Loss plus both accuracy flavors for one batch of logits (rows, vocab)
// against targets (rows). Argmax ties break to the lowest index.
template <typename T>
MetricTotals loss_and_metrics(const Tensor<T>& logits, std::span<const int32_t> targets, int32_t pad_id);

// Accuracy tallies only; callers that already computed the loss through the
// graph fill in ce_total themselves.
template <typename T>
MetricTotals accuracy_totals(const Tensor<T>& logits, std::span<const int32_t> targets, int32_t pad_id);

}  // namespace fnetae
