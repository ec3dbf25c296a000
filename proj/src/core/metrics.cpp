#include "core/metrics.hpp"

#include "core/kernels.hpp"

namespace fnetae {

template <typename T>
MetricTotals accuracy_totals(const Tensor<T>& logits, std::span<const int32_t> targets, int32_t pad_id) {
    if (logits.rank() < 2) throw std::invalid_argument("metrics: logits rank must be >= 2");
    const int64_t vocab = logits.shape().back();
    const int64_t rows = logits.numel() / vocab;
    if (static_cast<int64_t>(targets.size()) != rows)
        throw std::invalid_argument("metrics: " + std::to_string(targets.size()) + " targets for " +
                                    std::to_string(rows) + " rows");

    MetricTotals totals;
    totals.positions = rows;
    for (int64_t r = 0; r < rows; ++r) {
        const int32_t target = targets[static_cast<size_t>(r)];
        const bool hit = kernels::argmax_row(logits.data() + r * vocab, vocab) == target;
        totals.correct_all += hit;
        if (target != pad_id) {
            ++totals.masked_positions;
            totals.correct_masked += hit;
        }
    }
    return totals;
}

template <typename T>
MetricTotals loss_and_metrics(const Tensor<T>& logits, std::span<const int32_t> targets, int32_t pad_id) {
    MetricTotals totals = accuracy_totals(logits, targets, pad_id);
    totals.ce_total = kernels::cross_entropy_total(logits, targets, logits.shape().back());
    return totals;
}

template MetricTotals accuracy_totals<float>(const Tensor<float>&, std::span<const int32_t>, int32_t);
template MetricTotals accuracy_totals<double>(const Tensor<double>&, std::span<const int32_t>, int32_t);
template MetricTotals loss_and_metrics<float>(const Tensor<float>&, std::span<const int32_t>, int32_t);
template MetricTotals loss_and_metrics<double>(const Tensor<double>&, std::span<const int32_t>, int32_t);

}  // namespace fnetae
