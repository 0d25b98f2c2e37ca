#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdrlab/batch.hpp"

namespace fdrlab {

struct RejectionOutcome {
    std::size_t r = 0;                 // rejection count R_m
    double threshold = 0.0;            // q * R_m / m (0 when R_m = 0)
    std::vector<std::size_t> rejected; // original indices of the r smallest values
    double q_used = 0.0;               // level actually applied to the step-up rule
    double q_nominal = 0.0;            // uncapped level (differs from q_used only for BHS)
    double gamma_hat = std::numeric_limits<double>::quiet_NaN();  // BHS only

    // Filled by proportions() when truth labels are available.
    std::optional<std::size_t> s;  // rejected nulls S_m
    std::optional<double> pi1, pi2, pi3;
};

struct Proportions {
    std::size_t s = 0;
    double pi1 = 0.0;
    std::optional<double> pi2;  // undefined when m1 = 0
    double pi3 = 0.0;
};

namespace detail {

// Indices sorted stably by (value, original index).
inline std::vector<std::size_t> sorted_order(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return order;
}

inline RejectionOutcome step_up(const PValueBatch& batch, double q, bool strict) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("bh: q must lie in [0,1]");
    batch.validate();
    const std::size_t m = batch.size();
    auto order = sorted_order(batch.values);
    std::size_t r = 0;
    for (std::size_t i = m; i >= 1; --i) {
        double thresh = q * static_cast<double>(i) / static_cast<double>(m);
        double v = batch.values[order[i - 1]];
        if (strict ? v < thresh : v <= thresh) {
            r = i;
            break;
        }
    }
    RejectionOutcome out;
    out.r = r;
    out.q_used = q;
    out.q_nominal = q;
    out.threshold = r == 0 ? 0.0 : q * static_cast<double>(r) / static_cast<double>(m);
    out.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(r));
    return out;
}

}  // namespace detail

// Step-up rule: R = max{i : X_{i:m} <= q i/m}, 0 when the set is empty.
inline RejectionOutcome bh_count(const PValueBatch& batch, double q) {
    return detail::step_up(batch, q, false);
}

// Strict-inequality variant: R = max{i : X_{i:m} < q i/m}.
inline RejectionOutcome bh_count_strict(const PValueBatch& batch, double q) {
    return detail::step_up(batch, q, true);
}

// Shifted procedure R_m^(j): applied to a batch of size m-j with the step-up
// index i replaced by i+j, thresholds still scaled by the original m.
inline std::size_t shifted_count(const PValueBatch& batch, double q, std::size_t j,
                                 std::size_t m) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("shifted_count: q must lie in [0,1]");
    if (j > m || batch.size() != m - j)
        throw std::invalid_argument("shifted_count: batch size must equal m - j");
    std::vector<double> sorted = batch.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    for (std::size_t i = n; i >= 1; --i) {
        double thresh = q * static_cast<double>(i + j) / static_cast<double>(m);
        if (sorted[i - 1] <= thresh) return i;
    }
    return 0;
}

// Null-proportion estimator: min over t in [0,x] of (1-H_m(t))/(1-t).
// On each constancy interval of H_m the ratio increases in t, so the minimum
// is attained on {0} union {order statistics <= x}.
inline double gamma_hat(const PValueBatch& batch, double x) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument("gamma_hat: x must lie in (0,1)");
    batch.validate();
    const std::size_t m = batch.size();
    std::vector<double> sorted = batch.values;
    std::sort(sorted.begin(), sorted.end());
    double best = 1.0;  // t = 0 candidate
    for (std::size_t i = 0; i < m && sorted[i] <= x; ++i) {
        if (i + 1 < m && sorted[i + 1] == sorted[i]) continue;  // take the tie's last index
        double ratio = (1.0 - static_cast<double>(i + 1) / static_cast<double>(m)) /
                       (1.0 - sorted[i]);
        best = std::min(best, ratio);
    }
    return best;
}

// Adaptive variant: the step-up rule at the data-driven level delta/gamma_hat(x).
// gamma_hat = 0 rejects everything (the q -> infinity limit of the step-up rule).
inline RejectionOutcome bhs(const PValueBatch& batch, double delta, double x) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("bhs: delta must lie in (0,1)");
    double gh = gamma_hat(batch, x);
    RejectionOutcome out;
    if (gh == 0.0) {
        out = bh_count(batch, 1.0);
        out.r = batch.size();
        out.rejected = detail::sorted_order(batch.values);
        out.threshold = 1.0;
        out.q_nominal = std::numeric_limits<double>::infinity();
        out.q_used = 1.0;
    } else {
        double q_nominal = delta / gh;
        out = bh_count(batch, std::min(q_nominal, 1.0));
        out.q_nominal = q_nominal;
    }
    out.gamma_hat = gh;
    return out;
}

// The three performance proportions; requires truth labels.
inline Proportions proportions(const RejectionOutcome& outcome, const PValueBatch& batch) {
    if (!batch.has_labels())
        throw std::invalid_argument("proportions: batch carries no truth labels");
    const std::size_t m = batch.size();
    const std::size_t m0 = batch.null_count();
    const std::size_t m1 = m - m0;
    Proportions p;
    for (std::size_t idx : outcome.rejected)
        if (batch.labels[idx] == Label::Null) ++p.s;
    const std::size_t r = outcome.r;
    p.pi1 = static_cast<double>(p.s) / static_cast<double>(std::max<std::size_t>(r, 1));
    if (m1 > 0)
        p.pi2 = static_cast<double>(r - p.s) / static_cast<double>(m1);
    // (m1 - (R-S)) / ((m-R) v 1): agrees with 1 - (m0-S)/((m-R) v 1) for R < m
    // and evaluates to 0 at R = m.
    p.pi3 = static_cast<double>(m1 - (r - p.s)) /
            static_cast<double>(std::max<std::size_t>(m - r, 1));
    return p;
}

inline void annotate(RejectionOutcome& outcome, const PValueBatch& batch) {
    Proportions p = proportions(outcome, batch);
    outcome.s = p.s;
    outcome.pi1 = p.pi1;
    outcome.pi2 = p.pi2;
    outcome.pi3 = p.pi3;
}

}  // namespace fdrlab
