#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fdrlab/batch.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/rng.hpp"

namespace fdrlab {

// Right-continuous empirical CDF H_m(t) = #{values <= t} / m.
struct EmpiricalCdf {
    std::vector<double> sorted;

    explicit EmpiricalCdf(std::vector<double> values) : sorted(std::move(values)) {
        std::sort(sorted.begin(), sorted.end());
    }
    explicit EmpiricalCdf(const PValueBatch& batch) : EmpiricalCdf(batch.values) {}

    std::size_t count_leq(double t) const {
        return static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
    }

    double operator()(double t) const {
        if (sorted.empty()) return 0.0;
        return static_cast<double>(count_leq(t)) / static_cast<double>(sorted.size());
    }
};

// Grid statistic: max over t in {q k/m : k = r..m} of (H_m(t)-t)/t.
inline double psi_grid(const PValueBatch& batch, double q, std::size_t r) {
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("psi_grid: q must lie in (0,1]");
    const std::size_t m = batch.size();
    if (r < 1 || r > m)
        throw std::invalid_argument("psi_grid: r must lie in [1,m]");
    EmpiricalCdf h(batch);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = r; k <= m; ++k) {
        double t = q * static_cast<double>(k) / static_cast<double>(m);
        best = std::max(best, (h(t) - t) / t);
    }
    return best;
}

// Renyi-type statistic: sup over t in [lower,q] of (H_m(t)-t)/t, computed
// exactly at the endpoints and the jump points of H_m (the ratio decreases
// on constancy intervals, so the sup sits at jumps or the left endpoint).
inline double renyi_sup(const PValueBatch& batch, double q, double lower) {
    if (!(lower > 0.0 && lower <= q))
        throw std::invalid_argument("renyi_sup: need 0 < lower <= q");
    EmpiricalCdf h(batch);
    auto ratio = [&](double t) { return (h(t) - t) / t; };
    double best = std::max(ratio(lower), ratio(q));
    for (double v : h.sorted) {
        if (v > lower && v <= q) best = std::max(best, ratio(v));
        if (v > q) break;
    }
    return best;
}

// Step-up rejection count recovered through the goodness-of-fit identity:
// max{r : psi_grid(batch,q,r) >= (1-q)/q}. Must coincide with bh_count.
inline std::size_t bh_via_gof(const PValueBatch& batch, double q) {
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("bh_via_gof: q must lie in (0,1]");
    const std::size_t m = batch.size();
    if (m == 0) return 0;
    EmpiricalCdf h(batch);
    // psi_grid(.,q,r) is a suffix max over k >= r, and at t = q k/m the level
    // condition (H(t)-t)/t >= (1-q)/q clears denominators to H(t) >= k/m.
    // Compare in counts so equality cases are exact.
    for (std::size_t r = m; r >= 1; --r) {
        double t = q * static_cast<double>(r) / static_cast<double>(m);
        if (h.count_leq(t) >= r) return r;
    }
    return 0;
}

struct ProbabilityEstimate {
    double estimate = 0.0;
    double se = 0.0;
    std::size_t reps = 0;
};

// Monte Carlo estimate of P(R_m = 0) under i.i.d. uniform values; the ballot
// theorem puts this at 1-q.
inline ProbabilityEstimate no_rejection_probability(std::size_t m, double q, std::size_t reps,
                                                    std::uint64_t seed) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("no_rejection_probability: q must lie in (0,1)");
    if (m < 1 || reps < 1)
        throw std::invalid_argument("no_rejection_probability: m and reps must be positive");
    std::size_t hits = 0;
    std::vector<double> values(m);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed, rep);
        for (auto& v : values) v = rng.uniform();
        std::sort(values.begin(), values.end());
        bool none = true;
        for (std::size_t i = m; i >= 1; --i) {
            if (values[i - 1] <= q * static_cast<double>(i) / static_cast<double>(m)) {
                none = false;
                break;
            }
        }
        if (none) ++hits;
    }
    ProbabilityEstimate out;
    out.reps = reps;
    out.estimate = static_cast<double>(hits) / static_cast<double>(reps);
    out.se = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(reps));
    return out;
}

}  // namespace fdrlab
