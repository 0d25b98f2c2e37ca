#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fdrlab/distributions.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/theory.hpp"

namespace fdrlab {

namespace detail {

// Static chunking over [0, count); results must be written to per-index slots
// so the outcome is independent of the thread count.
template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        std::size_t lo = count * t / nt, hi = count * (t + 1) / nt;
        pool.emplace_back([&body, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Compensated (Kahan) sum, evaluated in index order.
inline double kahan_sum(const std::vector<double>& xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

inline double mean_of(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : kahan_sum(xs) / static_cast<double>(xs.size());
}

inline double se_of_mean(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) return 0.0;
    double mu = mean_of(xs);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (xs[i] - mu) * (xs[i] - mu);
    double var = kahan_sum(sq) / static_cast<double>(n - 1);
    return std::sqrt(var / static_cast<double>(n));
}

// First j null-labeled entries removed; matches the X^(j) construction.
inline PValueBatch drop_leading_nulls(const PValueBatch& batch, std::size_t j) {
    PValueBatch out;
    out.values.reserve(batch.size() - j);
    out.labels.reserve(batch.size() - j);
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (dropped < j && batch.labels[i] == Label::Null) {
            ++dropped;
            continue;
        }
        out.values.push_back(batch.values[i]);
        out.labels.push_back(batch.labels[i]);
    }
    if (dropped < j)
        throw std::invalid_argument("drop_leading_nulls: fewer nulls than requested");
    return out;
}

}  // namespace detail

struct SimConfig {
    enum class Procedure { BH, BHStrict, BHS };
    MixtureSpec mixture;
    Procedure procedure = Procedure::BH;
    double q = 0.1;       // BH / BHStrict level
    double delta = 0.1;   // BHS target level
    double x = 0.5;       // BHS estimator cutoff
    std::size_t reps = 1000;
    std::uint64_t seed = 42;
    int k_max = 2;        // highest moment order
    int threads = 1;

    void validate() const {
        mixture.validate();
        if (reps < 1) throw std::invalid_argument("sim: reps must be >= 1");
        if (k_max < 1) throw std::invalid_argument("sim: k_max must be >= 1");
    }
};

struct SummaryStat {
    std::string name;
    std::vector<double> moments;  // raw moments of order 1..k_max
    double se = 0.0;              // standard error of the mean
    double mean() const { return moments.empty() ? 0.0 : moments[0]; }
};

struct SimReport {
    SimConfig config;
    std::vector<SummaryStat> statistics;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    const SummaryStat* find(const std::string& name) const {
        for (const auto& s : statistics)
            if (s.name == name) return &s;
        return nullptr;
    }
};

inline RejectionOutcome apply_procedure(const SimConfig& config, const PValueBatch& batch) {
    switch (config.procedure) {
        case SimConfig::Procedure::BH: return bh_count(batch, config.q);
        case SimConfig::Procedure::BHStrict: return bh_count_strict(batch, config.q);
        case SimConfig::Procedure::BHS: return bhs(batch, config.delta, config.x);
    }
    return {};
}

// Runs reps independent replicates (sample -> procedure -> proportions) and
// aggregates moments; deterministic given (config, seed) for any thread count.
inline SimReport run(const SimConfig& config) {
    config.validate();
    auto start = std::chrono::steady_clock::now();
    const std::size_t reps = config.reps;
    const std::size_t m = config.mixture.m;
    const bool has_alt = config.mixture.m0() < m;
    const bool is_bhs = config.procedure == SimConfig::Procedure::BHS;

    std::vector<double> pi1(reps), pi2(has_alt ? reps : 0), pi3(reps), r_over_m(reps),
        s_over_m(reps), no_reject(reps), s_count(reps), r_or_1(reps),
        q_m(is_bhs ? reps : 0), g_hat(is_bhs ? reps : 0);

    detail::parallel_for(reps, config.threads, [&](std::size_t rep) {
        Rng rng(config.seed, rep);
        PValueBatch batch = sample_mixture(config.mixture, rng);
        RejectionOutcome outcome = apply_procedure(config, batch);
        Proportions prop = proportions(outcome, batch);
        pi1[rep] = prop.pi1;
        if (has_alt) pi2[rep] = *prop.pi2;
        pi3[rep] = prop.pi3;
        r_over_m[rep] = static_cast<double>(outcome.r) / static_cast<double>(m);
        s_over_m[rep] = static_cast<double>(prop.s) / static_cast<double>(m);
        no_reject[rep] = outcome.r == 0 ? 1.0 : 0.0;
        s_count[rep] = static_cast<double>(prop.s);
        r_or_1[rep] = static_cast<double>(std::max<std::size_t>(outcome.r, 1));
        if (is_bhs) {
            q_m[rep] = outcome.q_nominal;
            g_hat[rep] = outcome.gamma_hat;
        }
    });

    SimReport report;
    report.config = config;
    report.reps = reps;
    report.seed = config.seed;
    auto add = [&](const std::string& name, const std::vector<double>& xs) {
        SummaryStat stat;
        stat.name = name;
        for (int k = 1; k <= config.k_max; ++k) {
            std::vector<double> powd(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i)
                powd[i] = std::pow(xs[i], static_cast<double>(k));
            stat.moments.push_back(detail::mean_of(powd));
        }
        stat.se = detail::se_of_mean(xs);
        report.statistics.push_back(std::move(stat));
    };
    add("pi1", pi1);
    if (has_alt) add("pi2", pi2);
    add("pi3", pi3);
    add("r_over_m", r_over_m);
    add("s_over_m", s_over_m);
    add("p_no_rejection", no_reject);
    if (is_bhs) {
        add("q_m", q_m);
        add("gamma_hat", g_hat);
    }
    // marginal FDR E[S]/E[R v 1], with a delta-method standard error
    {
        double a = detail::mean_of(s_count), b = detail::mean_of(r_or_1);
        double va = 0.0, vb = 0.0, cab = 0.0;
        for (std::size_t i = 0; i < reps; ++i) {
            va += (s_count[i] - a) * (s_count[i] - a);
            vb += (r_or_1[i] - b) * (r_or_1[i] - b);
            cab += (s_count[i] - a) * (r_or_1[i] - b);
        }
        double n1 = reps > 1 ? static_cast<double>(reps - 1) : 1.0;
        va /= n1; vb /= n1; cab /= n1;
        double var_ratio =
            (va / (b * b) + a * a * vb / (b * b * b * b) - 2.0 * a * cab / (b * b * b)) /
            static_cast<double>(reps);
        SummaryStat stat;
        stat.name = "marginal_fdr";
        stat.moments.assign(1, a / b);
        stat.se = var_ratio > 0.0 ? std::sqrt(var_ratio) : 0.0;
        report.statistics.push_back(std::move(stat));
    }
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

struct MomentBoundCheck {
    double lhs = 0.0, rhs = 0.0, slack = 0.0;
    double se_lhs = 0.0, se_rhs = 0.0, se_diff = 0.0;
    bool premise_independent = true;  // the bound assumes independent nulls
};

// Monte Carlo evaluation of both sides of the moment bound: lhs is
// E[Pi1^k], rhs the shifted-procedure sum; slack = rhs - lhs.
inline MomentBoundCheck moment_bound_check(const MixtureSpec& mixture, double q, int k,
                                    std::size_t reps, std::uint64_t seed, int threads = 1) {
    mixture.validate();
    const std::size_t m = mixture.m;
    const std::size_t m0 = mixture.m0();
    if (k < 1 || static_cast<std::size_t>(k) > m0)
        throw std::invalid_argument("moment_bound: need 1 <= k <= m0");
    std::vector<double> coef(static_cast<std::size_t>(k) + 1, 0.0);
    {
        double acc = 1.0;
        for (int j = 1; j <= k; ++j) {
            acc *= q * static_cast<double>(m0 - static_cast<std::size_t>(j) + 1) /
                   static_cast<double>(m);
            coef[static_cast<std::size_t>(j)] = acc;
        }
    }
    std::vector<double> lhs(reps), rhs(reps), diff(reps);
    detail::parallel_for(reps, threads, [&](std::size_t rep) {
        Rng rng(seed, rep);
        PValueBatch batch = sample_mixture(mixture, rng);
        RejectionOutcome outcome = bh_count(batch, q);
        Proportions prop = proportions(outcome, batch);
        double l = std::pow(prop.pi1, static_cast<double>(k));
        double r = 0.0;
        for (int j = 1; j <= k; ++j) {
            PValueBatch sub = detail::drop_leading_nulls(batch, static_cast<std::size_t>(j));
            std::size_t rj = shifted_count(sub, q, static_cast<std::size_t>(j), m);
            r += coef[static_cast<std::size_t>(j)] *
                 std::pow(static_cast<double>(j) + static_cast<double>(rj),
                          static_cast<double>(j - k));
        }
        lhs[rep] = l;
        rhs[rep] = r;
        diff[rep] = r - l;
    });
    MomentBoundCheck out;
    out.lhs = detail::mean_of(lhs);
    out.rhs = detail::mean_of(rhs);
    out.slack = out.rhs - out.lhs;
    out.se_lhs = detail::se_of_mean(lhs);
    out.se_rhs = detail::se_of_mean(rhs);
    out.se_diff = detail::se_of_mean(diff);
    out.premise_independent =
        mixture.null_dependence.kind == DependenceModel::Kind::Independent;
    return out;
}

struct RatioIdentityCheck {
    double ratio = 0.0;   // E[S] / (1 + E[R^(1)])
    double target = 0.0;  // q * m0/m
    double se = 0.0;      // delta-method standard error of the ratio
};

// Ratio identity: E[S_m] / (1 + E[R_m^(1)]) = q gamma under i.i.d.
// uniform nulls.
inline RatioIdentityCheck ratio_identity_check(double gamma, const AlternativeModel& alt, std::size_t m,
                                 double q, std::size_t reps, std::uint64_t seed,
                                 int threads = 1) {
    MixtureSpec mixture{gamma, alt, DependenceModel::independent(), m};
    mixture.validate();
    const std::size_t m0 = mixture.m0();
    std::vector<double> s(reps), r1(reps);
    detail::parallel_for(reps, threads, [&](std::size_t rep) {
        Rng rng(seed, rep);
        PValueBatch batch = sample_mixture(mixture, rng);
        RejectionOutcome outcome = bh_count(batch, q);
        Proportions prop = proportions(outcome, batch);
        s[rep] = static_cast<double>(prop.s);
        if (m0 >= 1) {
            PValueBatch sub = detail::drop_leading_nulls(batch, 1);
            r1[rep] = static_cast<double>(shifted_count(sub, q, 1, m));
        }
    });
    RatioIdentityCheck out;
    double a = detail::mean_of(s);
    double b = 1.0 + detail::mean_of(r1);
    out.ratio = a / b;
    out.target = q * static_cast<double>(m0) / static_cast<double>(m);
    double va = 0.0, vb = 0.0, cab = 0.0, mb = detail::mean_of(r1);
    for (std::size_t i = 0; i < reps; ++i) {
        va += (s[i] - a) * (s[i] - a);
        vb += (r1[i] - mb) * (r1[i] - mb);
        cab += (s[i] - a) * (r1[i] - mb);
    }
    double n1 = reps > 1 ? static_cast<double>(reps - 1) : 1.0;
    va /= n1; vb /= n1; cab /= n1;
    double var_ratio =
        (va / (b * b) + a * a * vb / (b * b * b * b) - 2.0 * a * cab / (b * b * b)) /
        static_cast<double>(reps);
    out.se = var_ratio > 0.0 ? std::sqrt(var_ratio) : 0.0;
    return out;
}

struct NondiscoveryMomentCheck {
    double lhs = 0.0;  // E[Pi3^l]
    double rhs = 0.0;  // (1-gamma)^l + E[Pi1^k]/gamma^k
    double se = 0.0;   // standard error of the paired difference
};

inline NondiscoveryMomentCheck nondiscovery_moment_check(const MixtureSpec& mixture, double q, int k, int l,
                                std::size_t reps, std::uint64_t seed, int threads = 1) {
    mixture.validate();
    const double gamma =
        static_cast<double>(mixture.m0()) / static_cast<double>(mixture.m);
    if (!(gamma > 0.0))
        throw std::invalid_argument("nondiscovery_moment: gamma must be positive");
    std::vector<double> lhs(reps), scaled(reps), diff(reps);
    detail::parallel_for(reps, threads, [&](std::size_t rep) {
        Rng rng(seed, rep);
        PValueBatch batch = sample_mixture(mixture, rng);
        RejectionOutcome outcome = bh_count(batch, q);
        Proportions prop = proportions(outcome, batch);
        lhs[rep] = std::pow(prop.pi3, static_cast<double>(l));
        scaled[rep] = std::pow(prop.pi1, static_cast<double>(k)) /
                      std::pow(gamma, static_cast<double>(k));
        diff[rep] = lhs[rep] - scaled[rep];
    });
    NondiscoveryMomentCheck out;
    out.lhs = detail::mean_of(lhs);
    out.rhs = std::pow(1.0 - gamma, static_cast<double>(l)) + detail::mean_of(scaled);
    out.se = detail::se_of_mean(diff);
    return out;
}

struct SweepRow {
    std::size_t m = 0;
    double mean_r_over_m = 0.0;
    double se = 0.0;
    double mean_sq = 0.0;
};

// E[R/m] and E[(R/m)^2] along an increasing m grid; should approach rho and
// rho^2 where the limit is unique.
inline std::vector<SweepRow> convergence_sweep(const AlternativeModel& model, double gamma,
                                               double q, const std::vector<std::size_t>& m_grid,
                                               std::size_t reps, std::uint64_t seed,
                                               int threads = 1) {
    std::vector<SweepRow> rows;
    std::uint64_t salt = 0;
    for (std::size_t m : m_grid) {
        MixtureSpec mixture{gamma, model, DependenceModel::independent(), m};
        std::vector<double> frac(reps);
        detail::parallel_for(reps, threads, [&](std::size_t rep) {
            Rng rng(seed + salt, rep);
            PValueBatch batch = sample_mixture(mixture, rng);
            frac[rep] = static_cast<double>(bh_count(batch, q).r) / static_cast<double>(m);
        });
        SweepRow row;
        row.m = m;
        row.mean_r_over_m = detail::mean_of(frac);
        row.se = detail::se_of_mean(frac);
        std::vector<double> sq(reps);
        for (std::size_t i = 0; i < reps; ++i) sq[i] = frac[i] * frac[i];
        row.mean_sq = detail::mean_of(sq);
        rows.push_back(row);
        ++salt;
    }
    return rows;
}

struct BhsCheck {
    double mean_pi1 = 0.0, se_pi1 = 0.0;
    double mean_pi2 = 0.0, se_pi2 = 0.0;
    double mean_qm = 0.0, se_qm = 0.0;
    double mean_gamma_hat = 0.0;
    double frac_gamma_hat_high = 0.0;  // fraction of replicates with gamma_hat >= gamma - eps
    BhsBounds bounds;
};

inline BhsCheck bhs_check(const AlternativeModel& model, double gamma, double delta,
                          double x, std::size_t m, std::size_t reps, std::uint64_t seed,
                          int threads = 1, double eps = 0.02) {
    BhsCheck out;
    out.bounds = bhs_bounds(model, gamma, delta, x);
    MixtureSpec mixture{gamma, model, DependenceModel::independent(), m};
    std::vector<double> pi1(reps), pi2(reps), qm(reps), gh(reps), high(reps);
    detail::parallel_for(reps, threads, [&](std::size_t rep) {
        Rng rng(seed, rep);
        PValueBatch batch = sample_mixture(mixture, rng);
        RejectionOutcome outcome = bhs(batch, delta, x);
        Proportions prop = proportions(outcome, batch);
        pi1[rep] = prop.pi1;
        pi2[rep] = prop.pi2 ? *prop.pi2 : 0.0;
        qm[rep] = outcome.q_nominal;
        gh[rep] = outcome.gamma_hat;
        high[rep] = outcome.gamma_hat >= gamma - eps ? 1.0 : 0.0;
    });
    out.mean_pi1 = detail::mean_of(pi1);
    out.se_pi1 = detail::se_of_mean(pi1);
    out.mean_pi2 = detail::mean_of(pi2);
    out.se_pi2 = detail::se_of_mean(pi2);
    out.mean_qm = detail::mean_of(qm);
    out.se_qm = detail::se_of_mean(qm);
    out.mean_gamma_hat = detail::mean_of(gh);
    out.frac_gamma_hat_high = detail::mean_of(high);
    return out;
}

struct GlivenkoRow {
    std::size_t n = 0;
    double mean_sup_dist = 0.0;
    double se = 0.0;
};

// E[sup_t |G_n(t) - t|] for uniform-marginal samples from a dependence model.
inline std::vector<GlivenkoRow> glivenko_check(const DependenceModel& dep,
                                               const std::vector<std::size_t>& n_grid,
                                               std::size_t reps, std::uint64_t seed,
                                               int threads = 1) {
    std::vector<GlivenkoRow> rows;
    std::uint64_t salt = 0;
    for (std::size_t n : n_grid) {
        std::vector<double> dist(reps);
        detail::parallel_for(reps, threads, [&](std::size_t rep) {
            Rng rng(seed + salt, rep);
            std::vector<double> sample = sample_nulls(n, dep, rng);
            std::sort(sample.begin(), sample.end());
            double d = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double hi = static_cast<double>(i + 1) / static_cast<double>(n) - sample[i];
                double lo = sample[i] - static_cast<double>(i) / static_cast<double>(n);
                d = std::max({d, hi, lo});
            }
            dist[rep] = d;
        });
        GlivenkoRow row;
        row.n = n;
        row.mean_sup_dist = detail::mean_of(dist);
        row.se = detail::se_of_mean(dist);
        rows.push_back(row);
        ++salt;
    }
    return rows;
}

}  // namespace fdrlab
