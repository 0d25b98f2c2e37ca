#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fdrlab/distributions.hpp"
#include "fdrlab/gof.hpp"
#include "fdrlab/montecarlo.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/theory.hpp"

namespace fdrlab {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

class CheckBuilder {
  public:
    explicit CheckBuilder(std::string name) : name_(std::move(name)) {}

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass_ = false;
            if (!detail_.empty()) detail_ += "; ";
            detail_ += what;
        }
    }

    void note(const std::string& what) {
        if (!detail_.empty()) detail_ += "; ";
        detail_ += what;
    }

    CheckResult result() const { return {name_, pass_, detail_}; }

  private:
    std::string name_;
    bool pass_ = true;
    std::string detail_;
};

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Random batch generator for the oracle-equivalence sweep; values are snapped
// to step-up grid multiples with probability 1/2 so threshold ties are hit.
inline PValueBatch random_batch(std::size_t m, double q, Rng& rng) {
    PValueBatch batch;
    batch.values.resize(m);
    for (auto& v : batch.values) {
        v = rng.uniform();
        if (rng.uniform() < 0.5 && q > 0.0) {
            auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m)) + 1;
            v = std::min(1.0, q * static_cast<double>(std::min(i, m)) /
                                  static_cast<double>(m));
        }
    }
    return batch;
}

}  // namespace detail

struct VerifyOptions {
    bool quick = false;
    int threads = 1;
    std::uint64_t seed = 42;
};

// 1. Step-up count equals the goodness-of-fit reformulation, exactly.
inline CheckResult check_gof_oracle_equivalence(const VerifyOptions& opt) {
    detail::CheckBuilder cb("gof-oracle-equivalence");
    Rng rng(opt.seed, 1001);
    std::size_t mismatches = 0;
    const std::size_t per_m = opt.quick ? 50 : 300;
    for (std::size_t m = 1; m <= 8; ++m) {
        for (std::size_t b = 0; b < per_m; ++b) {
            PValueBatch batch = detail::random_batch(m, 0.5, rng);
            for (int j = 1; j <= 64; ++j) {
                double q = static_cast<double>(j) / 64.0;
                if (bh_count(batch, q).r != bh_via_gof(batch, q)) ++mismatches;
            }
        }
    }
    const std::size_t big = opt.quick ? 1000 : 10000;
    for (std::size_t b = 0; b < big; ++b) {
        auto m = static_cast<std::size_t>(9 + rng.uniform() * 192.0);
        double q = 1.0 / 64.0 + rng.uniform() * (1.0 - 1.0 / 64.0);
        PValueBatch batch = detail::random_batch(m, q, rng);
        if (bh_count(batch, q).r != bh_via_gof(batch, q)) ++mismatches;
    }
    cb.require(mismatches == 0, "mismatching rejection counts: " + std::to_string(mismatches));
    return cb.result();
}

// 2. E[Pi1] = q under pure independent uniform nulls.
inline CheckResult check_bh_theorem_equality(const VerifyOptions& opt) {
    detail::CheckBuilder cb("bh-fdr-equality-pure-null");
    const std::size_t reps = opt.quick ? 10000 : 100000;
    for (std::size_t m : {10ul, 100ul, 1000ul}) {
        for (double q : {0.05, 0.2, 0.5}) {
            SimConfig config;
            config.mixture = {1.0, AlternativeModel::power(0.5),
                              DependenceModel::independent(), m};
            config.q = q;
            config.reps = reps;
            config.seed = opt.seed;
            config.threads = opt.threads;
            SimReport report = run(config);
            const SummaryStat* pi1 = report.find("pi1");
            double err = std::fabs(pi1->mean() - q);
            cb.require(err <= 3.0 * pi1->se,
                       "m=" + std::to_string(m) + " q=" + detail::num(q) +
                           ": |mean-q|=" + detail::num(err) + " > 3se=" +
                           detail::num(3.0 * pi1->se));
        }
    }
    return cb.result();
}

// 3. P(R=0) is 1-q for i.i.d. uniforms (ballot probability).
inline CheckResult check_ballot_probability(const VerifyOptions& opt) {
    detail::CheckBuilder cb("ballot-no-rejection-probability");
    const std::size_t reps = opt.quick ? 1000 : 5000;
    auto est = no_rejection_probability(1000, 0.2, reps, opt.seed);
    double err = std::fabs(est.estimate - 0.8);
    cb.require(err <= 3.0 * est.se, "|P(R=0)-0.8|=" + detail::num(err) + " > 3se=" +
                                        detail::num(3.0 * est.se));
    return cb.result();
}

// 4. E[S]/(1+E[R^(1)]) = q gamma.
inline CheckResult check_identity_a1(const VerifyOptions& opt) {
    detail::CheckBuilder cb("shifted-count-identity");
    const std::size_t reps = opt.quick ? 10000 : 100000;
    for (double gamma : {0.5, 1.0}) {
        auto res = ratio_identity_check(gamma, AlternativeModel::degenerate(0.01), 100, 0.2,
                                     reps, opt.seed, opt.threads);
        double err = std::fabs(res.ratio - res.target);
        cb.require(err <= 3.0 * res.se,
                   "gamma=" + detail::num(gamma) + ": |ratio-target|=" + detail::num(err) +
                       " > 3se=" + detail::num(3.0 * res.se));
    }
    return cb.result();
}

// 5. Second-moment bound with equality under pure uniform nulls.
inline CheckResult check_second_moment_bound(const VerifyOptions& opt) {
    detail::CheckBuilder cb("moment-bound-k2-pure-null");
    const std::size_t reps = opt.quick ? 10000 : 100000;
    MixtureSpec mixture{1.0, AlternativeModel::power(0.5), DependenceModel::independent(),
                        20};
    auto res = moment_bound_check(mixture, 0.3, 2, reps, opt.seed, opt.threads);
    cb.require(res.slack >= -3.0 * res.se_diff,
               "bound violated: slack=" + detail::num(res.slack) + " < -3se=" +
                   detail::num(-3.0 * res.se_diff));
    cb.require(std::fabs(res.slack) <= 3.0 * res.se_diff,
               "equality missed: |slack|=" + detail::num(std::fabs(res.slack)) + " > 3se=" +
                   detail::num(3.0 * res.se_diff));
    return cb.result();
}

// 6+7. Asymptotic power values 0.784 / 0.614 and the q*gamma FDR limit.
inline CheckResult check_power_values(const VerifyOptions& opt) {
    detail::CheckBuilder cb("asymptotic-power-and-fdr");
    AlternativeModel model = AlternativeModel::power(0.1);
    const std::size_t m = opt.quick ? 2000 : 5000;
    const std::size_t reps = opt.quick ? 500 : 2000;
    struct Case {
        double gamma, q, expected_power;
    };
    for (const Case c : {Case{0.5, 0.2, 0.784}, Case{0.9, 0.111, 0.614}}) {
        AsymptoticSummary s = rho(model, c.q, c.gamma);
        double power = s.pi2_limit.value_or(0.0);
        cb.require(std::fabs(power - c.expected_power) <= 1e-3,
                   "gamma=" + detail::num(c.gamma) + ": theory power " + detail::num(power) +
                       " differs from " + detail::num(c.expected_power));
        SimConfig config;
        config.mixture = {c.gamma, model, DependenceModel::independent(), m};
        config.q = c.q;
        config.reps = reps;
        config.seed = opt.seed;
        config.threads = opt.threads;
        SimReport report = run(config);
        double mc_power = report.find("pi2")->mean();
        cb.require(std::fabs(mc_power - power) <= 0.02,
                   "gamma=" + detail::num(c.gamma) + ": MC power " + detail::num(mc_power) +
                       " off theory " + detail::num(power));
        double mc_fdr = report.find("pi1")->mean();
        cb.require(std::fabs(mc_fdr - c.q * c.gamma) <= 0.01,
                   "gamma=" + detail::num(c.gamma) + ": MC fdr " + detail::num(mc_fdr) +
                       " off limit " + detail::num(c.q * c.gamma));
    }
    return cb.result();
}

// 8. Numeric level-set bisection agrees with the closed forms to 1e-10.
inline CheckResult check_rho_closed_forms(const VerifyOptions& opt) {
    detail::CheckBuilder cb("rho-closed-form-agreement");
    Rng rng(opt.seed, 8001);
    const double tol = 1e-10;
    std::size_t draws = opt.quick ? 30 : 100;
    for (std::size_t i = 0; i < draws; ++i) {
        double q = 0.05 + 0.9 * rng.uniform();
        double gamma = 0.9 * rng.uniform();
        // degenerate, away from the knife edge
        {
            double knife = q * (1.0 - gamma) / (1.0 - q * gamma);
            bool below = rng.uniform() < 0.5;
            double x0 = below ? knife * (0.1 + 0.8 * rng.uniform())
                              : knife + (1.0 - knife) * (0.1 + 0.8 * rng.uniform());
            double closed = below ? (1.0 - gamma) / (1.0 - q * gamma) : 0.0;
            double numeric = rho(AlternativeModel::degenerate(x0), q, gamma).rho;
            cb.require(std::fabs(numeric - closed) <= tol,
                       "degenerate q=" + detail::num(q) + " gamma=" + detail::num(gamma) +
                           " x0=" + detail::num(x0) + ": " + detail::num(numeric) + " vs " +
                           detail::num(closed));
        }
        // power: concave-root route vs direct exponent formula vs numeric
        {
            double alpha = 0.05 + 0.9 * rng.uniform();
            AlternativeModel model = AlternativeModel::power(alpha);
            double closed = std::pow(q * (1.0 - gamma) / (1.0 - q * gamma),
                                     1.0 / (1.0 - alpha)) / q;
            double numeric = rho(model, q, gamma).rho;
            auto root = rho_concave(model, q, gamma);
            cb.require(root.applicable && std::fabs(root.value - closed) <= tol,
                       "power concave-root q=" + detail::num(q) + " alpha=" +
                           detail::num(alpha) + ": " + detail::num(root.value) + " vs " +
                           detail::num(closed));
            cb.require(std::fabs(numeric - closed) <= tol,
                       "power numeric q=" + detail::num(q) + " alpha=" + detail::num(alpha) +
                           ": " + detail::num(numeric) + " vs " + detail::num(closed));
        }
        // power mixture: displayed-equation root vs numeric
        {
            double p = 0.1 + 0.8 * rng.uniform();
            double alpha = 0.05 + 0.9 * rng.uniform();
            double beta = 1.2 + 3.0 * rng.uniform();
            double root = rho_power_mixture(p, alpha, beta, q, gamma);
            double numeric =
                rho(AlternativeModel::power_mixture(p, alpha, beta), q, gamma).rho;
            cb.require(std::fabs(numeric - root) <= tol,
                       "powermix q=" + detail::num(q) + ": " + detail::num(numeric) +
                           " vs " + detail::num(root));
        }
    }
    return cb.result();
}

// 9. Degenerate knife-edge: E[R/m] near (1-gamma)/(2(1-q gamma)).
inline CheckResult check_borderline_mean(const VerifyOptions& opt) {
    detail::CheckBuilder cb("borderline-rejection-fraction");
    const double q = 0.5, gamma = 0.5;
    const double x0 = q * (1.0 - gamma) / (1.0 - q * gamma);  // 1/3
    // the rejection fraction is near-bimodal here, so the mean needs both a
    // large batch and enough replicates even in quick mode
    const std::size_t m = 100000;
    const std::size_t reps = opt.quick ? 100 : 200;
    auto rows = convergence_sweep(AlternativeModel::degenerate(x0), gamma, q, {m}, reps,
                                  opt.seed, opt.threads);
    double target = borderline_limits(q, gamma).r_over_m;
    double err = std::fabs(rows[0].mean_r_over_m - target);
    cb.require(err <= 0.02, "|E[R/m]-" + detail::num(target) + "|=" + detail::num(err));
    return cb.result();
}

// 10. BHS keeps E[Pi1] and E[Pi2] inside the predicted bands.
inline CheckResult check_bhs_bounds_mc(const VerifyOptions& opt) {
    detail::CheckBuilder cb("bhs-bound-bands");
    AlternativeModel model = AlternativeModel::power(0.1);
    const double gamma = 0.5, delta = 0.1;
    // the estimator's downward bias near x = 0.9 needs m this large to keep
    // E[q_m] within the 0.01 window
    const std::size_t m = 10000;
    const std::size_t reps = opt.quick ? 200 : 1000;
    for (double x : {0.3, 0.5, 0.9}) {
        BhsCheck res = bhs_check(model, gamma, delta, x, m, reps, opt.seed, opt.threads);
        cb.require(res.bounds.applicable, "x=" + detail::num(x) + ": premise failed");
        cb.require(res.mean_pi1 >= res.bounds.fdr_lo - 3.0 * res.se_pi1 &&
                       res.mean_pi1 <= delta + 3.0 * res.se_pi1,
                   "x=" + detail::num(x) + ": E[pi1]=" + detail::num(res.mean_pi1) +
                       " outside [" + detail::num(res.bounds.fdr_lo) + "," +
                       detail::num(delta) + "] band");
        cb.require(res.mean_pi2 >= res.bounds.power_lo - 3.0 * res.se_pi2 &&
                       res.mean_pi2 <= res.bounds.power_hi + 3.0 * res.se_pi2,
                   "x=" + detail::num(x) + ": E[pi2]=" + detail::num(res.mean_pi2) +
                       " outside [" + detail::num(res.bounds.power_lo) + "," +
                       detail::num(res.bounds.power_hi) + "] band");
        cb.require(std::fabs(res.mean_qm - res.bounds.q_limit) <= 0.01,
                   "x=" + detail::num(x) + ": E[q_m]=" + detail::num(res.mean_qm) +
                       " off q(x,delta)=" + detail::num(res.bounds.q_limit));
    }
    return cb.result();
}

// 11. Truncated-power ideal case: kappa = 0, bands collapse, power maximal.
inline CheckResult check_truncated_power_ideal(const VerifyOptions& opt) {
    detail::CheckBuilder cb("truncated-power-ideal-case");
    AlternativeModel model = AlternativeModel::truncated_power(0.1, 0.6);
    const double gamma = 0.5, delta = 0.1, x = 0.8;
    cb.require(kappa(model, x) == 0.0, "kappa(x) is not exactly 0 for x >= x0");
    BhsBounds bounds = bhs_bounds(model, gamma, delta, x);
    cb.require(bounds.applicable, "premise failed");
    cb.require(std::fabs(bounds.q_limit - delta / gamma) <= 1e-12 &&
                   std::fabs(bounds.fdr_lo - delta) <= 1e-12 &&
                   std::fabs(bounds.power_lo - bounds.power_hi) <= 1e-12,
               "bounds did not collapse at kappa=0");
    const std::size_t m = opt.quick ? 2000 : 10000;
    const std::size_t reps = opt.quick ? 200 : 1000;
    BhsCheck res = bhs_check(model, gamma, delta, x, m, reps, opt.seed, opt.threads);
    double err = std::fabs(res.mean_pi2 - bounds.power_hi);
    cb.require(err <= 0.02, "MC power " + detail::num(res.mean_pi2) + " off ideal " +
                                detail::num(bounds.power_hi));
    return cb.result();
}

// 12. AR(1)-copula marginal empirical CDF converges uniformly.
inline CheckResult check_ar1_glivenko(const VerifyOptions& opt) {
    detail::CheckBuilder cb("ar1-copula-uniform-convergence");
    std::vector<std::size_t> grid = opt.quick
                                        ? std::vector<std::size_t>{1000, 10000}
                                        : std::vector<std::size_t>{1000, 10000, 100000};
    auto rows = glivenko_check(DependenceModel::ar1(0.5), grid, 100, opt.seed, opt.threads);
    for (std::size_t i = 1; i < rows.size(); ++i)
        cb.require(rows[i].mean_sup_dist < rows[i - 1].mean_sup_dist,
                   "mean sup distance not decreasing at n=" + std::to_string(rows[i].n));
    return cb.result();
}

// 13. Pi3 moment bound and the (1-gamma) asymptote.
inline CheckResult check_nondiscovery_moment_bound(const VerifyOptions& opt) {
    detail::CheckBuilder cb("nondiscovery-moment-bound");
    AlternativeModel model = AlternativeModel::power(0.1);
    const std::size_t m = opt.quick ? 2000 : 5000;
    const std::size_t reps = opt.quick ? 500 : 2000;
    struct Case {
        double gamma, q;
    };
    for (const Case c : {Case{0.5, 0.2}, Case{0.9, 0.111}}) {
        MixtureSpec mixture{c.gamma, model, DependenceModel::independent(), m};
        for (int l : {1, 2}) {
            auto res = nondiscovery_moment_check(mixture, c.q, 2, l, reps, opt.seed, opt.threads);
            cb.require(res.lhs <= res.rhs + 3.0 * res.se,
                       "gamma=" + detail::num(c.gamma) + " l=" + std::to_string(l) +
                           ": lhs=" + detail::num(res.lhs) + " > rhs=" +
                           detail::num(res.rhs));
            if (l == 1)
                cb.require(res.lhs <= (1.0 - c.gamma) + 0.02,
                           "gamma=" + detail::num(c.gamma) + ": E[pi3]=" +
                               detail::num(res.lhs) + " above asymptote " +
                               detail::num(1.0 - c.gamma));
        }
    }
    return cb.result();
}

inline std::vector<CheckResult> verification_suite(const VerifyOptions& opt) {
    return {
        check_gof_oracle_equivalence(opt),
        check_bh_theorem_equality(opt),
        check_ballot_probability(opt),
        check_identity_a1(opt),
        check_second_moment_bound(opt),
        check_power_values(opt),
        check_rho_closed_forms(opt),
        check_borderline_mean(opt),
        check_bhs_bounds_mc(opt),
        check_truncated_power_ideal(opt),
        check_ar1_glivenko(opt),
        check_nondiscovery_moment_bound(opt),
    };
}

}  // namespace fdrlab
