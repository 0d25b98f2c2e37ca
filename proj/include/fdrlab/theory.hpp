#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdrlab/distributions.hpp"

namespace fdrlab {

namespace detail {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Scaled excess (G(t)-t)/t, with the t -> 0 limit.
inline double excess(const AlternativeModel& model, double t) {
    if (t <= 0.0) {
        // limit of G(t)/t - 1 as t -> 0+
        switch (model.family) {
            case Family::Degenerate:
                return model.x0 == 0.0 ? kInf : -1.0;
            case Family::Power:
            case Family::PowerMixture:
            case Family::TruncatedPower:
                return kInf;
            case Family::Tabulated: {
                const auto& g = model.grid;
                if (g[0].second > 0.0) return kInf;
                double dt = g[1].first - g[0].first;
                return dt > 0.0 ? (g[1].second - g[0].second) / dt - 1.0 : kInf;
            }
        }
    }
    return (model.cdf(t) - t) / t;
}

// sup over [a,b] of the scaled excess, exact for the closed families and via
// segment endpoints for Tabulated (the ratio is monotone between knots).
inline double sup_excess(const AlternativeModel& model, double a, double b) {
    if (a > b) std::swap(a, b);
    switch (model.family) {
        case Family::Degenerate: {
            if (b < model.x0) return -1.0;
            double t = std::max(a, model.x0);
            return t <= 0.0 ? kInf : 1.0 / t - 1.0;
        }
        case Family::Power:
            return excess(model, a);  // decreasing in t
        case Family::PowerMixture:
            // decreasing then increasing: endpoints suffice
            return std::max(excess(model, a), excess(model, b));
        case Family::TruncatedPower: {
            // decreasing on each side of the upward jump at x0
            double best = excess(model, a);
            if (model.x0 >= a && model.x0 <= b)
                best = std::max(best, 1.0 / model.x0 - 1.0);
            return best;
        }
        case Family::Tabulated: {
            double best = std::max(excess(model, a), excess(model, b));
            for (const auto& [t, g] : model.grid)
                if (t > a && t < b) best = std::max(best, excess(model, t));
            return best;
        }
    }
    return -1.0;
}

// Golden-section polish of a minimum bracketed by grid neighbors.
template <class F>
double refine_min(F f, double a, double b) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 200 && (b - a) > 1e-14; ++i) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - gr * (b - a); fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + gr * (b - a); fd = f(d);
        }
    }
    return std::min(fc, fd);
}

template <class F>
double grid_min(F f, double lo, double hi, std::size_t n = 4096) {
    double best = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
        double v = f(t);
        if (v < best) {
            best = v;
            best_i = i;
        }
    }
    double step = (hi - lo) / static_cast<double>(n);
    double a = std::max(lo, lo + step * (static_cast<double>(best_i) - 1.0));
    double b = std::min(hi, lo + step * (static_cast<double>(best_i) + 1.0));
    return std::min(best, refine_min(f, a, b));
}

}  // namespace detail

// psi_q(x) = sup over t in [qx, q] of (G(t)-t)/t; nonincreasing and
// right-continuous in x, possibly +infinity at x = 0.
inline double psi(const AlternativeModel& model, double q, double x) {
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("psi: q must lie in (0,1]");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("psi: x must lie in [0,1]");
    return detail::sup_excess(model, q * x, q);
}

// Generalized inverses of psi at level 1/y:
//   lower = min{x : psi_q(x) <= 1/y},  upper = inf{x : psi_q(x) < 1/y}.
// Equal unless psi sits at the level 1/y over an interval.
inline std::pair<double, double> psi_star(const AlternativeModel& model, double q, double y) {
    if (!(y > 0.0)) throw std::invalid_argument("psi_star: y must be positive");
    const double c = 1.0 / y;
    const double tol = 1e-12 * (1.0 + std::fabs(c));
    auto solve = [&](auto pred) {
        if (pred(psi(model, q, 0.0))) return 0.0;
        if (!pred(psi(model, q, 1.0))) return 1.0;
        double lo = 0.0, hi = 1.0;  // pred false at lo, true at hi
        for (int i = 0; i < 60; ++i) {
            double mid = 0.5 * (lo + hi);
            (pred(psi(model, q, mid)) ? hi : lo) = mid;
        }
        return hi;
    };
    double lower = solve([&](double v) { return v <= c + tol; });
    double upper = solve([&](double v) { return v < c - tol; });
    return {lower, upper};
}

struct AsymptoticSummary {
    double rho = 0.0;        // limiting rejection fraction (equals rho_lower)
    double rho_lower = 0.0;  // lower generalized inverse
    double rho_upper = 0.0;  // upper generalized inverse
    bool unique = true;      // rho_lower == rho_upper
    bool borderline = false; // degenerate knife-edge case
    bool applicable = true;  // false when gamma = 1 (no alternatives)
    std::optional<double> fdr_limit;             // q*gamma when rho > 0
    std::optional<double> pi2_limit;             // rho (1-q gamma)/(1-gamma)
    std::optional<double> pi3_complement_limit;  // gamma (1-q rho)/(1-rho)
};

namespace detail {

// Numeric route: q rho = sup{x in (0,1] : (G(x)-x)/x > c}, by a
// descending candidate scan (linear plus log-spaced near 0) and predicate
// bisection on the enclosing bracket. sup of the empty set is 0.
inline double sup_level_set(const AlternativeModel& model, double c) {
    std::vector<double> candidates;
    const std::size_t n = 4096;
    candidates.reserve(n + 64);
    for (std::size_t i = n; i >= 1; --i)
        candidates.push_back(static_cast<double>(i) / static_cast<double>(n));
    for (double t = 0.5 / static_cast<double>(n); t > 1e-300; t *= 0.25)
        candidates.push_back(t);
    // family knots, so that level sets narrower than the grid are not missed
    if (model.family == Family::Degenerate || model.family == Family::TruncatedPower) {
        if (model.x0 > 0.0 && model.x0 <= 1.0) candidates.push_back(model.x0);
    }
    if (model.family == Family::Tabulated)
        for (const auto& [t, g] : model.grid)
            if (t > 0.0 && t <= 1.0) candidates.push_back(t);
    std::sort(candidates.begin(), candidates.end(), std::greater<>());
    double lo = -1.0, hi = 1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (detail::excess(model, candidates[i]) > c) {
            lo = candidates[i];
            hi = i == 0 ? 1.0 : candidates[i - 1];
            break;
        }
    }
    if (lo < 0.0) return 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        (detail::excess(model, mid) > c ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

// Limiting rejection fraction rho(q, gamma), its generalized-inverse sandwich
// and the associated FDR / power limits.
inline AsymptoticSummary rho(const AlternativeModel& model, double q, double gamma) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("rho: q must lie in (0,1)");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("rho: gamma must lie in [0,1]");
    AsymptoticSummary out;
    if (gamma == 1.0) {
        out.applicable = false;
        out.unique = true;
        return out;
    }
    const double c = (1.0 - q) / (q * (1.0 - gamma));
    const double y = 1.0 / c;
    auto [lower, upper] = psi_star(model, q, y);
    out.rho_lower = lower;
    out.rho_upper = upper;
    out.unique = (upper - lower) <= 1e-9;
    out.rho = detail::sup_level_set(model, c) / q;
    if (!out.unique) out.rho = lower;
    if (model.family == Family::Degenerate) {
        double knife = q * (1.0 - gamma) / (1.0 - q * gamma);
        out.borderline = std::fabs(model.x0 - knife) <= 1e-9;
        if (out.borderline) out.unique = false;
    }
    if (out.unique && out.rho > 0.0) {
        out.fdr_limit = q * gamma;
        out.pi2_limit = out.rho * (1.0 - q * gamma) / (1.0 - gamma);
        out.pi3_complement_limit = gamma * (1.0 - q * out.rho) / (1.0 - out.rho);
    }
    return out;
}

struct ConcaveRoot {
    double value = 0.0;
    bool applicable = false;
};

// For concave G with G'(0+) > beta = (1-q gamma)/(q(1-gamma)): q rho is the
// smallest positive root of G(t) = beta t, found by bisection.
inline ConcaveRoot rho_concave(const AlternativeModel& model, double q, double gamma) {
    if (!(q > 0.0 && q < 1.0) || !(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("rho_concave: need q in (0,1) and gamma in [0,1)");
    const double beta = (1.0 - q * gamma) / (q * (1.0 - gamma));
    ConcaveRoot out;
    const double t0 = 1e-300;  // deep probe so steep-but-finite slopes register
    if (!(model.cdf(t0) / t0 > beta)) return out;  // G'(0+) <= beta
    out.applicable = true;
    double lo = t0, hi = 1.0;  // G(lo) > beta*lo, G(hi) <= beta*hi
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        (model.cdf(mid) > beta * mid ? lo : hi) = mid;
    }
    out.value = 0.5 * (lo + hi) / q;
    return out;
}

// Power-mixture root: solves p t^(alpha-1) + (1-p) t^(beta-1) - 1 = (1-q)/(q(1-gamma))
// for t = q rho; the solution exists and is unique for q > 0.
inline double rho_power_mixture(double p, double alpha, double beta_exp, double q,
                                double gamma) {
    AlternativeModel model = AlternativeModel::power_mixture(p, alpha, beta_exp);
    if (!(q > 0.0 && q < 1.0) || !(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("rho_power_mixture: need q in (0,1) and gamma in [0,1)");
    const double c = (1.0 - q) / (q * (1.0 - gamma));
    auto e = [&](double t) {
        return p * std::pow(t, alpha - 1.0) + (1.0 - p) * std::pow(t, beta_exp - 1.0) - 1.0;
    };
    double lo = 0.0, hi = 1.0;  // e > c on (0, t*), <= c after
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        ((mid > 0.0 && e(mid) > c) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) / q;
}

struct BorderlineLimits {
    double r_over_m = 0.0;        // (1-gamma)/(2(1-q gamma))
    double pi2 = 0.5;
    double pi3_complement = 0.0;  // gamma(2-q-q gamma)/(1+gamma-2 q gamma)
};

// Limits for the degenerate knife-edge x0 = q(1-gamma)/(1-q gamma).
inline BorderlineLimits borderline_limits(double q, double gamma) {
    BorderlineLimits out;
    out.r_over_m = (1.0 - gamma) / (2.0 * (1.0 - q * gamma));
    out.pi2 = 0.5;
    out.pi3_complement =
        gamma * (2.0 - q - q * gamma) / (1.0 + gamma - 2.0 * q * gamma);
    return out;
}

// kappa(x) = min over t in [0,x] of (1-G(t))/(1-t); in [0,1] since t=0 gives 1.
inline double kappa(const AlternativeModel& model, double x) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument("kappa: x must lie in (0,1)");
    switch (model.family) {
        case Family::Degenerate:
            return x >= model.x0 ? 0.0 : 1.0;
        case Family::Power:
            // nonincreasing density, so the minimum sits at t = x
            return (1.0 - std::pow(x, model.alpha)) / (1.0 - x);
        case Family::TruncatedPower:
            if (x >= model.x0) return 0.0;
            return (1.0 - std::pow(x, model.alpha)) / (1.0 - x);
        case Family::PowerMixture:
        case Family::Tabulated:
            return std::min(1.0, detail::grid_min(
                [&](double t) { return (1.0 - model.cdf(t)) / (1.0 - t); }, 0.0, x));
    }
    return 1.0;
}

struct BhsBounds {
    double kappa_x = 1.0;
    double q_limit = 0.0;   // delta / (gamma + (1-gamma) kappa(x))
    double fdr_lo = 0.0, fdr_hi = 0.0;      // limiting FDR band
    double power_lo = 0.0, power_hi = 0.0;  // limiting power band
    bool applicable = false;
    std::string diagnostic;
};

// FDR / power bands of the data-driven level procedure; verifies rho > 0 at
// both ends of [q(x,delta), delta/gamma].
inline BhsBounds bhs_bounds(const AlternativeModel& model, double gamma, double delta,
                            double x) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("bhs_bounds: gamma must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0) || !(x > 0.0 && x < 1.0))
        throw std::invalid_argument("bhs_bounds: delta and x must lie in (0,1)");
    BhsBounds out;
    out.kappa_x = kappa(model, x);
    const double denom = gamma + (1.0 - gamma) * out.kappa_x;
    out.q_limit = delta / denom;
    out.fdr_lo = delta * gamma / denom;
    out.fdr_hi = delta;
    const double q_hi = delta / gamma;
    if (!(q_hi < 1.0)) {
        out.diagnostic = "delta/gamma >= 1: upper procedure level leaves (0,1)";
        return out;
    }
    AsymptoticSummary lo_sum = rho(model, out.q_limit, gamma);
    AsymptoticSummary hi_sum = rho(model, q_hi, gamma);
    if (!lo_sum.unique || lo_sum.rho <= 0.0 || !hi_sum.unique || hi_sum.rho <= 0.0) {
        out.diagnostic = "rho(q, gamma) not positive and unique across [q(x,delta), delta/gamma]";
        return out;
    }
    out.power_lo = lo_sum.rho * (1.0 - out.fdr_lo) / (1.0 - gamma);
    out.power_hi = hi_sum.rho * (1.0 - delta) / (1.0 - gamma);
    out.applicable = true;
    return out;
}

struct GridSpec {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 100;  // number of intervals; n+1 rows inclusive

    double point(std::size_t i) const {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    }
};

using FigureRow = std::array<double, 3>;

// (t, uniform density 1, mixture density h(t))
inline std::vector<FigureRow> fig1_rows(const AlternativeModel& model, double gamma,
                                        const GridSpec& grid) {
    if (!model.has_density())
        throw std::invalid_argument("fig1: alternative family has no density");
    MixtureSpec spec{gamma, model, DependenceModel::independent(), 0};
    std::vector<FigureRow> rows;
    for (std::size_t i = 0; i <= grid.n; ++i) {
        double t = grid.point(i);
        if (!(t > 0.0 && t < 1.0)) continue;
        rows.push_back({t, 1.0, spec.mixture_density(t)});
    }
    return rows;
}

// (q, asymptotic power, asymptotic fdr)
inline std::vector<FigureRow> fig2_rows(const AlternativeModel& model, double gamma,
                                        const GridSpec& grid) {
    std::vector<FigureRow> rows;
    for (std::size_t i = 0; i <= grid.n; ++i) {
        double q = grid.point(i);
        if (!(q > 0.0 && q < 1.0)) continue;
        AsymptoticSummary s = rho(model, q, gamma);
        double power = (s.unique && s.rho > 0.0) ? s.rho * (1.0 - q * gamma) / (1.0 - gamma) : 0.0;
        double fdr = (s.unique && s.rho > 0.0) ? q * gamma : 0.0;
        rows.push_back({q, power, fdr});
    }
    return rows;
}

// (x, power lower bound, power upper bound); the upper bound is constant in x.
inline std::vector<FigureRow> fig3_rows(const AlternativeModel& model, double gamma,
                                        double delta, const GridSpec& grid) {
    std::vector<FigureRow> rows;
    for (std::size_t i = 0; i <= grid.n; ++i) {
        double x = grid.point(i);
        if (!(x > 0.0 && x < 1.0)) continue;
        BhsBounds b = bhs_bounds(model, gamma, delta, x);
        rows.push_back({x, b.power_lo, b.power_hi});
    }
    return rows;
}

}  // namespace fdrlab
