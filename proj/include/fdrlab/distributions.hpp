#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fdrlab/batch.hpp"
#include "fdrlab/rng.hpp"

namespace fdrlab {

enum class Family { Degenerate, Power, PowerMixture, TruncatedPower, Tabulated };

// Alternative (non-null) distribution G, concentrated on [0,1].
struct AlternativeModel {
    Family family = Family::Power;
    double x0 = 0.0;     // Degenerate atom / TruncatedPower cutoff
    double alpha = 0.5;  // exponent in (0,1)
    double beta = 2.0;   // exponent > 1 (PowerMixture)
    double p = 0.5;      // mixture weight (PowerMixture)
    std::vector<std::pair<double, double>> grid;  // Tabulated: (t, G(t)), nondecreasing

    static AlternativeModel degenerate(double x0) {
        if (!(x0 >= 0.0 && x0 <= 1.0))
            throw std::invalid_argument("degenerate: x0 must lie in [0,1]");
        AlternativeModel m;
        m.family = Family::Degenerate;
        m.x0 = x0;
        return m;
    }

    static AlternativeModel power(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("power: alpha must lie in (0,1)");
        AlternativeModel m;
        m.family = Family::Power;
        m.alpha = alpha;
        return m;
    }

    static AlternativeModel power_mixture(double p, double alpha, double beta) {
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("powermix: p must lie in (0,1)");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("powermix: alpha must lie in (0,1)");
        if (!(beta > 1.0))
            throw std::invalid_argument("powermix: beta must exceed 1");
        AlternativeModel m;
        m.family = Family::PowerMixture;
        m.p = p;
        m.alpha = alpha;
        m.beta = beta;
        return m;
    }

    static AlternativeModel truncated_power(double alpha, double x0) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("truncpower: alpha must lie in (0,1)");
        if (!(x0 > 0.0 && x0 < 1.0))
            throw std::invalid_argument("truncpower: x0 must lie in (0,1)");
        AlternativeModel m;
        m.family = Family::TruncatedPower;
        m.alpha = alpha;
        m.x0 = x0;
        return m;
    }

    static AlternativeModel tabulated(std::vector<std::pair<double, double>> pts) {
        if (pts.size() < 2)
            throw std::invalid_argument("tabulated: need at least two grid points");
        double prev_t = -1.0, prev_g = -1.0;
        for (auto& [t, g] : pts) {
            if (!(t >= 0.0 && t <= 1.0) || !(g >= 0.0 && g <= 1.0))
                throw std::invalid_argument("tabulated: grid values must lie in [0,1]");
            if (t < prev_t || g < prev_g)
                throw std::invalid_argument("tabulated: grid must be nondecreasing");
            prev_t = t;
            prev_g = g;
        }
        if (pts.front().first != 0.0) pts.insert(pts.begin(), {0.0, 0.0});
        if (pts.back().first != 1.0 || pts.back().second != 1.0) pts.push_back({1.0, 1.0});
        AlternativeModel m;
        m.family = Family::Tabulated;
        m.grid = std::move(pts);
        return m;
    }

    // G(t); exact for the closed families, linear interpolation for Tabulated.
    double cdf(double t) const {
        if (t < 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        switch (family) {
            case Family::Degenerate:
                return t >= x0 ? 1.0 : 0.0;
            case Family::Power:
                return std::pow(t, alpha);
            case Family::PowerMixture:
                return p * std::pow(t, alpha) + (1.0 - p) * std::pow(t, beta);
            case Family::TruncatedPower:
                return t >= x0 ? 1.0 : std::pow(t, alpha);
            case Family::Tabulated: {
                auto it = std::upper_bound(grid.begin(), grid.end(), t,
                                           [](double v, const auto& pt) { return v < pt.first; });
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                if (hi.first == lo.first) return hi.second;
                double w = (t - lo.first) / (hi.first - lo.first);
                return lo.second + w * (hi.second - lo.second);
            }
        }
        return 0.0;
    }

    // Generalized inverse min{t : G(t) >= u}.
    double quantile(double u) const {
        if (!(u >= 0.0 && u <= 1.0))
            throw std::invalid_argument("quantile: u must lie in [0,1]");
        if (u == 0.0) return 0.0;
        switch (family) {
            case Family::Degenerate:
                return x0;
            case Family::Power:
                return std::pow(u, 1.0 / alpha);
            case Family::TruncatedPower: {
                double cap = std::pow(x0, alpha);
                return u <= cap ? std::pow(u, 1.0 / alpha) : x0;
            }
            case Family::PowerMixture: {
                // cdf is continuous and strictly increasing; bisect.
                double lo = 0.0, hi = 1.0;
                for (int i = 0; i < 100; ++i) {
                    double mid = 0.5 * (lo + hi);
                    (cdf(mid) >= u ? hi : lo) = mid;
                }
                return hi;
            }
            case Family::Tabulated: {
                auto it = std::lower_bound(grid.begin(), grid.end(), u,
                                           [](const auto& pt, double v) { return pt.second < v; });
                if (it == grid.begin()) return it->first;
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                if (hi.second == lo.second) return hi.first;
                double w = (u - lo.second) / (hi.second - lo.second);
                return lo.first + w * (hi.first - lo.first);
            }
        }
        return 0.0;
    }

    bool has_density() const { return family != Family::Degenerate; }

    // Density of the absolutely continuous part on (0,1].
    double density(double t) const {
        if (!(t > 0.0 && t <= 1.0))
            throw std::invalid_argument("density: t must lie in (0,1]");
        switch (family) {
            case Family::Degenerate:
                throw std::invalid_argument("density: degenerate family has no density");
            case Family::Power:
                return alpha * std::pow(t, alpha - 1.0);
            case Family::PowerMixture:
                return p * alpha * std::pow(t, alpha - 1.0) +
                       (1.0 - p) * beta * std::pow(t, beta - 1.0);
            case Family::TruncatedPower:
                return t < x0 ? alpha * std::pow(t, alpha - 1.0) : 0.0;
            case Family::Tabulated: {
                auto it = std::upper_bound(grid.begin(), grid.end(), t,
                                           [](double v, const auto& pt) { return v < pt.first; });
                if (it == grid.end()) --it;  // t == 1: use the last segment
                const auto& hi = *it;
                const auto& lo = *(it - 1);
                if (hi.first == lo.first) return 0.0;
                return (hi.second - lo.second) / (hi.first - lo.first);
            }
        }
        return 0.0;
    }
};

// Dependence structure of the null block. All kinds keep uniform marginals;
// the dependent ones are Gaussian-copula constructions.
struct DependenceModel {
    enum class Kind { Independent, Equicorrelated, Ar1Copula };
    Kind kind = Kind::Independent;
    double rho_c = 0.0;  // Equicorrelated: correlation in [0,1)
    double phi = 0.0;    // Ar1Copula: autoregression coefficient in (-1,1)

    static DependenceModel independent() { return {}; }

    static DependenceModel equicorrelated(double rho_c) {
        if (!(rho_c >= 0.0 && rho_c < 1.0))
            throw std::invalid_argument("equicorrelated: rho_c must lie in [0,1)");
        DependenceModel d;
        d.kind = Kind::Equicorrelated;
        d.rho_c = rho_c;
        return d;
    }

    static DependenceModel ar1(double phi) {
        if (!(phi > -1.0 && phi < 1.0))
            throw std::invalid_argument("ar1: phi must lie in (-1,1)");
        DependenceModel d;
        d.kind = Kind::Ar1Copula;
        d.phi = phi;
        return d;
    }
};

// Null fraction gamma, alternative model, null dependence and total count.
struct MixtureSpec {
    double gamma = 1.0;
    AlternativeModel alt;
    DependenceModel null_dependence;
    std::size_t m = 0;

    std::size_t m0() const { return static_cast<std::size_t>(std::lround(gamma * static_cast<double>(m))); }

    void validate() const {
        if (!(gamma >= 0.0 && gamma <= 1.0))
            throw std::invalid_argument("mixture: gamma must lie in [0,1]");
    }

    double mixture_cdf(double t) const {
        if (!(t >= 0.0 && t <= 1.0))
            throw std::invalid_argument("mixture_cdf: t must lie in [0,1]");
        return gamma * t + (1.0 - gamma) * alt.cdf(t);
    }

    double mixture_density(double t) const {
        if (gamma < 1.0 && !alt.has_density())
            throw std::invalid_argument("mixture_density: alternative family has no density");
        return gamma + (gamma < 1.0 ? (1.0 - gamma) * alt.density(t) : 0.0);
    }
};

inline std::vector<double> sample_nulls(std::size_t n, const DependenceModel& dep, Rng& rng) {
    std::vector<double> out(n);
    switch (dep.kind) {
        case DependenceModel::Kind::Independent:
            for (auto& v : out) v = rng.uniform();
            break;
        case DependenceModel::Kind::Equicorrelated: {
            // Conditionally i.i.d. given one shared latent normal.
            double w = rng.normal();
            double a = std::sqrt(dep.rho_c), b = std::sqrt(1.0 - dep.rho_c);
            for (auto& v : out) v = normal_cdf(a * w + b * rng.normal());
            break;
        }
        case DependenceModel::Kind::Ar1Copula: {
            double z = rng.normal();
            double b = std::sqrt(1.0 - dep.phi * dep.phi);
            for (std::size_t i = 0; i < n; ++i) {
                if (i > 0) z = dep.phi * z + b * rng.normal();
                out[i] = normal_cdf(z);
            }
            break;
        }
    }
    return out;
}

inline std::vector<double> sample_nulls(std::size_t n, const DependenceModel& dep,
                                        std::uint64_t seed) {
    Rng rng(seed);
    return sample_nulls(n, dep, rng);
}

// Draws m0 = round(gamma*m) nulls followed by m-m0 alternatives (quantile
// transform of i.i.d. uniforms), with truth labels.
inline PValueBatch sample_mixture(const MixtureSpec& spec, Rng& rng) {
    spec.validate();
    const std::size_t m0 = spec.m0();
    PValueBatch batch;
    batch.values = sample_nulls(m0, spec.null_dependence, rng);
    batch.values.reserve(spec.m);
    batch.labels.assign(m0, Label::Null);
    batch.labels.reserve(spec.m);
    for (std::size_t i = m0; i < spec.m; ++i) {
        batch.values.push_back(spec.alt.quantile(rng.uniform()));
        batch.labels.push_back(Label::Alternative);
    }
    return batch;
}

inline PValueBatch sample_mixture(const MixtureSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return sample_mixture(spec, rng);
}

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline std::map<std::string, double> parse_kv(std::string_view s) {
    std::map<std::string, double> kv;
    std::stringstream ss{std::string(s)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("model spec: expected key=value, got '" + item + "'");
        std::string key = lower(item.substr(0, eq));
        std::size_t pos = 0;
        double val = std::stod(item.substr(eq + 1), &pos);
        if (pos != item.size() - eq - 1)
            throw std::invalid_argument("model spec: bad number in '" + item + "'");
        kv[key] = val;
    }
    return kv;
}

}  // namespace detail

// Parses the text form, e.g. "power:alpha=0.1", "degenerate:x0=0.3",
// "powermix:p=0.5,alpha=0.5,beta=2", "truncpower:alpha=0.1,x0=0.6".
inline AlternativeModel parse_model(std::string_view spec) {
    auto colon = spec.find(':');
    std::string name = detail::lower(spec.substr(0, colon));
    auto kv = colon == std::string_view::npos ? std::map<std::string, double>{}
                                              : detail::parse_kv(spec.substr(colon + 1));
    auto need = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument("model spec: missing parameter '" + std::string(key) + "'");
        return it->second;
    };
    if (name == "degenerate") return AlternativeModel::degenerate(need("x0"));
    if (name == "power") return AlternativeModel::power(need("alpha"));
    if (name == "powermix")
        return AlternativeModel::power_mixture(need("p"), need("alpha"), need("beta"));
    if (name == "truncpower")
        return AlternativeModel::truncated_power(need("alpha"), need("x0"));
    throw std::invalid_argument("model spec: unknown family '" + name + "'");
}

inline std::string format_model(const AlternativeModel& m) {
    std::ostringstream os;
    os.precision(17);
    switch (m.family) {
        case Family::Degenerate: os << "degenerate:x0=" << m.x0; break;
        case Family::Power: os << "power:alpha=" << m.alpha; break;
        case Family::PowerMixture:
            os << "powermix:p=" << m.p << ",alpha=" << m.alpha << ",beta=" << m.beta;
            break;
        case Family::TruncatedPower:
            os << "truncpower:alpha=" << m.alpha << ",x0=" << m.x0;
            break;
        case Family::Tabulated: os << "tabulated"; break;
    }
    return os.str();
}

}  // namespace fdrlab
