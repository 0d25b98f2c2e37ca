#include <cmath>
#include <vector>

#include <doctest.h>

#include "fdrlab/rng.hpp"
#include "fdrlab/theory.hpp"

using namespace fdrlab;

namespace {

// Dense-grid oracle for the scaled-excess supremum over [q x, q], with the
// family's kink locations added so jumps are not missed.
double psi_oracle(const AlternativeModel& model, double q, double x) {
    double a = q * x, b = q;
    std::vector<double> ts;
    const std::size_t n = 20000;
    for (std::size_t i = 0; i <= n; ++i)
        ts.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
    if (model.x0 > a && model.x0 < b) ts.push_back(model.x0);
    for (const auto& [t, g] : model.grid)
        if (t > a && t < b) ts.push_back(t);
    double best = -std::numeric_limits<double>::infinity();
    for (double t : ts) {
        double v = t <= 0.0 ? -std::numeric_limits<double>::infinity()
                            : (model.cdf(t) - t) / t;
        best = std::max(best, v);
    }
    return best;
}

double kappa_oracle(const AlternativeModel& model, double x) {
    double best = 1.0;
    const std::size_t n = 200000;
    for (std::size_t i = 1; i <= n; ++i) {
        double t = x * static_cast<double>(i) / static_cast<double>(n);
        best = std::min(best, (1.0 - model.cdf(t)) / (1.0 - t));
    }
    return best;
}

}  // namespace

TEST_CASE("scaled-excess supremum: closed cases") {
    // atom above the window: the excess is identically -1
    CHECK(psi(AlternativeModel::degenerate(0.6), 0.5, 0.5) == -1.0);
    CHECK(psi(AlternativeModel::degenerate(0.6), 0.5, 0.0) == -1.0);
    // atom inside the window
    CHECK(psi(AlternativeModel::degenerate(0.1), 0.5, 0.0) ==
          doctest::Approx(9.0).epsilon(1e-12));
    CHECK(psi(AlternativeModel::degenerate(0.1), 0.5, 0.2) ==
          doctest::Approx(9.0).epsilon(1e-12));
    // atom below the window: G = 1 throughout, sup at the left endpoint
    CHECK(psi(AlternativeModel::degenerate(0.1), 0.5, 0.5) ==
          doctest::Approx(3.0).epsilon(1e-12));
    // concave power: supremum at the left endpoint
    CHECK(psi(AlternativeModel::power(0.5), 0.25, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(psi(AlternativeModel::power(0.5), 0.25, 0.0)));
    CHECK_THROWS_AS(psi(AlternativeModel::power(0.5), 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(psi(AlternativeModel::power(0.5), 0.5, 1.5), std::invalid_argument);
}

TEST_CASE("scaled-excess supremum agrees with a dense-grid oracle") {
    Rng rng(42, 31);
    std::vector<AlternativeModel> models = {
        AlternativeModel::power(0.1),
        AlternativeModel::power(0.7),
        AlternativeModel::power_mixture(0.5, 0.5, 2.0),
        AlternativeModel::power_mixture(0.2, 0.1, 4.0),
        AlternativeModel::truncated_power(0.1, 0.6),
        AlternativeModel::degenerate(0.3),
        AlternativeModel::tabulated({{0.0, 0.0}, {0.1, 0.6}, {0.5, 0.8}, {1.0, 1.0}}),
    };
    for (const auto& model : models) {
        for (int rep = 0; rep < 40; ++rep) {
            double q = 0.05 + 0.9 * rng.uniform();
            double x = 0.05 + 0.9 * rng.uniform();
            double exact = psi(model, q, x);
            double grid = psi_oracle(model, q, x);
            CHECK(exact >= grid - 1e-9);
            CHECK(exact - grid <= 1e-5 * (1.0 + std::fabs(grid)));
        }
        // nonincreasing in x
        double q = 0.4, prev = psi(model, q, 0.01);
        for (double x = 0.05; x <= 1.0; x += 0.05) {
            double cur = psi(model, q, x);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("generalized inverses of the supremum") {
    // excess identically -1: below any positive level everywhere
    auto [lo0, hi0] = psi_star(AlternativeModel::degenerate(0.9), 0.5, 2.0);
    CHECK(lo0 == 0.0);
    CHECK(hi0 == 0.0);
    // strictly decreasing branch: 2/x - 1 crosses the level 2 at x = 2/3
    auto [lo1, hi1] = psi_star(AlternativeModel::degenerate(0.1), 0.5, 0.5);
    CHECK(lo1 == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(hi1 == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    // knife edge: the supremum sits exactly at the level over [0, x0/q]
    auto [lo2, hi2] = psi_star(AlternativeModel::degenerate(1.0 / 3.0), 0.5, 0.5);
    CHECK(lo2 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(hi2 == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK_THROWS_AS(psi_star(AlternativeModel::power(0.5), 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("limiting rejection fraction: degenerate closed forms") {
    // atom below the knife edge: everything is eventually rejected
    auto s = rho(AlternativeModel::degenerate(0.2), 0.5, 0.5);
    CHECK(s.applicable);
    CHECK(s.unique);
    CHECK_FALSE(s.borderline);
    CHECK(s.rho == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    CHECK(*s.fdr_limit == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(*s.pi2_limit == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(*s.pi3_complement_limit == doctest::Approx(1.0).epsilon(1e-9));

    // atom above the knife edge: nothing is rejected in the limit
    auto z = rho(AlternativeModel::degenerate(0.9), 0.2, 0.5);
    CHECK(z.rho == doctest::Approx(0.0).epsilon(1e-10));
    CHECK_FALSE(z.fdr_limit.has_value());

    // knife edge itself
    auto b = rho(AlternativeModel::degenerate(1.0 / 3.0), 0.5, 0.5);
    CHECK(b.borderline);
    CHECK_FALSE(b.unique);
    CHECK(b.rho_lower == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(b.rho_upper == doctest::Approx(2.0 / 3.0).epsilon(1e-6));

    // no alternatives at all
    auto g1 = rho(AlternativeModel::power(0.1), 0.2, 1.0);
    CHECK_FALSE(g1.applicable);

    CHECK_THROWS_AS(rho(AlternativeModel::power(0.1), 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(rho(AlternativeModel::power(0.1), 0.2, 1.5), std::invalid_argument);
}

TEST_CASE("limiting rejection fraction: power family values") {
    AlternativeModel model = AlternativeModel::power(0.1);
    {
        auto s = rho(model, 0.2, 0.5);
        double closed = std::pow(0.2 * 0.5 / 0.9, 1.0 / 0.9) / 0.2;
        CHECK(s.unique);
        CHECK(s.rho == doctest::Approx(closed).epsilon(1e-10));
        CHECK(*s.pi2_limit == doctest::Approx(0.784).epsilon(2e-3));
        CHECK(*s.fdr_limit == doctest::Approx(0.1).epsilon(1e-12));
    }
    {
        auto s = rho(model, 0.111, 0.9);
        CHECK(*s.pi2_limit == doctest::Approx(0.614).epsilon(2e-3));
        CHECK(*s.fdr_limit == doctest::Approx(0.111 * 0.9).epsilon(1e-12));
    }
}

TEST_CASE("concave-root and mixture-root solvers") {
    {
        AlternativeModel model = AlternativeModel::power(0.5);
        auto root = rho_concave(model, 0.2, 0.5);
        REQUIRE(root.applicable);
        // q rho solves t^0.5 = beta t with beta = 0.9/0.1 = 9, so t = 1/81
        CHECK(root.value == doctest::Approx(1.0 / 81.0 / 0.2).epsilon(1e-10));
        CHECK(rho(model, 0.2, 0.5).rho == doctest::Approx(root.value).epsilon(1e-10));
    }
    {
        // steep enough line: no positive crossing
        AlternativeModel flat = AlternativeModel::tabulated({{0.0, 0.0}, {1.0, 1.0}});
        auto root = rho_concave(flat, 0.2, 0.5);
        CHECK_FALSE(root.applicable);
    }
    {
        double value = rho_power_mixture(0.5, 0.5, 2.0, 0.2, 0.5);
        AlternativeModel model = AlternativeModel::power_mixture(0.5, 0.5, 2.0);
        CHECK(rho(model, 0.2, 0.5).rho == doctest::Approx(value).epsilon(1e-10));
        // the root satisfies the displayed equation
        double t = value * 0.2;
        double resid = 0.5 * std::pow(t, -0.5) + 0.5 * t - 1.0 - 0.8 / (0.2 * 0.5);
        CHECK(std::fabs(resid) <= 1e-6);
    }
}

TEST_CASE("knife-edge limits") {
    auto lim = borderline_limits(0.5, 0.5);
    CHECK(lim.r_over_m == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(lim.pi2 == 0.5);
    CHECK(lim.pi3_complement == doctest::Approx(0.625).epsilon(1e-14));
    // vanishing level: half the alternatives in the limit
    CHECK(borderline_limits(1e-12, 0.3).r_over_m == doctest::Approx(0.35).epsilon(1e-9));
}

TEST_CASE("minimum tail ratio") {
    AlternativeModel power = AlternativeModel::power(0.1);
    CHECK(kappa(power, 0.5) == doctest::Approx(0.1339340).epsilon(1e-5));
    CHECK(kappa(power, 0.5) == doctest::Approx(kappa_oracle(power, 0.5)).epsilon(1e-6));
    CHECK(kappa(AlternativeModel::power(0.5), 1e-8) == doctest::Approx(1.0).epsilon(1e-3));

    AlternativeModel trunc = AlternativeModel::truncated_power(0.1, 0.6);
    CHECK(kappa(trunc, 0.8) == 0.0);
    CHECK(kappa(trunc, 0.6) == 0.0);
    CHECK(kappa(trunc, 0.5) == doctest::Approx(kappa_oracle(trunc, 0.5)).epsilon(1e-6));

    AlternativeModel deg = AlternativeModel::degenerate(0.3);
    CHECK(kappa(deg, 0.2) == 1.0);
    CHECK(kappa(deg, 0.5) == 0.0);

    AlternativeModel mix = AlternativeModel::power_mixture(0.5, 0.5, 2.0);
    CHECK(kappa(mix, 0.5) == doctest::Approx(kappa_oracle(mix, 0.5)).epsilon(1e-6));

    CHECK_THROWS_AS(kappa(power, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kappa(power, 1.0), std::invalid_argument);
}

TEST_CASE("data-driven level bounds") {
    AlternativeModel model = AlternativeModel::power(0.1);
    auto b = bhs_bounds(model, 0.5, 0.1, 0.5);
    REQUIRE(b.applicable);
    CHECK(b.kappa_x == doctest::Approx(0.1339340).epsilon(1e-5));
    CHECK(b.q_limit == doctest::Approx(0.176378).epsilon(1e-4));
    CHECK(b.fdr_lo == doctest::Approx(0.088189).epsilon(1e-4));
    CHECK(b.fdr_hi == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(b.power_hi == doctest::Approx(0.784).epsilon(2e-3));
    CHECK(b.power_lo < b.power_hi);
    CHECK(b.power_lo > 0.0);
    CHECK(b.fdr_lo <= b.fdr_hi);

    // the target level must stay below one
    auto bad = bhs_bounds(model, 0.5, 0.6, 0.5);
    CHECK_FALSE(bad.applicable);
    CHECK_FALSE(bad.diagnostic.empty());

    // a far atom yields no rejections in the limit
    auto flat = bhs_bounds(AlternativeModel::degenerate(0.95), 0.5, 0.1, 0.5);
    CHECK_FALSE(flat.applicable);
    CHECK_FALSE(flat.diagnostic.empty());

    CHECK_THROWS_AS(bhs_bounds(model, 1.0, 0.1, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(bhs_bounds(model, 0.5, 0.1, 1.0), std::invalid_argument);

    // band ordering over random admissible parameters
    Rng rng(42, 32);
    for (int rep = 0; rep < 50; ++rep) {
        double alpha = 0.05 + 0.5 * rng.uniform();
        double gamma = 0.2 + 0.6 * rng.uniform();
        double delta = 0.05 + 0.8 * (gamma - 1e-6) * rng.uniform();
        double x = 0.05 + 0.9 * rng.uniform();
        if (!(delta / gamma < 1.0)) continue;
        auto bb = bhs_bounds(AlternativeModel::power(alpha), gamma, delta, x);
        if (!bb.applicable) continue;
        CHECK(bb.fdr_lo <= bb.fdr_hi + 1e-12);
        CHECK(bb.power_lo <= bb.power_hi + 1e-9);
        CHECK(bb.q_limit <= delta / gamma + 1e-12);
    }
}

TEST_CASE("figure tables") {
    AlternativeModel model = AlternativeModel::power(0.1);
    GridSpec grid{0.0, 1.0, 100};

    auto f1 = fig1_rows(model, 0.5, grid);
    CHECK(f1.size() == 99);  // interior points only
    for (const auto& row : f1) {
        CHECK(row[1] == 1.0);
        CHECK(row[2] ==
              doctest::Approx(0.5 + 0.5 * model.density(row[0])).epsilon(1e-12));
    }
    CHECK_THROWS_AS(fig1_rows(AlternativeModel::degenerate(0.3), 0.5, grid),
                    std::invalid_argument);

    auto f2 = fig2_rows(model, 0.5, grid);
    bool found = false;
    for (const auto& row : f2) {
        if (std::fabs(row[0] - 0.2) < 1e-12) {
            found = true;
            CHECK(row[1] == doctest::Approx(0.784).epsilon(2e-3));
            CHECK(row[2] == doctest::Approx(0.1).epsilon(1e-9));
        }
        CHECK(row[1] >= 0.0);
        CHECK(row[2] <= row[0]);
    }
    CHECK(found);

    auto f3 = fig3_rows(model, 0.5, 0.1, grid);
    REQUIRE(!f3.empty());
    double hi = f3.front()[2];
    for (const auto& row : f3) {
        CHECK(row[2] == doctest::Approx(hi).epsilon(1e-9));  // upper bound constant in x
        CHECK(row[1] <= row[2] + 1e-9);
    }

    // ideal truncated family: bands collapse once the cutoff passes the support
    auto f3t = fig3_rows(AlternativeModel::truncated_power(0.1, 0.6), 0.5, 0.1, grid);
    for (const auto& row : f3t)
        if (row[0] >= 0.6) CHECK(row[1] == doctest::Approx(row[2]).epsilon(1e-9));
}
