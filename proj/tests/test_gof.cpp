#include <cmath>
#include <vector>

#include <doctest.h>

#include "fdrlab/gof.hpp"
#include "fdrlab/procedures.hpp"
#include "fdrlab/rng.hpp"

using namespace fdrlab;

namespace {

PValueBatch make_batch(std::vector<double> values) {
    PValueBatch b;
    b.values = std::move(values);
    return b;
}

PValueBatch random_batch(std::size_t m, double q, Rng& rng) {
    PValueBatch batch;
    batch.values.resize(m);
    for (auto& v : batch.values) {
        v = rng.uniform();
        // snap to a step-up grid point half the time so ties are exercised
        if (rng.uniform() < 0.5) {
            auto i = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(m));
            v = std::min(1.0, q * static_cast<double>(std::min(i, m)) / static_cast<double>(m));
        }
    }
    return batch;
}

}  // namespace

TEST_CASE("empirical cdf") {
    EmpiricalCdf h(std::vector<double>{0.2, 0.2, 0.8});
    CHECK(h(0.1) == 0.0);
    CHECK(h(0.2) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(h(0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(h(1.0) == 1.0);
    CHECK(h.count_leq(0.2) == 2);
    EmpiricalCdf empty(std::vector<double>{});
    CHECK(empty(0.5) == 0.0);
}

TEST_CASE("grid statistic on small batches") {
    CHECK(psi_grid(make_batch({0.1}), 0.5, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi_grid(make_batch({1.0, 1.0, 1.0, 1.0}), 0.5, 1) ==
          doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(psi_grid(make_batch({0.01, 0.2, 0.3, 0.9}), 0.5, 1) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi_grid(make_batch({0.01, 0.2, 0.3, 0.9}), 0.5, 4) ==
          doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(psi_grid(make_batch({0.1}), 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(psi_grid(make_batch({0.1}), 0.5, 2), std::invalid_argument);
    CHECK_THROWS_AS(psi_grid(make_batch({0.1}), 0.0, 1), std::invalid_argument);
}

TEST_CASE("sup statistic dominates the grid statistic") {
    CHECK(renyi_sup(make_batch({1.0, 1.0}), 0.5, 0.25) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(renyi_sup(make_batch({0.3}), 0.5, 0.1) ==
          doctest::Approx(7.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(renyi_sup(make_batch({0.3}), 0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(renyi_sup(make_batch({0.3}), 0.5, 0.6), std::invalid_argument);

    Rng rng(42, 21);
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 15.0);
        double q = 0.05 + 0.9 * rng.uniform();
        PValueBatch batch = random_batch(m, q, rng);
        // the computed grid points q*k/m can stick out of [q*r/m, q] by an
        // ulp; widen the sup window accordingly
        double upper = std::max(q, q * static_cast<double>(m) / static_cast<double>(m));
        for (std::size_t r = 1; r <= m; ++r) {
            double lower =
                std::min(upper, q * static_cast<double>(r) / static_cast<double>(m));
            CHECK(psi_grid(batch, q, r) <= renyi_sup(batch, upper, lower) + 1e-12);
        }
    }
}

TEST_CASE("rejection count via the goodness-of-fit identity") {
    Rng rng(42, 22);
    // exhaustive-ish sweep over small batches and a rational q grid
    for (std::size_t m = 1; m <= 8; ++m) {
        for (int b = 0; b < 200; ++b) {
            PValueBatch batch = random_batch(m, 0.5, rng);
            for (int j = 1; j <= 64; ++j) {
                double q = static_cast<double>(j) / 64.0;
                CHECK(bh_via_gof(batch, q) == bh_count(batch, q).r);
            }
        }
    }
    // larger random batches
    for (int b = 0; b < 2000; ++b) {
        auto m = static_cast<std::size_t>(9 + rng.uniform() * 150.0);
        double q = 0.02 + 0.97 * rng.uniform();
        PValueBatch batch = random_batch(m, q, rng);
        CHECK(bh_via_gof(batch, q) == bh_count(batch, q).r);
    }
    CHECK(bh_via_gof(make_batch({}), 0.5) == 0);
}

TEST_CASE("no-rejection probability matches the closed form") {
    // exact for two i.i.d. uniforms: P(R=0) = 1-q
    auto est = no_rejection_probability(2, 0.3, 20000, 42);
    CHECK(std::fabs(est.estimate - 0.7) <= 3.0 * est.se);
    CHECK(est.reps == 20000);
    CHECK(est.se > 0.0);
    CHECK_THROWS_AS(no_rejection_probability(0, 0.3, 10, 42), std::invalid_argument);
    CHECK_THROWS_AS(no_rejection_probability(10, 0.0, 10, 42), std::invalid_argument);
}
