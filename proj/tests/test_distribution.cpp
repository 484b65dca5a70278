#include <algorithm>
#include <random>

#include "doctest.h"
#include "riskshape/csv.hpp"
#include "riskshape/distribution.hpp"

using namespace riskshape;

namespace {

ScenarioMatrix appendix() {
    static const Dataset ds = load_csv("data/markowitz1959.csv");
    return ds.scenarios;
}

ScenarioMatrix single_asset(Vec returns) {
    const std::size_t m = returns.size();
    return ScenarioMatrix(m, 1, std::move(returns));
}

Vec random_weights(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vec x(n);
    double sum = 0.0;
    for (double& v : x) {
        v = uniform(rng);
        sum += v;
    }
    for (double& v : x) v /= sum;
    return x;
}

}  // namespace

TEST_CASE("portfolio returns") {
    const ScenarioMatrix s = appendix();

    Vec bond_only(s.n, 0.0);
    bond_only.back() = 1.0;
    const Vec rb = portfolio_returns(s, bond_only);
    REQUIRE(rb.size() == 18);
    for (double r : rb) CHECK(r == 0.125);

    const Vec zeros(s.n, 0.0);
    for (double r : portfolio_returns(s, zeros)) CHECK(r == 0.0);

    Vec x(s.n, 0.0);
    x[0] = 0.3;
    x[1] = 0.7;
    CHECK(portfolio_returns(s, x)[0] == doctest::Approx(-0.2126).epsilon(1e-12));

    CHECK_THROWS_AS(portfolio_returns(s, Vec{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("empirical cdf follows the strict-below convention") {
    const ScenarioMatrix s = appendix();
    Vec bond_only(s.n, 0.0);
    bond_only.back() = 1.0;
    const StepCdf bond_cdf = empirical_cdf(s, bond_only);
    REQUIRE(bond_cdf.breakpoints.size() == 1);
    CHECK(bond_cdf.breakpoints[0] == 0.125);
    CHECK(bond_cdf(0.125) == 0.0);
    CHECK(bond_cdf(0.1251) == 1.0);

    const ScenarioMatrix four = single_asset({0.0, 0.1, 0.2, 0.3});
    const StepCdf cdf = empirical_cdf(four, {1.0});
    CHECK(cdf(0.1) == 0.25);
    CHECK(cdf(0.15) == 0.5);
    CHECK(cdf(0.25) == 0.75);
    CHECK(cdf(0.0) == 0.0);
    CHECK(cdf(-5.0) == 0.0);
    CHECK(cdf(0.3 + 1e-12) == 1.0);
}

TEST_CASE("empirical quantile is the capped generalized inverse") {
    const ScenarioMatrix four = single_asset({0.0, 0.1, 0.2, 0.3});
    const StepQuantile q = empirical_quantile(four, {1.0});
    CHECK(q(0.5) == 0.2);
    CHECK(q(0.3) == 0.1);
    CHECK(q(1.0) == 0.3);
    CHECK(q(0.0) == 0.0);

    const ScenarioMatrix s = appendix();
    Vec bond_only(s.n, 0.0);
    bond_only.back() = 1.0;
    const StepQuantile qb = empirical_quantile(s, bond_only);
    for (double a : {0.0, 0.2, 0.5, 0.9, 1.0}) CHECK(qb(a) == 0.125);
}

TEST_CASE("indicators") {
    const ScenarioMatrix s = appendix();

    SUBCASE("mean of the reference mix matches the reported value") {
        Vec x(s.n, 0.0);
        x[0] = 0.3;
        x[1] = 0.7;
        CHECK(indicator(s, x, Objective::mean()) == doctest::Approx(0.0629).epsilon(2e-3));
        CHECK(std::abs(indicator(s, x, Objective::mean()) - 0.0629) < 1e-4);
    }

    SUBCASE("AVaR(0,1) equals the mean") {
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 100; ++trial) {
            const Vec x = random_weights(s.n, rng);
            const double mean = indicator(s, x, Objective::mean());
            const double avar = indicator(s, x, Objective::average_value_at_risk(0.0, 1.0));
            CHECK(std::abs(mean - avar) <= 1e-12);
        }
    }

    SUBCASE("hand-integrated AVaR window") {
        const ScenarioMatrix four = single_asset({0.0, 0.1, 0.2, 0.3});
        CHECK(indicator(four, {1.0}, Objective::average_value_at_risk(0.5, 1.0)) ==
              doctest::Approx(0.25).epsilon(1e-12));
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(Objective::value_at_risk(0.0), std::invalid_argument);
        CHECK_THROWS_AS(Objective::value_at_risk(1.0), std::invalid_argument);
        CHECK_THROWS_AS(Objective::average_value_at_risk(0.5, 0.5), std::invalid_argument);
    }
}

TEST_CASE("cdf/quantile duality on small random instances") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng() % 8;
        Vec returns(m);
        for (double& r : returns) r = uniform(rng);
        const StepCdf cdf = cdf_from_samples(returns);
        const StepQuantile q = quantile_from_samples(returns);
        for (int i = 0; i <= 100; ++i) {
            const double alpha = i / 100.0;
            CHECK(cdf(q(alpha)) <= alpha);
        }
        for (double t : returns) CHECK(q(cdf(t)) >= t);
        // monotonicity
        for (std::size_t i = 1; i < cdf.levels.size(); ++i) {
            CHECK(cdf.breakpoints[i] > cdf.breakpoints[i - 1]);
            CHECK(cdf.levels[i] >= cdf.levels[i - 1]);
        }
        for (std::size_t i = 1; i < q.values.size(); ++i) {
            CHECK(q.grid[i] >= q.grid[i - 1]);
            CHECK(q.values[i] >= q.values[i - 1]);
        }
        CHECK(cdf.levels.back() == 1.0);
    }
}

TEST_CASE("law invariance under scenario permutation") {
    const ScenarioMatrix s = appendix();
    std::mt19937_64 rng(13);
    std::vector<std::size_t> perm(s.m);
    for (std::size_t i = 0; i < s.m; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Vec shuffled(s.m * s.n);
    for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t j = 0; j < s.n; ++j) shuffled[i * s.n + j] = s.at(perm[i], j);
    const ScenarioMatrix sp(s.m, s.n, shuffled, s.asset_labels);

    const Vec x = random_weights(s.n, rng);
    const StepCdf a = empirical_cdf(s, x), b = empirical_cdf(sp, x);
    CHECK(a.breakpoints == b.breakpoints);
    CHECK(a.levels == b.levels);
    CHECK(indicator(s, x, Objective::mean()) ==
          doctest::Approx(indicator(sp, x, Objective::mean())).epsilon(1e-15));
    CHECK(indicator(s, x, Objective::value_at_risk(0.4)) ==
          indicator(sp, x, Objective::value_at_risk(0.4)));
}

TEST_CASE("risk-free mixture (closed-form quantile)") {
    const ScenarioMatrix s = appendix();
    std::mt19937_64 rng(17);

    SUBCASE("identity and degenerate mixes") {
        const Vec x = random_weights(s.n, rng);
        const StepQuantile q = empirical_quantile(s, x);
        const StepQuantile same = mix_with_riskfree(q, 0.125, 1.0);
        CHECK(same.grid == q.grid);
        CHECK(same.values == q.values);
        const StepQuantile flat = mix_with_riskfree(q, 0.125, 0.0);
        REQUIRE(flat.values.size() == 1);
        CHECK(flat.values[0] == 0.125);
        CHECK_THROWS_AS(mix_with_riskfree(q, 0.125, 1.5), std::invalid_argument);
    }

    SUBCASE("affine formula") {
        StepQuantile q;
        q.grid = {0.0};
        q.values = {0.2};
        CHECK(mix_with_riskfree(q, 0.125, 0.5).values[0] == doctest::Approx(0.1625).epsilon(1e-15));
    }

    SUBCASE("matches the explicitly mixed portfolio") {
        // asset n is the constant bond
        for (int trial = 0; trial < 20; ++trial) {
            const Vec x = random_weights(s.n, rng);
            const StepQuantile qx = empirical_quantile(s, x);
            for (int li = 0; li <= 10; ++li) {
                const double lambda = li / 10.0;
                Vec mixed(s.n, 0.0);
                for (std::size_t j = 0; j < s.n; ++j) mixed[j] = lambda * x[j];
                mixed.back() += 1.0 - lambda;
                const StepQuantile direct = empirical_quantile(s, mixed);
                const StepQuantile closed = mix_with_riskfree(qx, 0.125, lambda);
                REQUIRE(direct.grid.size() == closed.grid.size());
                CHECK(direct.grid == closed.grid);
                for (std::size_t i = 0; i < direct.values.size(); ++i)
                    CHECK(std::abs(direct.values[i] - closed.values[i]) <= 1e-12);
            }
        }
    }

    SUBCASE("indicator-level positive homogeneity") {
        const Vec x = random_weights(s.n, rng);
        const double r = 0.125;
        for (const Objective& obj :
             {Objective::value_at_risk(0.4), Objective::average_value_at_risk(0.4, 1.0)}) {
            const double vx = indicator(s, x, obj);
            for (int li = 1; li < 10; ++li) {
                const double lambda = li / 10.0;
                Vec mixed(s.n, 0.0);
                for (std::size_t j = 0; j < s.n; ++j) mixed[j] = lambda * x[j];
                mixed.back() += 1.0 - lambda;
                CHECK(std::abs(indicator(s, mixed, obj) - (lambda * vx + (1 - lambda) * r)) <=
                      1e-12);
            }
        }
    }
}

TEST_CASE("cdf/quantile conversions are exact inverses") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Vec returns(1 + rng() % 12);
        for (double& r : returns) r = uniform(rng);
        const StepCdf cdf = cdf_from_samples(returns);
        const StepQuantile q = quantile_from_samples(returns);
        const StepQuantile q2 = quantile_of(cdf);
        CHECK(q2.grid == q.grid);
        CHECK(q2.values == q.values);
        const StepCdf cdf2 = cdf_of(q);
        CHECK(cdf2.breakpoints == cdf.breakpoints);
        CHECK(cdf2.levels == cdf.levels);
    }
}
