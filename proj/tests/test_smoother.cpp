#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "riskshape/csv.hpp"
#include "riskshape/penalty.hpp"
#include "riskshape/smoother.hpp"

using namespace riskshape;

namespace {

// Piecewise-constant 1-D test function with its exact Gaussian average.
struct StepFunction {
    Vec breaks;   // ascending
    Vec values;   // size breaks.size()+1, value on (breaks[i-1], breaks[i])
    double operator()(double x) const {
        std::size_t i = 0;
        while (i < breaks.size() && x >= breaks[i]) ++i;
        return values[i];
    }
    static double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
    double averaged(double x, double theta) const {
        double acc = 0.0, prev = -1e18;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double next = i < breaks.size() ? breaks[i] : 1e18;
            acc += values[i] * (phi_cdf((next - x) / theta) - phi_cdf((prev - x) / theta));
            prev = next;
        }
        return acc;
    }
};

}  // namespace

TEST_CASE("two-point gradient samples") {
    std::mt19937_64 rng(101);

    SUBCASE("linear functions: per-sample identity and unbiased mean") {
        const Vec a{0.7, -1.3, 0.4};
        const ValueFn f = [&](const Vec& x) { return dot(a, x); };
        const Vec x{0.1, 0.2, -0.5};
        Vec mean(3, 0.0);
        const int samples = 100000;
        for (int s = 0; s < samples; ++s) {
            const Vec g = gradient_sample(f, x, 0.3, rng);
            for (int i = 0; i < 3; ++i) mean[i] += g[i] / samples;
        }
        // Var(eta eta' a)_i <= ~ (2 + |a|^2); 3 standard errors
        const double se = 3.0 * std::sqrt((2.0 + dot(a, a))) / std::sqrt(double(samples));
        for (int i = 0; i < 3; ++i) CHECK(std::abs(mean[i] - a[i]) <= se);
    }

    SUBCASE("quadratics: the symmetric difference cancels the curvature exactly") {
        const ValueFn f = [](const Vec& x) {
            return 2.0 * x[0] * x[0] + x[0] * x[1] - 3.0 * x[1] + 1.0;
        };
        const Vec x{0.4, -0.2};
        const Vec grad{4.0 * x[0] + x[1], x[0] - 3.0};
        // For every draw eta, the estimate equals eta (eta . grad) exactly.
        std::mt19937_64 check_rng(rng());
        for (int s = 0; s < 200; ++s) {
            std::mt19937_64 copy = check_rng;
            std::normal_distribution<double> normal(0.0, 1.0);
            Vec eta{normal(copy), normal(copy)};
            const Vec g = gradient_sample(f, x, 0.17, check_rng);
            const double inner = eta[0] * grad[0] + eta[1] * grad[1];
            CHECK(g[0] == doctest::Approx(eta[0] * inner).epsilon(1e-9));
            CHECK(g[1] == doctest::Approx(eta[1] * inner).epsilon(1e-9));
        }
    }

    SUBCASE("constant functions give the zero vector") {
        const ValueFn f = [](const Vec&) { return 3.5; };
        for (int s = 0; s < 10; ++s) {
            for (double g : gradient_sample(f, {0.0, 1.0}, 0.2, rng)) CHECK(g == 0.0);
            for (double g : one_sided_gradient_sample(f, {0.0, 1.0}, 0.2, rng)) CHECK(g == 0.0);
        }
    }

    SUBCASE("1-D indicator step: Monte Carlo mean matches the analytic slope") {
        const ValueFn f = [](const Vec& x) { return x[0] >= 0.0 ? 1.0 : 0.0; };
        const double theta = 0.3;
        const double exact = 1.0 / (theta * std::sqrt(2.0 * M_PI));
        double two_point = 0.0, one_sided = 0.0;
        const int samples = 200000;
        for (int s = 0; s < samples; ++s) {
            two_point += gradient_sample(f, {0.0}, theta, rng)[0] / samples;
            one_sided += one_sided_gradient_sample(f, {0.0}, theta, rng)[0] / samples;
        }
        CHECK(std::abs(two_point - exact) <= 0.03 * exact);
        CHECK(std::abs(one_sided - exact) <= 0.03 * exact);
    }

    SUBCASE("non-finite objectives are reported with the point") {
        const ValueFn f = [](const Vec& x) { return x[0] > 10.0 ? 1.0 / 0.0 : 0.0; };
        std::mt19937_64 rg(3);
        CHECK_THROWS_AS(gradient_sample(f, {1e9}, 1.0, rg), NonFiniteError);
    }
}

TEST_CASE("gradient tracker") {
    SUBCASE("the first unit-rate step absorbs the sample") {
        GradientTracker t;
        t = track_gradient(std::move(t), {2.0, -1.0}, 1.0);
        CHECK(t.z == Vec{2.0, -1.0});
    }

    SUBCASE("harmonic rates produce the running mean") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> uniform(-1.0, 1.0);
        GradientTracker t;
        Vec sum(2, 0.0);
        for (int k = 0; k < 50; ++k) {
            Vec sample{uniform(rng), uniform(rng)};
            sum[0] += sample[0];
            sum[1] += sample[1];
            t = track_gradient(std::move(t), sample, 1.0 / (k + 1));
            CHECK(t.z[0] == doctest::Approx(sum[0] / (k + 1)).epsilon(1e-12));
            CHECK(t.z[1] == doctest::Approx(sum[1] / (k + 1)).epsilon(1e-12));
        }
    }

    SUBCASE("the average of noisy samples settles near their mean") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> noise(0.0, 1.0);
        const Vec g{0.3, -0.7};
        GradientTracker t;
        for (int k = 0; k < 10000; ++k)
            t = track_gradient(std::move(t), {g[0] + noise(rng), g[1] + noise(rng)},
                               1.0 / (k + 1));
        // 3 standard errors of a 1e4-sample mean
        CHECK(std::abs(t.z[0] - g[0]) <= 0.03);
        CHECK(std::abs(t.z[1] - g[1]) <= 0.03);
    }

    SUBCASE("rates outside [0,1] are rejected") {
        GradientTracker t;
        CHECK_THROWS_AS(track_gradient(std::move(t), {1.0}, 1.5), std::invalid_argument);
    }
}

TEST_CASE("minimize") {
    SUBCASE("convex quadratic sanity") {
        const ValueFn f = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; };
        SmootherConfig cfg;
        cfg.seed = 5;
        const OptimizeResult r = minimize(f, {1.0, 1.0}, cfg);
        CHECK(r.value_best < 1e-2);
    }

    SUBCASE("deterministic per seed") {
        const ValueFn f = [](const Vec& x) {
            return std::abs(x[0]) < 0.2 ? -1.0 + x[0] * x[0] : std::cos(3 * x[0]);
        };
        SmootherConfig cfg;
        cfg.seed = 99;
        const OptimizeResult a = minimize(f, {0.8}, cfg);
        const OptimizeResult b = minimize(f, {0.8}, cfg);
        CHECK(a.x_best == b.x_best);
        CHECK(a.value_best == b.value_best);
        CHECK(a.evaluations == b.evaluations);
        REQUIRE(a.stage_trace.size() == b.stage_trace.size());
        for (std::size_t i = 0; i < a.stage_trace.size(); ++i)
            CHECK(a.stage_trace[i] == b.stage_trace[i]);
    }

    SUBCASE("exact evaluation budget") {
        long long calls = 0;
        const ValueFn f = [&](const Vec& x) {
            ++calls;
            return x[0] * x[0];
        };
        SmootherConfig cfg;
        cfg.stages = 9;
        cfg.inner_steps = 4;
        const OptimizeResult r = minimize(f, {0.7}, cfg);
        CHECK(r.evaluations == 2 * 9 * 4 + 9 + 1);
        CHECK(calls == r.evaluations);
        // one-sided sampling spends the same budget
        calls = 0;
        cfg.two_point = false;
        const OptimizeResult r1 = minimize(f, {0.7}, cfg);
        CHECK(r1.evaluations == 2 * 9 * 4 + 9 + 1);
        CHECK(calls == r1.evaluations);
    }

    SUBCASE("the reported value is the objective at the reported point") {
        const ValueFn f = [](const Vec& x) {
            return std::abs(x[0] - 0.4) < 0.1 ? -1.0 : std::sin(9 * x[0]);
        };
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            SmootherConfig cfg;
            cfg.seed = seed;
            const OptimizeResult r = minimize(f, {0.9}, cfg);
            CHECK(r.value_best == f(r.x_best));
        }
    }

    SUBCASE("one-sided mode still descends") {
        const ValueFn f = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; };
        SmootherConfig cfg;
        cfg.two_point = false;
        cfg.seed = 44;
        CHECK(minimize(f, {1.0, 1.0}, cfg).value_best < 1e-2);
    }

    SUBCASE("the tracker threshold can cut stages short") {
        const ValueFn f = [](const Vec& x) { return x[0] * x[0]; };
        SmootherConfig cfg;
        cfg.stages = 9;
        cfg.inner_steps = 6;
        cfg.seed = 12;
        const long long full_budget = minimize(f, {0.5}, cfg).evaluations;
        cfg.tracker_threshold = 1e9;  // every stage stops after its first step
        const OptimizeResult r = minimize(f, {0.5}, cfg);
        CHECK(r.evaluations < full_budget);
        CHECK(r.evaluations == 2 * 9 * 1 + 9 + 1);
        CHECK(r.value_best == f(r.x_best));
    }

    SUBCASE("non-finite objective values abort with the offending point") {
        const ValueFn f = [](const Vec& x) {
            return x[0] < -0.5 ? std::numeric_limits<double>::quiet_NaN() : x[0];
        };
        SmootherConfig cfg;
        cfg.seed = 3;
        cfg.theta1 = 2.0;
        CHECK_THROWS_AS(minimize(f, {0.0}, cfg), NonFiniteError);
    }

    SUBCASE("maximization runs on the negated objective") {
        const ValueFn f = [](const Vec& x) { return -(x[0] - 0.3) * (x[0] - 0.3); };
        SmootherConfig cfg;
        cfg.maximize = true;
        cfg.seed = 17;
        const OptimizeResult r = minimize(f, {0.9}, cfg);
        CHECK(r.value_best >= -1e-2);
        CHECK(std::abs(r.x_best[0] - 0.3) < 0.15);
    }

    SUBCASE("iterates respect the clip box") {
        const ValueFn f = [](const Vec& x) { return x[0]; };
        SmootherConfig cfg;
        cfg.lower = {0.25};
        cfg.upper = {0.75};
        cfg.seed = 23;
        const OptimizeResult r = minimize(f, {0.7}, cfg);
        CHECK(r.x_best[0] >= 0.25);
        CHECK(r.x_best[0] <= 0.75);
        CHECK(r.value_best == doctest::Approx(0.25).epsilon(1e-9));
    }

    SUBCASE("two-basin step landscape reaches the global basin") {
        // global basin [0.55, 0.85] at -1, local basin [0.05, 0.35] at -0.5
        StepFunction land;
        land.breaks = {0.05, 0.35, 0.55, 0.85};
        land.values = {0.0, -0.5, 0.0, -1.0, 0.0};
        const ValueFn f = [&](const Vec& x) { return land(x[0]); };
        SmootherConfig cfg;
        cfg.theta1 = 0.6;
        cfg.stages = 30;
        cfg.inner_steps = 8;
        cfg.step = 0.4;
        cfg.lower = {0.0};
        cfg.upper = {1.0};
        int hits = 0;
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int run = 0; run < 100; ++run) {
            cfg.seed = derive_seed(404, run);
            const OptimizeResult r = minimize(f, {uniform(rng)}, cfg);
            hits += r.value_best <= -1.0 + 1e-12;
        }
        CHECK(hits >= 95);
    }

    SUBCASE("epi-convergence smoke test: smoothed minima sink toward the true minimum") {
        StepFunction land;
        land.breaks = {0.05, 0.35, 0.55, 0.85};
        land.values = {0.0, -0.5, 0.0, -1.0, 0.0};
        double previous = 1e18;
        for (double theta = 0.4; theta >= 0.4 / 8; theta /= 2) {
            double lowest = 1e18;
            for (double x = -0.5; x <= 1.5; x += 1e-3)
                lowest = std::min(lowest, land.averaged(x, theta));
            CHECK(lowest <= previous + 1e-12);
            CHECK(lowest >= -1.0 - 1e-9);
            previous = lowest;
        }
        CHECK(previous == doctest::Approx(-1.0).epsilon(5e-3));
    }

    SUBCASE("single runs solve the relaxed two-asset reshaping problem") {
        const Dataset ds = load_csv("data/markowitz1959.csv");
        const ScenarioMatrix s = ds.scenarios.select_columns({0, 1});
        const ReferenceProfile ref = reference_from_portfolio(s, {0.3, 0.7}, 0.05);
        const FeasibleBox box{{0.0, 0.0}, 1.0};
        const Objective mean = Objective::mean();
        const PenaltySpec spec = make_penalty_spec(PenaltyVariant::DiscontinuousG, s, ref, box,
                                                   mean, {0.3, 0.7}, 0.0659);
        const PenalizedObjective penalized(s, ref, box, mean, spec);
        const ValueFn negated = [&](const Vec& x) { return -penalized(x); };

        SmootherConfig cfg;
        cfg.stages = 49;
        cfg.inner_steps = 16;
        cfg.theta1 = 0.4;
        cfg.step = 0.7;
        cfg.lower = {0.0, 0.0};
        cfg.upper = {1.0, 1.0};
        int hits = 0;
        std::mt19937_64 rng(555);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        for (int run_index = 0; run_index < 100; ++run_index) {
            cfg.seed = derive_seed(777, run_index);
            const OptimizeResult r = minimize(negated, {uniform(rng), uniform(rng)}, cfg);
            const auto ev = penalized.evaluate(r.x_best);
            const bool feasible = is_feasible(s, ev.feasible_point, ref, box).feasible;
            hits += feasible && indicator(s, ev.feasible_point, mean) >= 0.0635;
        }
        CHECK(hits >= 90);
    }

    SUBCASE("gaussian kernel mass (quadrature)") {
        for (double theta : {0.5, 0.1}) {
            double mass1 = 0.0;
            const double h = theta / 200.0;
            for (double z = -8 * theta; z <= 8 * theta; z += h)
                mass1 += std::exp(-z * z / (2 * theta * theta)) /
                         (theta * std::sqrt(2 * M_PI)) * h;
            CHECK(mass1 == doctest::Approx(1.0).epsilon(1e-4));
            double mass2 = 0.0;
            const double h2 = theta / 40.0;
            for (double a = -6 * theta; a <= 6 * theta; a += h2)
                for (double b = -6 * theta; b <= 6 * theta; b += h2)
                    mass2 += std::exp(-(a * a + b * b) / (2 * theta * theta)) /
                             (2 * M_PI * theta * theta) * h2 * h2;
            CHECK(mass2 == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}
