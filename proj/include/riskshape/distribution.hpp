// Empirical return distributions of portfolios: step CDF / quantile pairs,
// the mean / VaR / AVaR indicators, and the risk-free mixture shortcut.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "riskshape/common.hpp"

namespace riskshape {

// m equiprobable return scenarios over n assets, row-major.  Every scenario
// carries probability exactly 1/m.
struct ScenarioMatrix {
    std::size_t m = 0;
    std::size_t n = 0;
    Vec returns;  // m*n entries, row i = per-asset returns of scenario i
    std::vector<std::string> asset_labels;

    ScenarioMatrix() = default;
    ScenarioMatrix(std::size_t rows, std::size_t cols, Vec data,
                   std::vector<std::string> labels = {});

    double at(std::size_t i, std::size_t j) const { return returns[i * n + j]; }

    // Submatrix with the given columns, in the given order.
    ScenarioMatrix select_columns(const std::vector<std::size_t>& cols) const;
};

// Left-continuous step CDF.  The value at t is the fraction of mass strictly
// below t; levels[j] is the mass accumulated through breakpoints[j] and the
// final level is 1.
struct StepCdf {
    Vec breakpoints;  // strictly increasing
    Vec levels;       // nondecreasing, in [0,1], last == 1

    double operator()(double t) const;
};

// Right-continuous generalized inverse of a step CDF.  The value is constant
// on [grid[i], grid[i+1]) and the value at 1 is the largest attainable
// return (the capped sup).
struct StepQuantile {
    Vec grid;    // nondecreasing, starts at 0, entries in [0,1)
    Vec values;  // nondecreasing

    double operator()(double alpha) const;
    double max_value() const { return values.back(); }
};

enum class ObjectiveKind { Mean, ValueAtRisk, AverageValueAtRisk };

// Return indicator to maximize: Mean, VaR(gamma), or the quantile average
// AVaR over a probability window [alpha, beta].
struct Objective {
    ObjectiveKind kind = ObjectiveKind::Mean;
    double alpha = 0.0;  // VaR level, or lower AVaR bound
    double beta = 1.0;   // upper AVaR bound

    static Objective mean() { return {ObjectiveKind::Mean, 0.0, 1.0}; }
    static Objective value_at_risk(double gamma);
    static Objective average_value_at_risk(double alpha, double beta);
};

// Scenario returns of the portfolio x: component i is (scenario row i) . x.
Vec portfolio_returns(const ScenarioMatrix& s, const Vec& x);

double mean_of(const Vec& returns);

// Step functions of an equiprobable sample (ties merged into one breakpoint).
StepCdf cdf_from_samples(Vec returns);
StepQuantile quantile_from_samples(Vec returns);

StepCdf empirical_cdf(const ScenarioMatrix& s, const Vec& x);
StepQuantile empirical_quantile(const ScenarioMatrix& s, const Vec& x);

// Exact conversions between the two step representations.
StepQuantile quantile_of(const StepCdf& cdf);
StepCdf cdf_of(const StepQuantile& q);

// Exact integral of the step quantile over [alpha, beta], 0 <= alpha < beta <= 1.
double integrate_quantile(const StepQuantile& q, double alpha, double beta);

double indicator(const ScenarioMatrix& s, const Vec& x, const Objective& obj);
double indicator_from_returns(const Vec& returns, const Objective& obj);

// Quantile of the mixture x_lambda = lambda*x + (1-lambda)*x0 where x0 is a
// risk-free portfolio with fixed return r:  Q(alpha) = lambda*Q_x(alpha) + (1-lambda)*r.
StepQuantile mix_with_riskfree(const StepQuantile& q, double riskfree_return, double lambda);

// CDF of the same mixture, evaluated at t:  F_x((t - (1-lambda)r)/lambda) for
// lambda > 0, and the anchor's own step CDF at lambda == 0.
double mixture_cdf_value(const StepCdf& base, double riskfree_return, double lambda, double t);

}  // namespace riskshape
