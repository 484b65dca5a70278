#include "riskshape/distribution.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace riskshape {

ScenarioMatrix::ScenarioMatrix(std::size_t rows, std::size_t cols, Vec data,
                               std::vector<std::string> labels)
    : m(rows), n(cols), returns(std::move(data)), asset_labels(std::move(labels)) {
    if (m < 1 || n < 1) throw std::invalid_argument("ScenarioMatrix: need m >= 1 and n >= 1");
    if (returns.size() != m * n)
        throw std::invalid_argument("ScenarioMatrix: data size does not match m*n");
    if (!all_finite(returns))
        throw std::invalid_argument("ScenarioMatrix: non-finite return entry");
    if (asset_labels.empty()) {
        asset_labels.reserve(n);
        for (std::size_t j = 0; j < n; ++j) asset_labels.push_back("a" + std::to_string(j + 1));
    } else if (asset_labels.size() != n) {
        throw std::invalid_argument("ScenarioMatrix: label count does not match n");
    }
}

ScenarioMatrix ScenarioMatrix::select_columns(const std::vector<std::size_t>& cols) const {
    if (cols.empty()) throw std::invalid_argument("select_columns: empty selection");
    Vec data;
    data.reserve(m * cols.size());
    std::vector<std::string> labels;
    labels.reserve(cols.size());
    for (std::size_t c : cols) {
        if (c >= n) throw std::invalid_argument("select_columns: column index out of range");
        labels.push_back(asset_labels[c]);
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c : cols) data.push_back(at(i, c));
    return ScenarioMatrix(m, cols.size(), std::move(data), std::move(labels));
}

double StepCdf::operator()(double t) const {
    // Mass strictly below t: breakpoints[0..idx) are < t.
    const auto it = std::lower_bound(breakpoints.begin(), breakpoints.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - breakpoints.begin());
    return idx == 0 ? 0.0 : levels[idx - 1];
}

double StepQuantile::operator()(double alpha) const {
    if (alpha < -1e-12 || alpha > 1.0 + 1e-12)
        throw std::invalid_argument("StepQuantile: alpha outside [0,1]");
    alpha = std::min(std::max(alpha, 0.0), 1.0);
    const auto it = std::upper_bound(grid.begin(), grid.end(), alpha);
    const std::size_t idx = static_cast<std::size_t>(it - grid.begin());
    return values[idx - 1];  // grid[0] == 0 <= alpha, so idx >= 1
}

Objective Objective::value_at_risk(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("VaR level must lie in (0,1)");
    return {ObjectiveKind::ValueAtRisk, gamma, 1.0};
}

Objective Objective::average_value_at_risk(double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0))
        throw std::invalid_argument("AVaR window must satisfy 0 <= alpha < beta <= 1");
    return {ObjectiveKind::AverageValueAtRisk, alpha, beta};
}

Vec portfolio_returns(const ScenarioMatrix& s, const Vec& x) {
    if (x.size() != s.n)
        throw std::invalid_argument("portfolio_returns: weight length does not match asset count");
    Vec r(s.m);
    const double* row = s.returns.data();
    for (std::size_t i = 0; i < s.m; ++i, row += s.n) {
        double acc = 0.0;
        for (std::size_t j = 0; j < s.n; ++j) acc += row[j] * x[j];
        r[i] = acc;
    }
    return r;
}

double mean_of(const Vec& returns) {
    return std::accumulate(returns.begin(), returns.end(), 0.0) /
           static_cast<double>(returns.size());
}

namespace {

// Sorted distinct values with cumulative probabilities; shared by both step
// constructions.
void distinct_cumulative(Vec& samples, Vec& values, Vec& cum) {
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    values.clear();
    cum.clear();
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        values.push_back(samples[i]);
        cum.push_back(static_cast<double>(j) / m);
        i = j;
    }
    cum.back() = 1.0;
}

}  // namespace

StepCdf cdf_from_samples(Vec returns) {
    if (returns.empty()) throw std::invalid_argument("cdf_from_samples: empty sample");
    StepCdf cdf;
    distinct_cumulative(returns, cdf.breakpoints, cdf.levels);
    return cdf;
}

StepQuantile quantile_from_samples(Vec returns) {
    if (returns.empty()) throw std::invalid_argument("quantile_from_samples: empty sample");
    Vec values, cum;
    distinct_cumulative(returns, values, cum);
    StepQuantile q;
    q.values = std::move(values);
    q.grid.resize(q.values.size());
    q.grid[0] = 0.0;
    for (std::size_t i = 1; i < q.values.size(); ++i) q.grid[i] = cum[i - 1];
    return q;
}

StepCdf empirical_cdf(const ScenarioMatrix& s, const Vec& x) {
    return cdf_from_samples(portfolio_returns(s, x));
}

StepQuantile empirical_quantile(const ScenarioMatrix& s, const Vec& x) {
    return quantile_from_samples(portfolio_returns(s, x));
}

StepQuantile quantile_of(const StepCdf& cdf) {
    StepQuantile q;
    double prev = 0.0;
    for (std::size_t j = 0; j < cdf.breakpoints.size(); ++j) {
        if (cdf.levels[j] > prev) {  // skip zero-mass jumps
            q.grid.push_back(prev);
            q.values.push_back(cdf.breakpoints[j]);
            prev = cdf.levels[j];
        }
    }
    if (q.values.empty()) throw std::invalid_argument("quantile_of: CDF carries no mass");
    return q;
}

StepCdf cdf_of(const StepQuantile& q) {
    StepCdf cdf;
    const std::size_t k = q.values.size();
    for (std::size_t i = 0; i < k; ++i) {
        const double next_grid = (i + 1 < k) ? q.grid[i + 1] : 1.0;
        if (next_grid <= q.grid[i]) continue;  // zero-mass piece
        if (!cdf.breakpoints.empty() && cdf.breakpoints.back() == q.values[i]) {
            cdf.levels.back() = next_grid;  // merge equal values
        } else {
            cdf.breakpoints.push_back(q.values[i]);
            cdf.levels.push_back(next_grid);
        }
    }
    cdf.levels.back() = 1.0;
    return cdf;
}

double integrate_quantile(const StepQuantile& q, double alpha, double beta) {
    if (!(alpha >= 0.0 && alpha < beta && beta <= 1.0))
        throw std::invalid_argument("integrate_quantile: need 0 <= alpha < beta <= 1");
    double sum = 0.0;
    const std::size_t k = q.values.size();
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = std::max(alpha, q.grid[i]);
        const double hi = std::min(beta, (i + 1 < k) ? q.grid[i + 1] : 1.0);
        if (hi > lo) sum += q.values[i] * (hi - lo);
    }
    return sum;
}

double indicator_from_returns(const Vec& returns, const Objective& obj) {
    switch (obj.kind) {
        case ObjectiveKind::Mean:
            return mean_of(returns);
        case ObjectiveKind::ValueAtRisk:
            return quantile_from_samples(returns)(obj.alpha);
        case ObjectiveKind::AverageValueAtRisk: {
            const StepQuantile q = quantile_from_samples(returns);
            return integrate_quantile(q, obj.alpha, obj.beta) / (obj.beta - obj.alpha);
        }
    }
    throw std::logic_error("indicator_from_returns: unknown objective kind");
}

double indicator(const ScenarioMatrix& s, const Vec& x, const Objective& obj) {
    return indicator_from_returns(portfolio_returns(s, x), obj);
}

StepQuantile mix_with_riskfree(const StepQuantile& q, double riskfree_return, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("mix_with_riskfree: lambda outside [0,1]");
    StepQuantile out;
    for (std::size_t i = 0; i < q.values.size(); ++i) {
        const double v = lambda * q.values[i] + (1.0 - lambda) * riskfree_return;
        if (!out.values.empty() && out.values.back() == v) continue;  // collapse ties
        out.grid.push_back(q.grid[i]);
        out.values.push_back(v);
    }
    return out;
}

double mixture_cdf_value(const StepCdf& base, double riskfree_return, double lambda, double t) {
    if (lambda <= 0.0) return t > riskfree_return ? 1.0 : 0.0;
    return base((t - (1.0 - lambda) * riskfree_return) / lambda);
}

}  // namespace riskshape
