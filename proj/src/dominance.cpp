#include "riskshape/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace riskshape {

bool FeasibleBox::contains(const Vec& x) const {
    return budget_residual(x) <= 0.0 && bound_residual(x) <= 0.0;
}

double FeasibleBox::budget_residual(const Vec& x) const {
    double s = 0.0;
    for (double v : x) s += v;
    return s - budget;
}

double FeasibleBox::bound_residual(const Vec& x) const {
    if (x.size() != lower.size())
        throw std::invalid_argument("FeasibleBox: dimension mismatch");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, lower[i] - x[i]);
    return worst;
}

namespace {

ReferenceProfile finish_profile(StepCdf cdf, ProfileForm form, double shift) {
    ReferenceProfile ref;
    ref.form = form;
    ref.quantile = quantile_of(cdf);
    ref.cdf = std::move(cdf);
    ref.shift = shift;
    return ref;
}

}  // namespace

ReferenceProfile profile_from_cdf(StepCdf cdf, double shift) {
    return finish_profile(std::move(cdf), ProfileForm::Cdf, shift);
}

ReferenceProfile profile_from_quantile(StepQuantile q, double shift) {
    ReferenceProfile ref;
    ref.form = ProfileForm::Quantile;
    ref.cdf = cdf_of(q);
    ref.quantile = std::move(q);
    ref.shift = shift;
    return ref;
}

ReferenceProfile reference_from_portfolio(const ScenarioMatrix& s, const Vec& x_ref,
                                          double delta) {
    if (delta < 0.0) throw std::invalid_argument("reference_from_portfolio: delta must be >= 0");
    StepCdf cdf = empirical_cdf(s, x_ref);
    for (double& bp : cdf.breakpoints) bp -= delta;
    return finish_profile(std::move(cdf), ProfileForm::Cdf, delta);
}

ReferenceProfile reference_from_portfolio(const ScenarioMatrix& s, const Vec& x_ref,
                                          const Vec& delta_per_jump) {
    StepCdf cdf = empirical_cdf(s, x_ref);
    if (delta_per_jump.size() != cdf.breakpoints.size())
        throw std::invalid_argument(
            "reference_from_portfolio: delta table size does not match the jump count");
    for (std::size_t j = 0; j < cdf.breakpoints.size(); ++j) {
        if (delta_per_jump[j] < 0.0)
            throw std::invalid_argument("reference_from_portfolio: delta must be >= 0");
        cdf.breakpoints[j] -= delta_per_jump[j];
    }
    for (std::size_t j = 1; j < cdf.breakpoints.size(); ++j)
        if (cdf.breakpoints[j] <= cdf.breakpoints[j - 1])
            throw std::invalid_argument(
                "reference_from_portfolio: shifted breakpoints are not increasing");
    return finish_profile(std::move(cdf), ProfileForm::Cdf, delta_per_jump.front());
}

ReferenceProfile reference_from_steps(const std::vector<std::pair<double, double>>& points) {
    if (points.empty()) throw std::invalid_argument("reference_from_steps: empty step list");
    StepCdf cdf;
    double prev_level = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto [t, level] = points[i];
        if (!std::isfinite(t) || !std::isfinite(level))
            throw std::invalid_argument("reference_from_steps: non-finite entry");
        if (level < -1e-12 || level > 1.0 + 1e-12)
            throw std::invalid_argument("reference_from_steps: level outside [0,1]");
        if (i > 0 && t < points[i - 1].first)
            throw std::invalid_argument("reference_from_steps: thresholds must be sorted");
        if (level < prev_level - 1e-12)
            throw std::invalid_argument("reference_from_steps: levels must be nondecreasing");
        const double lv = std::min(std::max(level, 0.0), 1.0);
        if (!cdf.breakpoints.empty() && cdf.breakpoints.back() == t) {
            cdf.levels.back() = lv;  // repeated threshold: keep the highest level
        } else if (lv > prev_level) {
            cdf.breakpoints.push_back(t);
            cdf.levels.push_back(lv);
        }
        prev_level = std::max(prev_level, lv);
    }
    if (cdf.levels.empty() || cdf.levels.back() < 1.0 - 1e-12)
        throw std::invalid_argument("reference_from_steps: final level must be 1");
    cdf.levels.back() = 1.0;
    return finish_profile(std::move(cdf), ProfileForm::Cdf, 0.0);
}

ReferenceProfile merge_profiles(const std::vector<ReferenceProfile>& profiles) {
    if (profiles.empty()) throw std::invalid_argument("merge_profiles: empty list");
    if (profiles.size() == 1) return profiles.front();
    Vec grid;
    for (const auto& p : profiles)
        grid.insert(grid.end(), p.cdf.breakpoints.begin(), p.cdf.breakpoints.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    StepCdf merged;
    for (double t : grid) {
        // Post-jump value at t of each profile: the level of the last
        // breakpoint <= t.
        double level = 1.0;
        for (const auto& p : profiles) {
            const auto it = std::upper_bound(p.cdf.breakpoints.begin(), p.cdf.breakpoints.end(), t);
            const std::size_t idx = static_cast<std::size_t>(it - p.cdf.breakpoints.begin());
            level = std::min(level, idx == 0 ? 0.0 : p.cdf.levels[idx - 1]);
        }
        if (level > (merged.levels.empty() ? 0.0 : merged.levels.back())) {
            merged.breakpoints.push_back(t);
            merged.levels.push_back(level);
        }
    }
    merged.levels.back() = 1.0;
    return finish_profile(std::move(merged), ProfileForm::Cdf, 0.0);
}

double g_residual_from_returns(const Vec& returns, const ReferenceProfile& ref) {
    const Vec& t = ref.cdf.breakpoints;
    const Vec& lev = ref.cdf.levels;
    const double m = static_cast<double>(returns.size());
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t.size(); ++j) {
        std::size_t below = 0;
        for (double r : returns) below += r < t[j];
        const double fref = j == 0 ? 0.0 : lev[j - 1];  // left-continuous value at the jump
        worst = std::max(worst, static_cast<double>(below) / m - fref);
    }
    return worst;
}

double g_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref) {
    return g_residual_from_returns(portfolio_returns(s, x), ref);
}

double h_residual_from_quantile(const StepQuantile& qx, const ReferenceProfile& ref) {
    const StepQuantile& qr = ref.quantile;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < qr.grid.size(); ++i)
        worst = std::max(worst, qr.values[i] - qx(qr.grid[i]));
    // A_ref closes with 1 by convention; redundant for step quantiles but
    // kept to match the jump-set definition.
    worst = std::max(worst, qr.values.back() - qx(1.0));
    return worst;
}

double h_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref) {
    return h_residual_from_quantile(empirical_quantile(s, x), ref);
}

double dominance_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref) {
    return ref.form == ProfileForm::Cdf ? g_residual(s, x, ref) : h_residual(s, x, ref);
}

FeasibilityReport is_feasible(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                              const FeasibleBox& box) {
    FeasibilityReport rep;
    rep.dominance = dominance_residual(s, x, ref);
    rep.budget = box.budget_residual(x);
    rep.bounds = box.bound_residual(x);
    rep.feasible = rep.dominance <= 0.0 && rep.budget <= 0.0 && rep.bounds <= 0.0;
    return rep;
}

}  // namespace riskshape
