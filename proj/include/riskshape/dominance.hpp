// Reference risk profiles and the first-order dominance residuals G (CDF
// form) and H (quantile form), plus feasibility testing against the budget
// box.
#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "riskshape/distribution.hpp"

namespace riskshape {

// Admissible weight set {x : sum(x) <= budget, x_i >= lower[i]}.
struct FeasibleBox {
    Vec lower;            // per-asset lower bounds
    double budget = 1.0;  // cap on the total invested weight

    bool contains(const Vec& x) const;
    double budget_residual(const Vec& x) const;  // sum(x) - budget
    double bound_residual(const Vec& x) const;   // max_i (lower[i] - x_i)
};

enum class ProfileForm { Cdf, Quantile };

// Reference risk profile: the right-hand side of the dominance constraint.
// Both step representations are kept (the conversion is exact); `form`
// records which one defines the constraint residual used by default.
struct ReferenceProfile {
    ProfileForm form = ProfileForm::Cdf;
    StepCdf cdf;
    StepQuantile quantile;
    double shift = 0.0;  // relaxation delta used at construction (metadata)

    const Vec& cdf_jumps() const { return cdf.breakpoints; }       // T_ref
    const Vec& quantile_jumps() const { return quantile.grid; }    // A_ref without the closing 1
};

// Profile whose value at t is F_{x_ref}(t + delta): the portfolio's own CDF
// with every jump moved left by delta (pointwise relaxation).
ReferenceProfile reference_from_portfolio(const ScenarioMatrix& s, const Vec& x_ref, double delta);
ReferenceProfile reference_from_portfolio(const ScenarioMatrix& s, const Vec& x_ref,
                                          const Vec& delta_per_jump);

// Step profile from (threshold, level) pairs.  Thresholds must be sorted and
// levels nondecreasing with final level 1; repeated thresholds collapse to
// the highest level and zero-mass jumps are dropped.
ReferenceProfile reference_from_steps(const std::vector<std::pair<double, double>>& points);

ReferenceProfile profile_from_cdf(StepCdf cdf, double shift = 0.0);
ReferenceProfile profile_from_quantile(StepQuantile q, double shift = 0.0);

// Pointwise minimum of several reference CDFs: the single profile whose
// feasible set is the intersection of the individual dominance constraints.
ReferenceProfile merge_profiles(const std::vector<ReferenceProfile>& profiles);

// G residual: max over T_ref of (F_x(t) - F_ref(t)); feasible iff <= 0.
double g_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref);
double g_residual_from_returns(const Vec& returns, const ReferenceProfile& ref);

// H residual: max over A_ref (including 1) of (Q_ref(alpha) - Q_x(alpha)).
double h_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref);
double h_residual_from_quantile(const StepQuantile& qx, const ReferenceProfile& ref);

// Residual in the profile's declared form.
double dominance_residual(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref);

struct FeasibilityReport {
    bool feasible = false;
    double dominance = 0.0;  // G or H residual, per the profile form
    double budget = 0.0;     // sum(x) - budget
    double bounds = 0.0;     // max_i (lower[i] - x_i)
};

FeasibilityReport is_feasible(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                              const FeasibleBox& box);

}  // namespace riskshape
