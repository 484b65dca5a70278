// Exact penalty reformulations of the dominance-constrained problem:
// Euclidean projection onto the budget box, star-shaped projections toward a
// feasible anchor, and the discontinuous / projective penalized objectives.
#pragma once

#include <optional>

#include "riskshape/dominance.hpp"

namespace riskshape {

enum class PenaltyVariant { DiscontinuousG, DiscontinuousH, ProjectiveG, ProjectiveHAnalytic };

struct PenaltySpec {
    PenaltyVariant variant = PenaltyVariant::DiscontinuousG;
    double offset = 0.0;          // penalty offset c (discontinuous variants)
    Vec anchor;                   // feasible point x0, star center for projections
    double anchor_return = 0.0;   // r: the anchor's return when it is risk-free
    bool anchor_riskfree = false;
    double lambda_tolerance = 1e-9;
    int max_bisections = 60;
    bool literal_offset = false;  // subtract c at feasible points too
    bool use_mixture_fastpath = true;  // evaluate G along the segment via the
                                       // risk-free CDF transform when possible
};

// Builds and validates a spec: the anchor must lie in the box and satisfy the
// dominance constraint in the variant's form.  The analytic-H variant
// additionally requires a risk-free anchor with Q_ref(1) <= r.  When c is not
// given it defaults to objective(anchor) + margin.
PenaltySpec make_penalty_spec(PenaltyVariant variant, const ScenarioMatrix& s,
                              const ReferenceProfile& ref, const FeasibleBox& box,
                              const Objective& obj, Vec anchor,
                              std::optional<double> c = std::nullopt, double margin = 0.0);

// Euclidean projection onto {x : sum(x) <= budget, x >= lower}.  Points
// already in the box are returned unchanged; the output always lies in the
// box exactly and the map is idempotent.
Vec project_box(const Vec& x, const FeasibleBox& box);

struct StarProjection {
    Vec point;      // (1-lambda)*anchor + lambda*x, dominance-feasible
    double lambda;  // largest certified multiplier in [0,1]
};

// Bisection along the segment [anchor, x] for the largest lambda with
// G(x_lambda) <= 0.  Returns x itself when it is already feasible.
StarProjection star_project_g(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                              const PenaltySpec& spec);

// Closed-form multiplier of the analytic quantile projection:
// min over violated alpha in A_ref of (Q_ref(alpha) - r) / (Q_x(alpha) - r).
double star_lambda_h(const StepQuantile& qx, const ReferenceProfile& ref, double riskfree_return);

StarProjection star_project_h_analytic(const ScenarioMatrix& s, const Vec& x,
                                       const ReferenceProfile& ref, const PenaltySpec& spec);

// Discontinuous penalty value at a raw point (to maximize): with y the box
// projection of x, obj(y) - ||x-y|| at feasible y, and an extra drop of
// (c + residual) once the dominance residual turns positive.
double penalized_discontinuous(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                               const FeasibleBox& box, const Objective& obj,
                               const PenaltySpec& spec);

// Projective penalty value: obj(p) - ||p - y|| - ||x - y|| with y the box
// projection and p the star projection of y.
double penalized_projective(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                            const FeasibleBox& box, const Objective& obj, const PenaltySpec& spec);

// Bundles the data of one penalized problem behind a plain value function.
// Evaluation is pure and safe to call concurrently.
class PenalizedObjective {
public:
    PenalizedObjective(ScenarioMatrix s, ReferenceProfile ref, FeasibleBox box, Objective obj,
                       PenaltySpec spec);

    // Value to maximize.
    double operator()(const Vec& x) const;

    struct Evaluation {
        Vec boxed;           // projection of x onto the budget box
        Vec feasible_point;  // boxed after the star projection (== boxed for
                             // discontinuous variants at feasible points)
        double lambda = 1.0;
        double residual = 0.0;  // dominance residual at the reported point
        double value = 0.0;     // penalized value at x
    };
    Evaluation evaluate(const Vec& x) const;

    const ScenarioMatrix& scenarios() const { return scenarios_; }
    const ReferenceProfile& reference() const { return reference_; }
    const FeasibleBox& box() const { return box_; }
    const Objective& objective() const { return objective_; }
    const PenaltySpec& spec() const { return spec_; }

private:
    ScenarioMatrix scenarios_;
    ReferenceProfile reference_;
    FeasibleBox box_;
    Objective objective_;
    PenaltySpec spec_;
};

}  // namespace riskshape
