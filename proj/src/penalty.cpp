#include "riskshape/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace riskshape {

namespace {

Vec blend(const Vec& anchor, const Vec& x, double lambda) {
    Vec p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        p[i] = (1.0 - lambda) * anchor[i] + lambda * x[i];
    return p;
}

}  // namespace

Vec project_box(const Vec& x, const FeasibleBox& box) {
    const std::size_t n = x.size();
    if (box.lower.size() != n) throw std::invalid_argument("project_box: dimension mismatch");
    double lower_sum = 0.0;
    for (double c : box.lower) lower_sum += c;
    const double cap = box.budget - lower_sum;
    if (cap < 0.0) throw std::invalid_argument("project_box: empty feasible box");
    if (box.contains(x)) return x;

    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - box.lower[i];

    Vec w(n);
    double clipped_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::max(y[i], 0.0);
        clipped_sum += w[i];
    }
    if (clipped_sum > cap) {
        // Projection onto the capped simplex {w >= 0, sum w = cap} by
        // sort-and-threshold.
        Vec u = y;
        std::sort(u.begin(), u.end(), std::greater<double>());
        double cumulative = 0.0, tau = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            cumulative += u[j];
            const double candidate = (cumulative - cap) / static_cast<double>(j + 1);
            if (u[j] > candidate) tau = candidate;
        }
        for (std::size_t i = 0; i < n; ++i) w[i] = std::max(y[i] - tau, 0.0);
    }

    Vec p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = w[i] + box.lower[i];
    // Rounding may leave the budget violated by a few ulps; the box
    // membership must hold exactly for downstream feasibility checks.
    for (int guard = 0; guard < 64; ++guard) {
        const double excess = box.budget_residual(p);
        if (excess <= 0.0) break;
        std::size_t k = 0;
        double slack = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] - box.lower[i] > slack) {
                slack = p[i] - box.lower[i];
                k = i;
            }
        }
        double target = p[k] - excess;
        if (!(target < p[k])) target = std::nextafter(p[k], -std::numeric_limits<double>::infinity());
        p[k] = std::max(box.lower[k], target);
    }
    return p;
}

PenaltySpec make_penalty_spec(PenaltyVariant variant, const ScenarioMatrix& s,
                              const ReferenceProfile& ref, const FeasibleBox& box,
                              const Objective& obj, Vec anchor, std::optional<double> c,
                              double margin) {
    if (anchor.size() != s.n)
        throw std::invalid_argument("penalty anchor length does not match the asset count");
    if (!all_finite(anchor)) throw std::invalid_argument("penalty anchor has non-finite entries");

    PenaltySpec spec;
    spec.variant = variant;
    spec.anchor = std::move(anchor);

    const bool quantile_form = variant == PenaltyVariant::DiscontinuousH ||
                               variant == PenaltyVariant::ProjectiveHAnalytic;
    const Vec anchor_returns = portfolio_returns(s, spec.anchor);
    const double residual = quantile_form
                                ? h_residual_from_quantile(quantile_from_samples(anchor_returns), ref)
                                : g_residual_from_returns(anchor_returns, ref);
    if (!box.contains(spec.anchor) || residual > 0.0)
        throw std::invalid_argument("penalty anchor is infeasible");

    const auto [lo_it, hi_it] = std::minmax_element(anchor_returns.begin(), anchor_returns.end());
    spec.anchor_return = mean_of(anchor_returns);
    spec.anchor_riskfree =
        (*hi_it - *lo_it) <= 1e-12 * std::max(1.0, std::abs(*hi_it));

    if (variant == PenaltyVariant::ProjectiveHAnalytic) {
        if (!spec.anchor_riskfree)
            throw std::invalid_argument("analytic quantile projection requires a risk-free anchor");
        if (ref.quantile.max_value() > spec.anchor_return)
            throw std::invalid_argument(
                "analytic quantile projection requires Q_ref(1) <= anchor return");
    }

    const double anchor_value = indicator_from_returns(anchor_returns, obj);
    if (c && *c < anchor_value - 1e-12)
        throw std::invalid_argument(
            "penalty offset c must be at least the anchor's objective value");
    spec.offset = c ? *c : anchor_value + margin;
    return spec;
}

StarProjection star_project_g(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                              const PenaltySpec& spec) {
    if (spec.anchor.size() != x.size())
        throw std::invalid_argument("star_project_g: anchor dimension mismatch");
    if (g_residual(s, x, ref) <= 0.0) return {x, 1.0};

    double lo = 0.0, hi = 1.0;
    bool need_direct = true;

    if (spec.use_mixture_fastpath && spec.anchor_riskfree) {
        // One CDF of x, then every lambda costs only binary searches through
        // the transformed thresholds.
        const StepCdf fx = empirical_cdf(s, x);
        const Vec& t = ref.cdf.breakpoints;
        const Vec& lev = ref.cdf.levels;
        auto g_at = [&](double lambda) {
            double worst = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double fref = j == 0 ? 0.0 : lev[j - 1];
                worst = std::max(
                    worst, mixture_cdf_value(fx, spec.anchor_return, lambda, t[j]) - fref);
            }
            return worst;
        };
        for (int it = 0; it < spec.max_bisections && hi - lo > spec.lambda_tolerance; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g_at(mid) <= 0.0 ? lo : hi) = mid;
        }
        // The transform and the direct count can disagree by one scenario at
        // exact ties; fall back to a direct bisection in that case.
        need_direct = g_residual(s, blend(spec.anchor, x, lo), ref) > 0.0;
        if (need_direct) {
            hi = lo;
            lo = 0.0;
        }
    }

    if (need_direct) {
        auto g_at = [&](double lambda) {
            return g_residual(s, blend(spec.anchor, x, lambda), ref);
        };
        for (int it = 0; it < spec.max_bisections && hi - lo > spec.lambda_tolerance; ++it) {
            const double mid = 0.5 * (lo + hi);
            (g_at(mid) <= 0.0 ? lo : hi) = mid;
        }
    }
    return {blend(spec.anchor, x, lo), lo};
}

double star_lambda_h(const StepQuantile& qx, const ReferenceProfile& ref, double riskfree_return) {
    if (h_residual_from_quantile(qx, ref) <= 0.0) return 1.0;
    const StepQuantile& qr = ref.quantile;
    double lambda = 1.0;
    auto consider = [&](double q_ref, double q_x) {
        if (q_x < q_ref) lambda = std::min(lambda, (q_ref - riskfree_return) / (q_x - riskfree_return));
    };
    for (std::size_t i = 0; i < qr.grid.size(); ++i) consider(qr.values[i], qx(qr.grid[i]));
    consider(qr.values.back(), qx(1.0));
    return lambda;
}

StarProjection star_project_h_analytic(const ScenarioMatrix& s, const Vec& x,
                                       const ReferenceProfile& ref, const PenaltySpec& spec) {
    if (spec.anchor.size() != x.size())
        throw std::invalid_argument("star_project_h_analytic: anchor dimension mismatch");
    if (!spec.anchor_riskfree)
        throw std::invalid_argument("star_project_h_analytic: anchor is not risk-free");

    double lambda = star_lambda_h(empirical_quantile(s, x), ref, spec.anchor_return);
    if (lambda >= 1.0) return {x, 1.0};

    Vec p = blend(spec.anchor, x, lambda);
    // The closed form lands exactly on the constraint boundary; shave lambda
    // until the recomputed residual of the blended point is nonpositive.
    for (int tries = 0; h_residual(s, p, ref) > 0.0; ++tries) {
        if (tries > 64)
            throw std::runtime_error("star_project_h_analytic: could not certify the projection");
        lambda = lambda <= 1e-300 ? 0.0 : lambda * (1.0 - 1e-13);
        p = blend(spec.anchor, x, lambda);
    }
    return {std::move(p), lambda};
}

namespace {

double dominance_residual_for_variant(const Vec& returns, const ReferenceProfile& ref,
                                      PenaltyVariant variant) {
    if (variant == PenaltyVariant::DiscontinuousG || variant == PenaltyVariant::ProjectiveG)
        return g_residual_from_returns(returns, ref);
    return h_residual_from_quantile(quantile_from_samples(returns), ref);
}

}  // namespace

double penalized_discontinuous(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                               const FeasibleBox& box, const Objective& obj,
                               const PenaltySpec& spec) {
    if (spec.variant != PenaltyVariant::DiscontinuousG &&
        spec.variant != PenaltyVariant::DiscontinuousH)
        throw std::invalid_argument("penalized_discontinuous: wrong penalty variant");
    const Vec y = project_box(x, box);
    const double outside = distance2(x, y);
    const Vec ry = portfolio_returns(s, y);
    const double residual = dominance_residual_for_variant(ry, ref, spec.variant);
    const double value = indicator_from_returns(ry, obj);
    if (spec.literal_offset) return value - spec.offset - std::max(0.0, residual) - outside;
    if (residual > 0.0) return value - spec.offset - residual - outside;
    return value - outside;
}

double penalized_projective(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                            const FeasibleBox& box, const Objective& obj,
                            const PenaltySpec& spec) {
    if (spec.variant != PenaltyVariant::ProjectiveG &&
        spec.variant != PenaltyVariant::ProjectiveHAnalytic)
        throw std::invalid_argument("penalized_projective: wrong penalty variant");
    const Vec y = project_box(x, box);
    const double outside = distance2(x, y);
    const StarProjection star = spec.variant == PenaltyVariant::ProjectiveG
                                    ? star_project_g(s, y, ref, spec)
                                    : star_project_h_analytic(s, y, ref, spec);
    const double value = indicator(s, star.point, obj);
    return value - distance2(star.point, y) - outside;
}

PenalizedObjective::PenalizedObjective(ScenarioMatrix s, ReferenceProfile ref, FeasibleBox box,
                                       Objective obj, PenaltySpec spec)
    : scenarios_(std::move(s)),
      reference_(std::move(ref)),
      box_(std::move(box)),
      objective_(obj),
      spec_(std::move(spec)) {}

double PenalizedObjective::operator()(const Vec& x) const {
    switch (spec_.variant) {
        case PenaltyVariant::DiscontinuousG:
        case PenaltyVariant::DiscontinuousH:
            return penalized_discontinuous(scenarios_, x, reference_, box_, objective_, spec_);
        case PenaltyVariant::ProjectiveG:
        case PenaltyVariant::ProjectiveHAnalytic:
            return penalized_projective(scenarios_, x, reference_, box_, objective_, spec_);
    }
    throw std::logic_error("PenalizedObjective: unknown variant");
}

PenalizedObjective::Evaluation PenalizedObjective::evaluate(const Vec& x) const {
    Evaluation ev;
    ev.boxed = project_box(x, box_);
    const double outside = distance2(x, ev.boxed);
    const Vec ry = portfolio_returns(scenarios_, ev.boxed);
    switch (spec_.variant) {
        case PenaltyVariant::DiscontinuousG:
        case PenaltyVariant::DiscontinuousH: {
            ev.feasible_point = ev.boxed;
            ev.lambda = 1.0;
            ev.residual = dominance_residual_for_variant(ry, reference_, spec_.variant);
            const double value = indicator_from_returns(ry, objective_);
            if (spec_.literal_offset)
                ev.value = value - spec_.offset - std::max(0.0, ev.residual) - outside;
            else
                ev.value = ev.residual > 0.0 ? value - spec_.offset - ev.residual - outside
                                             : value - outside;
            return ev;
        }
        case PenaltyVariant::ProjectiveG:
        case PenaltyVariant::ProjectiveHAnalytic: {
            const StarProjection star =
                spec_.variant == PenaltyVariant::ProjectiveG
                    ? star_project_g(scenarios_, ev.boxed, reference_, spec_)
                    : star_project_h_analytic(scenarios_, ev.boxed, reference_, spec_);
            ev.feasible_point = star.point;
            ev.lambda = star.lambda;
            const Vec rp = portfolio_returns(scenarios_, star.point);
            ev.residual = dominance_residual_for_variant(rp, reference_, spec_.variant);
            ev.value = indicator_from_returns(rp, objective_) -
                       distance2(star.point, ev.boxed) - outside;
            return ev;
        }
    }
    throw std::logic_error("PenalizedObjective: unknown variant");
}

}  // namespace riskshape
