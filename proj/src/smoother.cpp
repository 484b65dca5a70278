#include "riskshape/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskshape {

GradientTracker track_gradient(GradientTracker t, const Vec& sample, double lambda_k) {
    if (!(lambda_k >= 0.0 && lambda_k <= 1.0))
        throw std::invalid_argument("track_gradient: lambda_k outside [0,1]");
    if (t.z.empty()) t.z.assign(sample.size(), 0.0);
    if (t.z.size() != sample.size())
        throw std::invalid_argument("track_gradient: sample dimension mismatch");
    for (std::size_t i = 0; i < sample.size(); ++i) t.z[i] -= lambda_k * (t.z[i] - sample[i]);
    t.k += 1;
    return t;
}

namespace {

double checked(const ValueFn& f, const Vec& x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw NonFiniteError(x);
    return v;
}

}  // namespace

Vec gradient_sample(const ValueFn& f, const Vec& x, double theta, std::mt19937_64& rng) {
    if (!(theta > 0.0)) throw std::invalid_argument("gradient_sample: theta must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = x.size();
    Vec eta(n), xp(n), xm(n);
    for (std::size_t i = 0; i < n; ++i) {
        eta[i] = normal(rng);
        xp[i] = x[i] + theta * eta[i];
        xm[i] = x[i] - theta * eta[i];
    }
    const double scale = (checked(f, xp) - checked(f, xm)) / (2.0 * theta);
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = eta[i] * scale;
    return g;
}

Vec one_sided_gradient_sample(const ValueFn& f, const Vec& x, double theta, std::mt19937_64& rng) {
    if (!(theta > 0.0))
        throw std::invalid_argument("one_sided_gradient_sample: theta must be positive");
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = x.size();
    Vec eta(n), xp(n);
    for (std::size_t i = 0; i < n; ++i) {
        eta[i] = normal(rng);
        xp[i] = x[i] + theta * eta[i];
    }
    const double scale = (checked(f, xp) - checked(f, x)) / theta;
    Vec g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = eta[i] * scale;
    return g;
}

OptimizeResult minimize(const ValueFn& f, const Vec& x_start, const SmootherConfig& cfg) {
    const std::size_t n = x_start.size();
    if (n == 0) throw std::invalid_argument("minimize: empty start point");
    if (!all_finite(x_start)) throw std::invalid_argument("minimize: non-finite start point");
    if (!(cfg.theta1 > 0.0)) throw std::invalid_argument("minimize: theta1 must be positive");
    if (cfg.stages < 1) throw std::invalid_argument("minimize: need at least one stage");
    if (!(cfg.step > 0.0)) throw std::invalid_argument("minimize: step must be positive");
    const bool boxed = !cfg.lower.empty();
    if (boxed && (cfg.lower.size() != n || cfg.upper.size() != n))
        throw std::invalid_argument("minimize: clip box dimension mismatch");

    const int inner =
        cfg.inner_steps > 0 ? cfg.inner_steps
                            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.stages))));
    const double sign = cfg.maximize ? -1.0 : 1.0;

    long long evals = 0;
    const ValueFn g = [&](const Vec& p) {
        ++evals;
        const double v = f(p);
        if (!std::isfinite(v)) throw NonFiniteError(p);
        return sign * v;
    };
    auto clip = [&](Vec p) {
        if (boxed)
            for (std::size_t i = 0; i < n; ++i)
                p[i] = std::min(std::max(p[i], cfg.lower[i]), cfg.upper[i]);
        return p;
    };

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    OptimizeResult out;
    out.x_best = clip(x_start);
    double best = g(out.x_best);

    auto inside = [&](const Vec& p) {
        if (!boxed) return true;
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] < cfg.lower[i] || p[i] > cfg.upper[i]) return false;
        return true;
    };
    // Probe values come out of the sampling budget anyway; in-box probes are
    // free candidates, which matters on discontinuous landscapes where the
    // stage average can fall on the wrong side of a jump.
    auto consider = [&](const Vec& p, double value) {
        if (value < best && inside(p)) {
            best = value;
            out.x_best = p;
        }
    };

    Vec previous_average = out.x_best;
    Vec cur = out.x_best;
    Vec eta(n), probe_up(n), probe_down(n), xi(n);
    for (int stage = 1; stage <= cfg.stages; ++stage) {
        const double theta = std::max(
            cfg.theta1 * (1.0 - static_cast<double>(stage - 1) / cfg.stages),
            cfg.theta1 / cfg.stages);
        const double rho = cfg.step * theta;

        Vec average(n, 0.0);
        GradientTracker tracker;
        int taken = 0;
        for (int k = 0; k < inner; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                eta[i] = normal(rng);
                probe_up[i] = cur[i] + theta * eta[i];
            }
            const double up = g(probe_up);
            consider(probe_up, up);
            double slope;
            if (cfg.two_point) {
                for (std::size_t i = 0; i < n; ++i) probe_down[i] = cur[i] - theta * eta[i];
                const double down = g(probe_down);
                consider(probe_down, down);
                slope = (up - down) / (2.0 * theta);
            } else {
                const double at = g(cur);
                consider(cur, at);
                slope = (up - at) / theta;
            }
            for (std::size_t i = 0; i < n; ++i) xi[i] = eta[i] * slope;
            double scale = 1.0;
            if (cfg.normalize_directions) scale = 1.0 / std::max(norm2(xi), 1e-12);
            for (std::size_t i = 0; i < n; ++i) cur[i] -= rho * scale * xi[i];
            cur = clip(std::move(cur));
            for (std::size_t i = 0; i < n; ++i) average[i] += cur[i];
            ++taken;
            if (cfg.tracker_threshold > 0.0) {
                tracker = track_gradient(std::move(tracker), xi,
                                         1.0 / static_cast<double>(tracker.k + 1));
                if (norm2(tracker.z) < cfg.tracker_threshold) break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) average[i] /= taken;
        out.stage_trace.push_back(average);

        consider(average, g(average));

        Vec next(n);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = average[i] + cfg.extrapolation * (average[i] - previous_average[i]);
        previous_average = std::move(average);
        cur = clip(std::move(next));
    }

    out.value_best = sign * best;
    out.evaluations = evals;
    return out;
}

}  // namespace riskshape
