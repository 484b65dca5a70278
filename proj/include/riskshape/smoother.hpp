// Successive stochastic smoothing: Gaussian mollification with two-point
// finite-difference gradient estimates, staged radius decay, trajectory
// averaging and inter-stage extrapolation.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "riskshape/common.hpp"

namespace riskshape {

using ValueFn = std::function<double(const Vec&)>;

struct SmootherConfig {
    double theta1 = 0.2;  // initial smoothing radius
    int stages = 36;      // number of smoothing stages N
    int inner_steps = 0;  // gradient steps per stage; 0 means ceil(sqrt(N))
    double step = 0.5;    // base step length; the stage step is step * theta_nu
    double extrapolation = 1.0;  // inter-stage hand-off coefficient beta
    bool normalize_directions = true;
    bool two_point = true;          // symmetric estimator; false = one-sided
    double tracker_threshold = 0.0;  // >0 stops a stage early once ||z|| drops below
    std::uint64_t seed = 1;
    bool maximize = false;
    Vec lower, upper;  // optional clip box for iterates (empty = unbounded)
};

// Running average z_{k+1} = z_k - lambda_k (z_k - sample) of gradient
// samples; a stage-stopping diagnostic, not part of the search direction.
struct GradientTracker {
    Vec z;
    long k = 0;
};

GradientTracker track_gradient(GradientTracker t, const Vec& sample, double lambda_k);

struct OptimizeResult {
    Vec x_best;
    double value_best = 0.0;  // objective re-evaluated at x_best
    long long evaluations = 0;
    std::vector<Vec> stage_trace;  // per-stage trajectory averages
};

// Two-point estimate (eta/2theta)[F(x+theta eta) - F(x-theta eta)] with eta
// standard normal; unbiased for the gradient of the Gaussian-averaged F.
Vec gradient_sample(const ValueFn& f, const Vec& x, double theta, std::mt19937_64& rng);

// One-sided variant (eta/theta)[F(x+theta eta) - F(x)].
Vec one_sided_gradient_sample(const ValueFn& f, const Vec& x, double theta, std::mt19937_64& rng);

// Staged smoothing descent; deterministic for a fixed seed.  Maximization
// runs on -F.  Throws NonFiniteError when F returns a non-finite value.
OptimizeResult minimize(const ValueFn& f, const Vec& x_start, const SmootherConfig& cfg);

}  // namespace riskshape
