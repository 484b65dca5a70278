// Branch-and-bound globalizer over weight boxes with the smoother as local
// optimizer: per-box restarts, split-on-disagreement, stale-box pruning.
#pragma once

#include <cstdint>
#include <vector>

#include "riskshape/smoother.hpp"

namespace riskshape {

struct Box {
    Vec lower, upper;
    Vec incumbent;
    double incumbent_value = 0.0;
    int stale = 0;        // iterations without a split or improvement
    std::uint64_t id = 0; // creation order; drives deterministic scheduling
};

struct BnBConfig {
    double epsilon = 1e-4;   // value-difference split threshold
    double delta = 0.05;     // point-distance split threshold
    int max_iterations = 10;
    double progress_tol = 0.0;  // stop once V_{k-1} - V_k falls below this
    std::size_t max_boxes = 32; // boxes processed per iteration; the rest freeze
    int stale_limit = 1000;     // retire a box untouched this many iterations
    int workers = 1;
    std::uint64_t seed = 1;
    SmootherConfig local;  // template for local runs; seed and bounds are set per box
};

struct DropEvent {
    std::uint64_t box_id = 0;
    int iteration = 0;
    double incumbent_value = 0.0;
};

struct Partition {
    std::vector<Box> active;
    std::vector<Box> retired;  // stale boxes; keep their incumbents and the root cover
    std::vector<double> value_history;  // V_0, V_1, ...
    std::vector<Vec> best_trace;        // best incumbent per iteration
    long long evaluations = 0;
    int iteration = 0;
    std::uint64_t next_id = 0;
    std::vector<DropEvent> drops;
};

// One root box, one local run from a random interior start.
Partition initialize(const Vec& lower, const Vec& upper, const ValueFn& f, const BnBConfig& cfg);

// Processes every active box (best-first under the max_boxes cap): fresh
// random start, local run, then split when the new point disagrees with the
// incumbent in value (>= epsilon) or location (>= delta).
void iterate(Partition& state, const ValueFn& f, const BnBConfig& cfg);

double best_value(const Partition& state);
const Box& best_box(const Partition& state);

// Loops iterate() until the incumbent progress drops below progress_tol or
// max_iterations is reached.  Minimizes f.
OptimizeResult solve(const Vec& lower, const Vec& upper, const ValueFn& f, const BnBConfig& cfg);

}  // namespace riskshape
