#include "riskshape/bnb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace riskshape {

namespace {

Vec random_point(const Box& box, std::mt19937_64& rng) {
    Vec p(box.lower.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::uniform_real_distribution<double> uniform(box.lower[i], box.upper[i]);
        p[i] = box.lower[i] < box.upper[i] ? uniform(rng) : box.lower[i];
    }
    return p;
}

OptimizeResult run_box(const Box& box, const ValueFn& f, const BnBConfig& cfg, int iteration) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(iteration), box.id));
    const Vec start = random_point(box, rng);
    SmootherConfig local = cfg.local;
    local.seed = derive_seed(cfg.seed ^ 0x9d2c5680ULL, static_cast<std::uint64_t>(iteration), box.id);
    local.lower = box.lower;
    local.upper = box.upper;
    local.maximize = false;
    return minimize(f, start, local);
}

void record_best(Partition& st) {
    const Box* best = nullptr;
    for (const Box& b : st.active)
        if (!best || b.incumbent_value < best->incumbent_value) best = &b;
    for (const Box& b : st.retired)
        if (!best || b.incumbent_value < best->incumbent_value) best = &b;
    st.value_history.push_back(best->incumbent_value);
    st.best_trace.push_back(best->incumbent);
}

}  // namespace

Partition initialize(const Vec& lower, const Vec& upper, const ValueFn& f, const BnBConfig& cfg) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("bnb: bad root box");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i])) throw std::invalid_argument("bnb: root box is empty");
    if (!(cfg.epsilon > 0.0) || !(cfg.delta > 0.0) || cfg.progress_tol < 0.0 ||
        cfg.max_boxes < 1 || cfg.workers < 1 || cfg.stale_limit < 1)
        throw std::invalid_argument("bnb: bad configuration");

    Partition st;
    Box root;
    root.lower = lower;
    root.upper = upper;
    root.id = 0;
    st.next_id = 1;
    OptimizeResult r = run_box(root, f, cfg, 0);
    root.incumbent = std::move(r.x_best);
    root.incumbent_value = r.value_best;
    st.evaluations += r.evaluations;
    st.active.push_back(std::move(root));
    record_best(st);
    return st;
}

double best_value(const Partition& st) { return st.value_history.back(); }

const Box& best_box(const Partition& st) {
    const Box* best = nullptr;
    for (const Box& b : st.active)
        if (!best || b.incumbent_value < best->incumbent_value) best = &b;
    for (const Box& b : st.retired)
        if (!best || b.incumbent_value < best->incumbent_value) best = &b;
    if (!best) throw std::logic_error("bnb: empty partition");
    return *best;
}

void iterate(Partition& st, const ValueFn& f, const BnBConfig& cfg) {
    const int k = ++st.iteration;
    if (st.active.empty()) {
        record_best(st);
        return;
    }

    // Best-first schedule; boxes beyond the cap freeze for this round.
    std::vector<std::size_t> order(st.active.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (st.active[a].incumbent_value != st.active[b].incumbent_value)
            return st.active[a].incumbent_value < st.active[b].incumbent_value;
        return st.active[a].id < st.active[b].id;
    });
    const std::size_t jobs = std::min(order.size(), cfg.max_boxes);

    std::vector<OptimizeResult> outcomes(jobs);
    if (cfg.workers > 1 && jobs > 1) {
        const std::size_t workers = std::min<std::size_t>(cfg.workers, jobs);
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            futures.push_back(std::async(std::launch::async, [&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= jobs) break;
                    outcomes[i] = run_box(st.active[order[i]], f, cfg, k);
                }
            }));
        for (auto& fut : futures) fut.get();
    } else {
        for (std::size_t i = 0; i < jobs; ++i)
            outcomes[i] = run_box(st.active[order[i]], f, cfg, k);
    }

    std::vector<Box> next_active;
    next_active.reserve(st.active.size() + jobs);
    std::vector<char> processed(st.active.size(), 0);
    for (std::size_t i = 0; i < jobs; ++i) processed[order[i]] = 1;
    for (std::size_t idx = 0; idx < st.active.size(); ++idx)
        if (!processed[idx]) next_active.push_back(std::move(st.active[idx]));

    for (std::size_t i = 0; i < jobs; ++i) {
        Box box = std::move(st.active[order[i]]);
        OptimizeResult& out = outcomes[i];
        st.evaluations += out.evaluations;
        const Vec& fresh = out.x_best;
        const double fresh_value = out.value_best;

        std::size_t jstar = 0;
        double widest = -1.0;
        for (std::size_t j = 0; j < fresh.size(); ++j) {
            const double dj = std::abs(box.incumbent[j] - fresh[j]);
            if (dj > widest) {
                widest = dj;
                jstar = j;
            }
        }
        const bool disagree = std::abs(box.incumbent_value - fresh_value) >= cfg.epsilon ||
                              distance2(box.incumbent, fresh) >= cfg.delta;
        if (disagree && widest > 0.0) {
            // Split so the two points land in different subboxes.
            const double mid = 0.5 * (box.incumbent[jstar] + fresh[jstar]);
            Box low = box, high = box;
            low.upper[jstar] = mid;
            high.lower[jstar] = mid;
            low.id = st.next_id++;
            high.id = st.next_id++;
            low.stale = high.stale = 0;
            const bool incumbent_low = box.incumbent[jstar] < fresh[jstar];
            Box& incumbent_child = incumbent_low ? low : high;
            Box& fresh_child = incumbent_low ? high : low;
            incumbent_child.incumbent = box.incumbent;
            incumbent_child.incumbent_value = box.incumbent_value;
            fresh_child.incumbent = fresh;
            fresh_child.incumbent_value = fresh_value;
            next_active.push_back(std::move(low));
            next_active.push_back(std::move(high));
        } else {
            box.stale += 1;
            if (fresh_value < box.incumbent_value) {
                box.incumbent = fresh;
                box.incumbent_value = fresh_value;
            }
            next_active.push_back(std::move(box));
        }
    }

    st.active.clear();
    for (Box& box : next_active) {
        if (box.stale >= cfg.stale_limit) {
            st.drops.push_back({box.id, k, box.incumbent_value});
            st.retired.push_back(std::move(box));
        } else {
            st.active.push_back(std::move(box));
        }
    }
    record_best(st);
}

OptimizeResult solve(const Vec& lower, const Vec& upper, const ValueFn& f, const BnBConfig& cfg) {
    Partition st = initialize(lower, upper, f, cfg);
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        const double before = st.value_history.back();
        iterate(st, f, cfg);
        if (before - st.value_history.back() < cfg.progress_tol) break;
    }
    const Box& winner = best_box(st);
    OptimizeResult out;
    out.x_best = winner.incumbent;
    out.value_best = winner.incumbent_value;
    out.evaluations = st.evaluations;
    out.stage_trace = st.best_trace;
    return out;
}

}  // namespace riskshape
