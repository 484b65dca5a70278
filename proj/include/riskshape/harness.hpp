// Experiment runner: run configuration, solver orchestration, report and
// profile export.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskshape/bnb.hpp"
#include "riskshape/csv.hpp"
#include "riskshape/penalty.hpp"

namespace riskshape {

// One reference constraint as configured: either a portfolio CDF relaxed by
// delta, or an explicit step list.
struct ReferenceConfig {
    bool from_portfolio = false;
    Vec portfolio;       // weights over the selected assets
    double delta = 0.0;  // scalar relaxation
    Vec delta_per_jump;  // optional per-jump table (overrides delta)
    std::vector<std::pair<double, double>> steps;  // (threshold, level) pairs
};

struct RunConfig {
    std::string dataset_path;
    std::vector<std::size_t> assets;  // 0-based column indices into the dataset
    std::vector<std::string> asset_names;
    Objective objective;
    std::vector<ReferenceConfig> references;  // merged by pointwise minimum
    PenaltyVariant variant = PenaltyVariant::DiscontinuousG;
    std::optional<double> penalty_c;
    double penalty_margin = 0.0;
    bool literal_offset = false;
    Vec anchor;  // weights over the selected assets
    double lambda_tolerance = 1e-9;
    int max_bisections = 60;
    Vec box_lower;  // per selected asset, defaults to 0
    SmootherConfig smoother;
    BnBConfig bnb;
    bool bnb_enabled = true;
    int restarts = 10;
    std::uint64_t seed = 1;
    double report_var_level = 0.4;
    double report_avar_level = 0.4;
    std::string report_path;   // empty = stdout only
    std::string profile_path;  // empty = skip
    int scan_resolution = 400;
    std::string scan_path;
    Vec portfolio;  // explicit portfolio for `feasible` / `profile` commands
};

// Parses the JSON config file (schema documented in the README).
RunConfig load_config(const std::string& path);

struct RunReport {
    std::vector<std::string> assets;
    Vec weights;  // reported feasible portfolio
    double objective_value = 0.0;
    double mean = 0.0;
    double var_level = 0.0, var_value = 0.0;
    double avar_level = 0.0, avar_value = 0.0;
    double residual_g = 0.0, residual_h = 0.0;
    double budget_slack = 0.0;
    bool feasible = false;
    long long evaluations = 0;
    int restarts = 0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
    // Step curves as breakpoint lists (t, level after the jump).
    std::vector<std::pair<double, double>> profile_portfolio;
    std::vector<std::pair<double, double>> profile_reference;
};

std::string report_to_json(const RunReport& r);

// Builds the penalized objective from the config, runs the globalizer (or
// plain multi-restart smoothing when B&B is disabled) and writes the report
// and profile files when paths are configured.  Deterministic per seed.
RunReport run(const RunConfig& cfg);

// Assembled problem pieces, exposed for tests and the CLI subcommands.
struct Problem {
    ScenarioMatrix scenarios;
    ReferenceProfile reference;
    FeasibleBox box;
    Objective objective;
    PenaltySpec spec;
    std::vector<std::string> asset_names;
};
Problem build_problem(const RunConfig& cfg);

// CSV with columns (t, cdf_portfolio, cdf_reference) sampled at the union of
// both breakpoint sets plus epsilon offsets, so step plots render exactly.
void export_profile(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                    const std::string& path);

// Brute-force feasibility scan over a 2-asset grid; writes rows
// (x1, x2, g_residual, feasible).  Returns the number of feasible points.
std::size_t scan_feasible(const Problem& problem, int resolution, const std::string& path);

// Write-temp-then-rename.
void atomic_write(const std::string& path, const std::string& contents);

}  // namespace riskshape
