#include "riskshape/harness.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace riskshape {

using nlohmann::json;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Vec to_vec(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    Vec out;
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigError(std::string(what) + " must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

std::size_t resolve_column(const json& token, const std::vector<std::string>& labels,
                           const char* what) {
    if (token.is_number_integer()) {
        const long long idx = token.get<long long>();
        if (idx < 1 || static_cast<std::size_t>(idx) > labels.size())
            throw ConfigError(std::string(what) + ": column index " + std::to_string(idx) +
                              " out of range (1-based)");
        return static_cast<std::size_t>(idx - 1);
    }
    if (token.is_string()) {
        const std::string name = token.get<std::string>();
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (labels[j] == name) return j;
        throw ConfigError(std::string(what) + ": no dataset column named '" + name + "'");
    }
    throw ConfigError(std::string(what) + ": expected a 1-based index or a column name");
}

Objective parse_objective(const json& j) {
    if (!j.is_object() || !j.contains("kind"))
        throw ConfigError("objective must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mean") return Objective::mean();
    if (kind == "var") return Objective::value_at_risk(j.at("gamma").get<double>());
    if (kind == "avar") {
        // "AVaR_gamma" means the window [gamma, 1].
        if (j.contains("gamma"))
            return Objective::average_value_at_risk(j.at("gamma").get<double>(), 1.0);
        return Objective::average_value_at_risk(j.at("alpha").get<double>(),
                                                j.at("beta").get<double>());
    }
    throw ConfigError("objective kind must be one of mean|var|avar");
}

PenaltyVariant parse_variant(const std::string& v) {
    if (v == "discontinuous_g") return PenaltyVariant::DiscontinuousG;
    if (v == "discontinuous_h") return PenaltyVariant::DiscontinuousH;
    if (v == "projective_g") return PenaltyVariant::ProjectiveG;
    if (v == "projective_h_analytic") return PenaltyVariant::ProjectiveHAnalytic;
    throw ConfigError("penalty.variant must be one of discontinuous_g|discontinuous_h|"
                      "projective_g|projective_h_analytic");
}

ReferenceConfig parse_reference(const json& j) {
    ReferenceConfig rc;
    if (j.contains("portfolio")) {
        rc.from_portfolio = true;
        rc.portfolio = to_vec(j.at("portfolio"), "reference.portfolio");
        if (j.contains("delta_per_jump"))
            rc.delta_per_jump = to_vec(j.at("delta_per_jump"), "reference.delta_per_jump");
        else
            rc.delta = j.value("delta", 0.0);
    } else if (j.contains("steps")) {
        for (const auto& p : j.at("steps")) {
            if (!p.is_array() || p.size() != 2)
                throw ConfigError("reference.steps must be [threshold, level] pairs");
            rc.steps.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
    } else {
        throw ConfigError("reference needs either 'portfolio' or 'steps'");
    }
    return rc;
}

void parse_smoother(const json& j, SmootherConfig& sc) {
    sc.theta1 = j.value("theta1", sc.theta1);
    sc.stages = j.value("stages", sc.stages);
    sc.inner_steps = j.value("inner_steps", sc.inner_steps);
    sc.step = j.value("step", sc.step);
    sc.extrapolation = j.value("extrapolation", sc.extrapolation);
    sc.normalize_directions = j.value("normalize", sc.normalize_directions);
    sc.two_point = j.value("two_point", sc.two_point);
    sc.tracker_threshold = j.value("tracker_threshold", sc.tracker_threshold);
}

void parse_bnb(const json& j, BnBConfig& bc, bool& enabled) {
    enabled = j.value("enabled", true);
    bc.epsilon = j.value("epsilon", bc.epsilon);
    bc.delta = j.value("delta", bc.delta);
    bc.max_iterations = j.value("max_iterations", bc.max_iterations);
    bc.progress_tol = j.value("progress_tol", bc.progress_tol);
    bc.max_boxes = j.value("max_boxes", bc.max_boxes);
    bc.stale_limit = j.value("stale_limit", bc.stale_limit);
    bc.workers = j.value("workers", bc.workers);
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw CsvError("config parse error in " + path + ": " + e.what());
    }
    try {
        RunConfig cfg;
        cfg.dataset_path = j.at("dataset").get<std::string>();
        const Dataset ds = load_csv(cfg.dataset_path);
        const auto& labels = ds.scenarios.asset_labels;

        if (!j.contains("assets") || !j.at("assets").is_array() || j.at("assets").empty())
            throw ConfigError("assets must be a nonempty array");
        for (const auto& token : j.at("assets")) {
            const std::size_t col = resolve_column(token, labels, "assets");
            cfg.assets.push_back(col);
            cfg.asset_names.push_back(labels[col]);
        }

        cfg.objective = parse_objective(j.at("objective"));

        const json& refs = j.at("reference");
        if (refs.is_array())
            for (const auto& r : refs) cfg.references.push_back(parse_reference(r));
        else
            cfg.references.push_back(parse_reference(refs));

        const json& pen = j.at("penalty");
        cfg.variant = parse_variant(pen.at("variant").get<std::string>());
        if (pen.contains("c")) cfg.penalty_c = pen.at("c").get<double>();
        cfg.penalty_margin = pen.value("margin", 0.0);
        cfg.literal_offset = pen.value("literal_offset", false);
        cfg.lambda_tolerance = pen.value("lambda_tolerance", 1e-9);
        cfg.max_bisections = pen.value("bisections", 60);
        if (!pen.contains("anchor")) throw ConfigError("penalty.anchor is required");
        const json& anchor = pen.at("anchor");
        if (anchor.is_array()) {
            cfg.anchor = to_vec(anchor, "penalty.anchor");
        } else {
            // single-asset anchor: unit weight on one selected asset
            const json& token = anchor.is_object() ? anchor.at("asset") : anchor;
            const std::size_t col = resolve_column(token, labels, "penalty.anchor");
            const auto it = std::find(cfg.assets.begin(), cfg.assets.end(), col);
            if (it == cfg.assets.end())
                throw ConfigError("penalty.anchor asset is not part of the selected assets");
            cfg.anchor.assign(cfg.assets.size(), 0.0);
            cfg.anchor[static_cast<std::size_t>(it - cfg.assets.begin())] = 1.0;
        }

        if (j.contains("box")) {
            const json& box = j.at("box");
            if (box.contains("lower")) {
                if (box.at("lower").is_array())
                    cfg.box_lower = to_vec(box.at("lower"), "box.lower");
                else
                    cfg.box_lower.assign(cfg.assets.size(), box.at("lower").get<double>());
            }
        }
        if (cfg.box_lower.empty()) cfg.box_lower.assign(cfg.assets.size(), 0.0);
        if (cfg.box_lower.size() != cfg.assets.size())
            throw ConfigError("box.lower length does not match the asset selection");

        if (j.contains("smoother")) parse_smoother(j.at("smoother"), cfg.smoother);
        if (j.contains("bnb")) parse_bnb(j.at("bnb"), cfg.bnb, cfg.bnb_enabled);
        cfg.restarts = j.value("restarts", 10);
        if (cfg.restarts < 1) throw ConfigError("restarts must be >= 1");
        cfg.seed = j.value("seed", std::uint64_t{1});
        if (j.contains("report_levels")) {
            cfg.report_var_level = j.at("report_levels").value("var", 0.4);
            cfg.report_avar_level = j.at("report_levels").value("avar", 0.4);
        }
        if (j.contains("output")) {
            cfg.report_path = j.at("output").value("report", "");
            cfg.profile_path = j.at("output").value("profile", "");
        }
        if (j.contains("scan")) {
            cfg.scan_resolution = j.at("scan").value("resolution", 400);
            cfg.scan_path = j.at("scan").value("output", "");
        }
        if (j.contains("portfolio")) cfg.portfolio = to_vec(j.at("portfolio"), "portfolio");
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError("bad config " + path + ": " + e.what());
    }
}

Problem build_problem(const RunConfig& cfg) {
    const Dataset ds = load_csv(cfg.dataset_path);
    Problem pr;
    pr.scenarios = ds.scenarios.select_columns(cfg.assets);
    pr.asset_names = pr.scenarios.asset_labels;

    std::vector<ReferenceProfile> profiles;
    for (const auto& rc : cfg.references) {
        if (rc.from_portfolio) {
            if (rc.portfolio.size() != pr.scenarios.n)
                throw ConfigError("reference.portfolio length does not match the asset selection");
            profiles.push_back(rc.delta_per_jump.empty()
                                   ? reference_from_portfolio(pr.scenarios, rc.portfolio, rc.delta)
                                   : reference_from_portfolio(pr.scenarios, rc.portfolio,
                                                              rc.delta_per_jump));
        } else {
            profiles.push_back(reference_from_steps(rc.steps));
        }
    }
    pr.reference = merge_profiles(profiles);
    const bool quantile_form = cfg.variant == PenaltyVariant::DiscontinuousH ||
                               cfg.variant == PenaltyVariant::ProjectiveHAnalytic;
    pr.reference.form = quantile_form ? ProfileForm::Quantile : ProfileForm::Cdf;

    pr.box.lower = cfg.box_lower;
    pr.box.budget = 1.0;
    pr.objective = cfg.objective;
    if (cfg.anchor.size() != pr.scenarios.n)
        throw ConfigError("penalty.anchor length does not match the asset selection");
    pr.spec = make_penalty_spec(cfg.variant, pr.scenarios, pr.reference, pr.box, pr.objective,
                                cfg.anchor, cfg.penalty_c, cfg.penalty_margin);
    pr.spec.lambda_tolerance = cfg.lambda_tolerance;
    pr.spec.max_bisections = cfg.max_bisections;
    pr.spec.literal_offset = cfg.literal_offset;
    return pr;
}

std::string report_to_json(const RunReport& r) {
    json j;
    j["assets"] = r.assets;
    j["weights"] = r.weights;
    j["objective_value"] = r.objective_value;
    j["mean"] = r.mean;
    j["var"] = {{"level", r.var_level}, {"value", r.var_value}};
    j["avar"] = {{"level", r.avar_level}, {"value", r.avar_value}};
    j["residual_g"] = r.residual_g;
    j["residual_h"] = r.residual_h;
    j["budget_slack"] = r.budget_slack;
    j["feasible"] = r.feasible;
    j["evaluations"] = r.evaluations;
    j["restarts"] = r.restarts;
    j["wall_time_ms"] = r.wall_time_ms;
    j["seed"] = r.seed;
    json pp = json::array(), pr = json::array();
    for (const auto& [t, level] : r.profile_portfolio) pp.push_back({t, level});
    for (const auto& [t, level] : r.profile_reference) pr.push_back({t, level});
    j["profile"] = {{"portfolio", pp}, {"reference", pr}};
    return j.dump(2) + "\n";
}

RunReport run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem pr = build_problem(cfg);
    const PenalizedObjective penalized(pr.scenarios, pr.reference, pr.box, pr.objective, pr.spec);
    const ValueFn negated = [&penalized](const Vec& x) { return -penalized(x); };

    const std::size_t n = pr.scenarios.n;
    const Vec root_lower = pr.box.lower;
    Vec root_upper(n, pr.box.budget);

    Vec best_x;
    double best_value = std::numeric_limits<double>::infinity();
    long long evaluations = 0;
    for (int rep = 0; rep < cfg.restarts; ++rep) {
        const std::uint64_t restart_seed = derive_seed(cfg.seed, 0x726573ULL, rep);
        OptimizeResult r;
        if (cfg.bnb_enabled) {
            BnBConfig bc = cfg.bnb;
            bc.seed = restart_seed;
            bc.local = cfg.smoother;
            r = solve(root_lower, root_upper, negated, bc);
        } else {
            SmootherConfig sc = cfg.smoother;
            sc.seed = derive_seed(restart_seed, 1);
            sc.lower = root_lower;
            sc.upper = root_upper;
            sc.maximize = false;
            std::mt19937_64 rng(derive_seed(restart_seed, 2));
            Vec start(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::uniform_real_distribution<double> uniform(root_lower[i], root_upper[i]);
                start[i] = uniform(rng);
            }
            r = minimize(negated, start, sc);
        }
        evaluations += r.evaluations;
        if (r.value_best < best_value) {
            best_value = r.value_best;
            best_x = r.x_best;
        }
    }

    const auto ev = penalized.evaluate(best_x);
    const Vec& w = ev.feasible_point;
    const auto feas = is_feasible(pr.scenarios, w, pr.reference, pr.box);

    RunReport rep;
    rep.assets = pr.asset_names;
    rep.weights = w;
    rep.objective_value = indicator(pr.scenarios, w, pr.objective);
    rep.mean = indicator(pr.scenarios, w, Objective::mean());
    rep.var_level = cfg.report_var_level;
    rep.var_value = indicator(pr.scenarios, w, Objective::value_at_risk(cfg.report_var_level));
    rep.avar_level = cfg.report_avar_level;
    rep.avar_value =
        indicator(pr.scenarios, w, Objective::average_value_at_risk(cfg.report_avar_level, 1.0));
    rep.residual_g = g_residual(pr.scenarios, w, pr.reference);
    rep.residual_h = h_residual(pr.scenarios, w, pr.reference);
    rep.budget_slack = -pr.box.budget_residual(w);
    rep.feasible = feas.feasible;
    rep.evaluations = evaluations;
    rep.restarts = cfg.restarts;
    rep.seed = cfg.seed;
    const StepCdf pcdf = empirical_cdf(pr.scenarios, w);
    for (std::size_t i = 0; i < pcdf.breakpoints.size(); ++i)
        rep.profile_portfolio.emplace_back(pcdf.breakpoints[i], pcdf.levels[i]);
    for (std::size_t i = 0; i < pr.reference.cdf.breakpoints.size(); ++i)
        rep.profile_reference.emplace_back(pr.reference.cdf.breakpoints[i],
                                           pr.reference.cdf.levels[i]);
    rep.wall_time_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

    if (!cfg.report_path.empty()) atomic_write(cfg.report_path, report_to_json(rep));
    if (!cfg.profile_path.empty()) export_profile(pr.scenarios, w, pr.reference, cfg.profile_path);
    return rep;
}

void export_profile(const ScenarioMatrix& s, const Vec& x, const ReferenceProfile& ref,
                    const std::string& path) {
    const StepCdf portfolio = empirical_cdf(s, x);
    Vec ts = portfolio.breakpoints;
    ts.insert(ts.end(), ref.cdf.breakpoints.begin(), ref.cdf.breakpoints.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    std::ostringstream out;
    out << "t,cdf_portfolio,cdf_reference\n";
    auto emit = [&](double t) {
        out << format_double(t) << ',' << format_double(portfolio(t)) << ','
            << format_double(ref.cdf(t)) << '\n';
    };
    for (double t : ts) {
        emit(t);
        emit(t + 1e-9 * std::max(1.0, std::abs(t)));
    }
    atomic_write(path, out.str());
}

std::size_t scan_feasible(const Problem& pr, int resolution, const std::string& path) {
    if (pr.scenarios.n != 2)
        throw std::invalid_argument("scan_feasible: exactly 2 free assets required");
    if (resolution < 2 || resolution > 2000)
        throw std::invalid_argument("scan_feasible: resolution must lie in [2, 2000]");

    std::ostringstream out;
    out << "x1,x2,g_residual,feasible\n";
    std::size_t feasible_count = 0;
    Vec x(2);
    for (int i = 0; i < resolution; ++i) {
        x[0] = pr.box.lower[0] +
               (pr.box.budget - pr.box.lower[0]) * i / static_cast<double>(resolution - 1);
        for (int j = 0; j < resolution; ++j) {
            x[1] = pr.box.lower[1] +
                   (pr.box.budget - pr.box.lower[1]) * j / static_cast<double>(resolution - 1);
            const double g = g_residual(pr.scenarios, x, pr.reference);
            const bool ok = g <= 0.0 && pr.box.contains(x);
            feasible_count += ok;
            out << format_double(x[0]) << ',' << format_double(x[1]) << ',' << format_double(g)
                << ',' << (ok ? 1 : 0) << '\n';
        }
    }
    if (!path.empty()) atomic_write(path, out.str());
    return feasible_count;
}

void atomic_write(const std::string& path, const std::string& contents) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream out(tmp);
        if (!out) throw CsvError("cannot write file: " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, target);
}

}  // namespace riskshape
