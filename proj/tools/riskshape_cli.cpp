// Command-line front end: solve / feasible / scan / profile / dataset.
#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "riskshape/harness.hpp"

namespace {

using namespace riskshape;

Vec parse_weight_list(const std::string& csv) {
    Vec out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

Vec pick_portfolio(const RunConfig& cfg, const std::string& override_csv) {
    if (!override_csv.empty()) return parse_weight_list(override_csv);
    if (!cfg.portfolio.empty()) return cfg.portfolio;
    throw ConfigError("no portfolio given: set 'portfolio' in the config or pass --portfolio");
}

int cmd_solve(const std::string& config_path, const std::string& report_override,
              const std::string& profile_override, std::uint64_t seed, bool has_seed) {
    RunConfig cfg = load_config(config_path);
    if (!report_override.empty()) cfg.report_path = report_override;
    if (!profile_override.empty()) cfg.profile_path = profile_override;
    if (has_seed) cfg.seed = seed;
    const RunReport rep = run(cfg);
    std::cout << report_to_json(rep);
    if (!rep.feasible) {
        std::cerr << "solver finished without a feasible portfolio (partial result)\n";
        return 4;
    }
    return 0;
}

int cmd_feasible(const std::string& config_path, const std::string& portfolio_csv) {
    const RunConfig cfg = load_config(config_path);
    const Problem pr = build_problem(cfg);
    const Vec x = pick_portfolio(cfg, portfolio_csv);
    const auto fr = is_feasible(pr.scenarios, x, pr.reference, pr.box);
    nlohmann::json j;
    j["feasible"] = fr.feasible;
    j["dominance_residual"] = fr.dominance;
    j["budget_residual"] = fr.budget;
    j["bound_residual"] = fr.bounds;
    j["residual_g"] = g_residual(pr.scenarios, x, pr.reference);
    j["residual_h"] = h_residual(pr.scenarios, x, pr.reference);
    std::cout << j.dump(2) << '\n';
    return fr.feasible ? 0 : 2;
}

int cmd_scan(const std::string& config_path, int resolution, const std::string& output) {
    const RunConfig cfg = load_config(config_path);
    const Problem pr = build_problem(cfg);
    const int res = resolution > 0 ? resolution : cfg.scan_resolution;
    const std::string path = !output.empty() ? output : cfg.scan_path;
    if (path.empty()) throw ConfigError("scan needs an output path (--output or scan.output)");
    const std::size_t feasible = scan_feasible(pr, res, path);
    std::cout << "scanned " << res << "x" << res << " grid, " << feasible
              << " feasible points -> " << path << '\n';
    return 0;
}

int cmd_profile(const std::string& config_path, const std::string& portfolio_csv,
                const std::string& output) {
    const RunConfig cfg = load_config(config_path);
    const Problem pr = build_problem(cfg);
    const Vec x = pick_portfolio(cfg, portfolio_csv);
    const std::string path = !output.empty() ? output : cfg.profile_path;
    if (path.empty())
        throw ConfigError("profile needs an output path (--output or output.profile)");
    export_profile(pr.scenarios, x, pr.reference, path);
    std::cout << "profile written to " << path << '\n';
    return 0;
}

int cmd_validate(const std::string& path) {
    const Dataset ds = load_csv(path);
    std::cout << "dataset ok: " << ds.scenarios.m << " scenarios x " << ds.scenarios.n
              << " assets\ncolumns:";
    for (const auto& name : ds.scenarios.asset_labels) std::cout << ' ' << name;
    std::cout << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Portfolio reshaping under first-order stochastic dominance constraints"};
    app.require_subcommand(1);

    std::string config_path, dataset_path, report_path, profile_path, output_path, portfolio_csv;
    int resolution = 0;
    std::uint64_t seed = 0;

    auto* solve_cmd = app.add_subcommand("solve", "run the configured experiment");
    solve_cmd->add_option("config", config_path, "config JSON file")->required();
    solve_cmd->add_option("--report", report_path, "override the report output path");
    solve_cmd->add_option("--profile", profile_path, "override the profile output path");
    auto* seed_opt = solve_cmd->add_option("--seed", seed, "override the run seed");

    auto* feasible_cmd = app.add_subcommand("feasible", "check a portfolio against the constraints");
    feasible_cmd->add_option("config", config_path, "config JSON file")->required();
    feasible_cmd->add_option("--portfolio", portfolio_csv, "comma-separated weights");

    auto* scan_cmd = app.add_subcommand("scan", "grid scan of a 2-asset feasible set");
    scan_cmd->add_option("config", config_path, "config JSON file")->required();
    scan_cmd->add_option("--resolution", resolution, "grid points per axis");
    scan_cmd->add_option("--output", output_path, "output CSV path");

    auto* profile_cmd = app.add_subcommand("profile", "export portfolio vs reference CDF curves");
    profile_cmd->add_option("config", config_path, "config JSON file")->required();
    profile_cmd->add_option("--portfolio", portfolio_csv, "comma-separated weights");
    profile_cmd->add_option("--output", output_path, "output CSV path");

    auto* dataset_cmd = app.add_subcommand("dataset", "dataset utilities");
    dataset_cmd->require_subcommand(1);
    auto* validate_cmd = dataset_cmd->add_subcommand("validate", "parse and validate a dataset");
    validate_cmd->add_option("path", dataset_path, "dataset CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve_cmd)
            return cmd_solve(config_path, report_path, profile_path, seed, seed_opt->count() > 0);
        if (*feasible_cmd) return cmd_feasible(config_path, portfolio_csv);
        if (*scan_cmd) return cmd_scan(config_path, resolution, output_path);
        if (*profile_cmd) return cmd_profile(config_path, portfolio_csv, output_path);
        if (*validate_cmd) return cmd_validate(dataset_path);
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
