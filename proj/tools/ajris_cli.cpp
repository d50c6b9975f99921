// Command-line front end: runs one sweep and writes the CSV.

#include "ajris/ajris.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> default_values(ajris::SweepAxis axis, const ajris::ScenarioConfig& cfg)
{
    using ajris::SweepAxis;
    switch (axis) {
    case SweepAxis::M: return {5, 10, 15, 20, 25, 30, 40, 50};
    case SweepAxis::EMse: return {0.0, 0.05, 0.1, 0.2};
    case SweepAxis::PMaxDbm: return {30, 32, 34, 36, 38, 40};
    case SweepAxis::AlphaR: return {2.0, 2.2, 2.4, 2.6};
    case SweepAxis::B: return {2, 4, 6, 8};
    case SweepAxis::Iterations: {
        std::vector<double> v;
        for (int i = 1; i <= cfg.knobs.r_max; ++i)
            v.push_back(i);
        return v;
    }
    }
    return {};
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || ajris::detail::trim(item.substr(used)).size())
            throw ajris::Error(ajris::ErrorCode::ParseError, "--values: cannot read '" + item + "'");
        out.push_back(v);
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Anti-jamming RIS sweep runner"};
    std::string scenario, profile = "paper", scheme = "all", sweep, values, out;
    int trials = 0, threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--scenario", scenario, "key = value config file applied on top of the profile");
    app.add_option("--profile", profile, "built-in base profile")->check(CLI::IsMember({"paper", "desk"}));
    app.add_option("--scheme", scheme, "active-harvesting, passive-ris, no-ris, a comma list, or all");
    app.add_option("--sweep", sweep, "M, e_mse, P_max_dbm, alpha_R, B or iterations");
    app.add_option("--values", values, "comma-separated axis values");
    auto* trials_opt = app.add_option("--trials", trials, "trials per point")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    auto* threads_opt = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "CSV path (default: stdout)");
    CLI11_PARSE(app, argc, argv);

    ajris::ScenarioConfig cfg;
    std::vector<ajris::Scheme> schemes;
    ajris::SweepAxis axis = ajris::SweepAxis::M;
    std::vector<double> grid;
    try {
        cfg = ajris::profile_by_name(profile);
        if (!scenario.empty())
            cfg = ajris::load_scenario(scenario, cfg);
        if (*trials_opt)
            cfg.trials = trials;
        if (*seed_opt)
            cfg.seed = seed;
        if (*threads_opt)
            cfg.threads = threads;
        ajris::validate(cfg);
        schemes = ajris::parse_schemes(scheme);
        if (sweep.empty()) {
            grid = {static_cast<double>(cfg.m)};
        } else {
            axis = ajris::axis_from_string(sweep);
            grid = values.empty() ? default_values(axis, cfg) : parse_values(values);
        }
    } catch (const ajris::Error& e) {
        std::cerr << "ajris_cli: " << e.what() << '\n';
        return 2;
    }

    try {
        const ajris::SweepResult res = ajris::run_sweep(cfg, axis, grid, schemes);
        // every scheme of a point shares one wall-clock figure
        for (std::size_t i = 0; i < res.rows.size(); i += schemes.size())
            std::cerr << res.axis << '=' << ajris::format_g6(res.rows[i].value) << ": "
                      << ajris::format_g6(res.rows[i].seconds) << " s\n";
        if (out.empty()) {
            ajris::write_csv(std::cout, res.rows);
        } else {
            std::ofstream f(out, std::ios::binary);
            if (!f) {
                std::cerr << "ajris_cli: cannot open " << out << '\n';
                return 1;
            }
            ajris::write_csv(f, res.rows);
        }
    } catch (const ajris::Error& e) {
        std::cerr << "ajris_cli: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
