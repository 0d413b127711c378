#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "liesym/liesym.hpp"

namespace {

int dispatch(const std::string& sub, const std::string& scenario_path,
             const liesym::RunOptions& opts) {
    const liesym::LoadResult loaded = liesym::load_scenario(scenario_path);
    if (!loaded.ok()) {
        std::cerr << "scenario validation failed:\n";
        for (const auto& e : loaded.errors)
            std::cerr << "  [" << e.field << "] " << e.message << "\n";
        return liesym::kExitValidation;
    }
    try {
        const liesym::RunOutcome out = liesym::run_subcommand(sub, *loaded.scenario, opts);
        for (const auto& m : out.messages) std::cerr << m << "\n";
        if (!out.report_file.empty())
            std::cout << "report: " << out.report_file.string() << "\n";
        if (!out.trajectory_file.empty())
            std::cout << "trajectory: " << out.trajectory_file.string() << "\n";
        return out.exit_code;
    } catch (const liesym::DegeneratePointError& e) {
        std::cerr << "degenerate point: Delta = " << e.delta << " (tolerance " << e.tol << ")\n";
        return liesym::kExitDegeneracy;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid scenario data: " << e.what() << "\n";
        return liesym::kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return liesym::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return liesym::kExitBlowUp;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hamiltonian flows on Lie group cotangent bundles: canonical, "
                 "cocycle-shifted and doubly-extended symplectic structures"};
    app.require_subcommand(1);

    std::string scenario_path;
    liesym::RunOptions opts;
    std::string out_dir = ".";
    bool overwrite = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario JSON file")->required();
        sub->add_option("--out", out_dir, "output directory (default: current)");
        sub->add_flag("--overwrite", overwrite, "replace existing output files");
    };
    CLI::App* simulate = app.add_subcommand("simulate", "integrate the flow and write a CSV trajectory");
    CLI::App* brackets = app.add_subcommand("brackets", "fundamental bracket table at the initial point");
    CLI::App* check = app.add_subcommand("check", "invariant suite at the initial point");
    CLI::App* gnh = app.add_subcommand("gnh", "constraint analysis of the degenerate stratum");
    for (CLI::App* sub : {simulate, brackets, check, gnh}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : liesym::kExitUsage;
    }

    opts.out_dir = out_dir;
    opts.overwrite = overwrite;
    const std::string sub = app.get_subcommands().front()->get_name();
    return dispatch(sub, scenario_path, opts);
}
