#include "affinekit/checks.hpp"
#include "affinekit/errors.hpp"
#include "affinekit/measures.hpp"
#include "affinekit/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace affinekit;

namespace {

constexpr int kUsageError = 64;

int cmd_run(const std::string& path, const std::string& out) {
    const Scenario s = parse_scenario(path);
    const fs::path dir = out.empty() ? fs::path(s.output_dir) : fs::path(out);
    const RunResult r = run(s, dir);
    std::printf("status: %s\n", r.exit_code == 0 ? "completed" : "state_invalid (partial output)");
    std::printf("output: %s\n", r.dir.string().c_str());
    std::printf("determinism_hash: %s\n", r.hash.c_str());
    std::printf("wall_seconds: %.3f\n", r.wall_seconds);
    if (s.mode == ScenarioMode::Dynamics) {
        std::printf("drift: energy %.3e  Sigma %.3e  SigmaHat %.3e  S %.3e\n", r.drift.energy, r.drift.Sigma,
                    r.drift.SigmaHat, r.drift.S);
    }
    return r.exit_code;
}

int cmd_check(const std::string& suite) {
    bool known = false;
    for (auto name : suite_names()) known = known || name == suite;
    if (!known) {
        std::fprintf(stderr, "unknown suite '%s'; expected one of:", suite.c_str());
        for (auto name : suite_names()) std::fprintf(stderr, " %.*s", static_cast<int>(name.size()), name.data());
        std::fprintf(stderr, "\n");
        return kUsageError;
    }
    const SuiteReport rep = run_suite(suite);
    std::cout << rep.to_json() << '\n';
    return rep.pass() ? 0 : 1;
}

int cmd_spectrum(const SpectrumSpec& spec, const std::string& out) {
    const SpectrumResult r = compute_spectrum(spec);
    if (out.empty()) {
        std::cout << r.json;
        return 0;
    }
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "spectrum.json", std::ios::binary) << r.json;
    std::ofstream(fs::path(out) / "rho.csv", std::ios::binary) << r.csv;
    std::cout << r.json;
    return 0;
}

int cmd_measure_check(int n, int points, std::uint64_t seed) {
    const MeasureFit fit = fit_twopolar(n, points, seed);
    nlohmann::json j;
    j["n"] = n;
    j["exponent_e"] = fit.exponent_e;
    j["constant_c"] = fit.constant_c;
    j["expected_constant_c"] = twopolar_constant(n);
    j["max_rel_err"] = fit.max_rel_err;
    j["points"] = fit.points;
    j["spread_e1"] = fit.spread_e1;
    j["spread_e2"] = fit.spread_e2;
    std::cout << j.dump(2) << '\n';
    return fit.exponent_e == kSinhExponent && fit.max_rel_err <= 1e-6 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"affinekit: Hamiltonian dynamics of affinely-rigid bodies"};
    app.require_subcommand(1);

    std::string scenario_path, run_out;
    auto* run_cmd = app.add_subcommand("run", "Integrate a scenario and write its artifacts");
    run_cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    run_cmd->add_option("--out", run_out, "Output directory (default: the scenario's output.dir)");

    std::string suite;
    auto* check_cmd = app.add_subcommand("check", "Run a property suite and print a JSON report");
    check_cmd->add_option("suite", suite, "invariance | brackets | measures | legendre | qdesk")->required();

    SpectrumSpec spec;
    std::string spectrum_out;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Finite-difference spectrum of the one-dimensional q-problem");
    spectrum_cmd->add_option("--alpha", spec.alpha, "Effective inertia of the dilatational mode");
    spectrum_cmd->add_option("--hbar", spec.hbar, "Planck constant");
    spectrum_cmd->add_option("--potential", spec.potential, "none or shape:c0,c1,... (e.g. harmonic:1,0)");
    spectrum_cmd->add_option("--qmin", spec.qmin);
    spectrum_cmd->add_option("--qmax", spec.qmax);
    spectrum_cmd->add_option("--points", spec.points, "Grid points including both walls");
    spectrum_cmd->add_option("--levels", spec.levels);
    spectrum_cmd->add_option("--out", spectrum_out, "Directory for spectrum.json and rho.csv");

    int mc_n = 2, mc_points = 100;
    std::uint64_t mc_seed = 1;
    auto* measure_cmd = app.add_subcommand("measure-check", "Fit the two-polar density against the Jacobian oracle");
    measure_cmd->add_option("--n", mc_n)->check(CLI::Range(2, 3));
    measure_cmd->add_option("--points", mc_points)->check(CLI::PositiveNumber);
    measure_cmd->add_option("--seed", mc_seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*run_cmd) return cmd_run(scenario_path, run_out);
        if (*check_cmd) return cmd_check(suite);
        if (*spectrum_cmd) return cmd_spectrum(spec, spectrum_out);
        if (*measure_cmd) return cmd_measure_check(mc_n, mc_points, mc_seed);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == ErrorCode::ParseError || e.code() == ErrorCode::ValidationError ||
                       e.code() == ErrorCode::InvalidArgument
                   ? kUsageError
                   : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kUsageError;
}
