#pragma once

// Scenario files and run orchestration.
//
// A scenario is a JSON document with "schema_version": 1. The keys and their
// defaults are listed in README.md; parse_scenario rejects unknown keys and
// names the offending key in the error message.

#include "affinekit/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace affinekit {

inline constexpr int kSchemaVersion = 1;

/// One body of an explicit initial state. Momenta (p, pi) and velocities
/// (v, xi) are alternatives; whichever is absent defaults to zero.
struct InitialBody {
    Vec x;
    Mat phi;
    std::optional<Vec> p;
    std::optional<Mat> pi;
    std::optional<Vec> v;
    std::optional<Mat> xi;

    bool operator==(const InitialBody& o) const;
};

/// Random initial state drawn from the scenario seed.
struct GenerateSpec {
    double position_spread = 1.0;  ///< x entries uniform in [-s, s]
    double phi_spread = 0.2;       ///< phi = Id + entries uniform in [-s, s]
    double velocity_scale = 0.2;   ///< v, xi entries uniform in [-s, s]

    bool operator==(const GenerateSpec&) const = default;
};

struct InitialSpec {
    std::vector<InitialBody> bodies;
    std::optional<GenerateSpec> generate;

    bool operator==(const InitialSpec&) const = default;
};

struct SpectrumSpec {
    double alpha = 1.0;
    double hbar = 1.0;
    std::string potential = "harmonic:1,0";
    double qmin = -10.0;
    double qmax = 10.0;
    int points = 4000;
    int levels = 5;

    bool operator==(const SpectrumSpec&) const = default;
};

enum class ScenarioMode { Dynamics, Spectrum };

struct Scenario {
    int schema_version = kSchemaVersion;
    std::string name;
    ScenarioMode mode = ScenarioMode::Dynamics;
    int n = 1;
    int N = 1;
    std::uint64_t seed = 0;
    KineticModel kinetic;
    InertiaTable inertia{InertiaParams{}};
    PotentialSpec potential;
    InitialSpec initial;
    IntegratorOptions integrator;
    std::string output_dir = "out";
    SpectrumSpec spectrum;

    bool operator==(const Scenario& o) const;
};

/// Throws ParseError (with line and column) or ValidationError (naming the key).
Scenario parse_scenario(const std::filesystem::path& path);
Scenario parse_scenario_text(const std::string& text, const std::string& source = "<string>");

/// Complete JSON form, every field written out; parse(serialize(s)) == s.
std::string serialize(const Scenario& s);

/// Initial phase state (explicit bodies, or generated from the seed).
PhaseState initial_state(const Scenario& s);

Hamiltonian hamiltonian_of(const Scenario& s);

struct RunResult {
    int exit_code = 0;
    std::filesystem::path dir;
    std::string hash;        ///< FNV-1a 64 over the data files, hex
    double wall_seconds = 0.0;
    std::optional<Trajectory> trajectory;
    ChargeDrift drift;
};

/// Runs the scenario and writes its artifacts into out_dir (created if
/// needed). Dynamics: trajectory.csv, charges.csv, summary.json. Spectrum:
/// spectrum.json, rho.csv. Wall time is returned, not written, so artifacts
/// are reproducible byte for byte.
RunResult run(const Scenario& s, const std::filesystem::path& out_dir);

struct SpectrumResult {
    Eigen::VectorXd levels;
    double sigma_haar = 0.0;
    double sigma_lebesgue = 0.0;
    double sigma_corrected_lebesgue = 0.0;
    double momentum_p = 0.0;
    double shift = 0.0;
    double shift_series = 0.0;
    std::string json;  ///< spectrum.json contents
    std::string csv;   ///< rho.csv contents
};

SpectrumResult compute_spectrum(const SpectrumSpec& spec);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Full-precision scientific formatting used in every CSV.
std::string format_number(double v);

}  // namespace affinekit
