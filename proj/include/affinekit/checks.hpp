#pragma once

// Randomized property suites: legendre, invariance, brackets, measures, qdesk.
// Each property reports the largest error seen against its tolerance.

#include "affinekit/kinetics.hpp"
#include "affinekit/random.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace affinekit {

struct PropertyResult {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    long samples = 0;
    bool pass = false;
    /// false for properties that must fail, e.g. right invariance of the
    /// affine-group Haar density: pass means max_error > tolerance.
    bool expect_within = true;
};

struct SuiteReport {
    std::string suite;
    std::vector<PropertyResult> properties;
    double seconds = 0.0;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] std::string to_json() const;
};

std::vector<std::string_view> suite_names();

/// Throws InvalidArgument for an unknown suite name.
SuiteReport run_suite(std::string_view name, std::uint64_t seed = 20240601);

/// Random inertia usable by every kinetic model at dimension n.
InertiaParams random_inertia(CounterRng& rng, int n);

/// Magnitude used as the denominator of relative kinetic-energy errors: the
/// sum of absolute values of the individual quadratic terms, which equals T
/// for positive-definite models and stays meaningful for indefinite ones.
double kinetic_energy_scale(const KineticModel& model, const InertiaParams& p, const Mat& phi, const Vec& v,
                            const Mat& xi);

}  // namespace affinekit
