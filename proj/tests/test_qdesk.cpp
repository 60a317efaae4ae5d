#include "affinekit/errors.hpp"
#include "affinekit/qdesk.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace affinekit;
using oracle::code_of;

namespace {

const QGrid kGrid{-10.0, 10.0, 4000, 1.0, 1.0};

double harmonic(double q) { return 0.5 * q * q; }

}  // namespace

TEST_CASE("grid and validation") {
    CHECK(kGrid.q(0) == -10.0);
    CHECK(kGrid.q(kGrid.m - 1) == 10.0);
    CHECK(code_of([] { validate(QGrid{1.0, 1.0, 100, 1.0, 1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(QGrid{0.0, 1.0, 8, 1.0, 1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(QGrid{0.0, 1.0, 100, 0.0, 1.0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { validate(QGrid{0.0, 1.0, 100, 1.0, -1.0}); }) == ErrorCode::InvalidInertia);
    CHECK(alpha_effective(2.0, 0.5, 0.25) == 2.75);
}

TEST_CASE("discrete operator") {
    const QGrid g{0.0, 1.0, 21, 1.0, 2.0};
    const TridiagonalOperator op = build_hamiltonian_1d(g, [](double q) { return q; });
    const Eigen::MatrixXd h = to_dense(op);
    CHECK(h.rows() == 19);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // Second differences of a quadratic are exact: -(1/2 alpha) f'' + V f with f = q(1 - q).
    Eigen::VectorXd f(19), expect(19);
    for (int j = 0; j < 19; ++j) {
        const double q = g.q(j + 1);
        f(j) = q * (1.0 - q);
        expect(j) = -(1.0 / 4.0) * (-2.0) + q * f(j);
    }
    CHECK((h * f - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("harmonic spectrum") {
    const Spectrum s = solve_spectrum(kGrid, build_hamiltonian_1d(kGrid, harmonic), 5);
    for (int m = 0; m < 5; ++m) CHECK(std::abs(s.energies(m) - (m + 0.5)) / (m + 0.5) <= 1e-4);
    const Eigen::MatrixXd gram = s.vectors.transpose() * s.vectors * kGrid.h();
    CHECK((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(s.vectors(0, 0) == 0.0);
    CHECK(s.vectors(kGrid.m - 1, 0) == 0.0);

    SUBCASE("scaling with alpha and hbar") {
        // levels hbar sqrt(k / alpha) (m + 1/2).
        const QGrid g{-10.0, 10.0, 4000, 0.5, 2.0};
        const Spectrum t = solve_spectrum(g, build_hamiltonian_1d(g, [](double q) { return 2.0 * q * q; }), 3);
        for (int m = 0; m < 3; ++m) CHECK(t.energies(m) == doctest::Approx(0.5 * std::sqrt(2.0) * (m + 0.5)).epsilon(1e-4));
    }
    SUBCASE("ground-state error is second order in the spacing") {
        auto err = [](int m) {
            const QGrid g{-8.0, 8.0, m, 1.0, 1.0};
            return std::abs(solve_spectrum(g, build_hamiltonian_1d(g, harmonic), 1).energies(0) - 0.5);
        };
        // m - 1 intervals, so 201 -> 401 halves h.
        CHECK(err(201) / err(401) == doctest::Approx(4.0).epsilon(0.02));
    }
    SUBCASE("box levels") {
        const QGrid g{0.0, 2.0, 2000, 1.0, 1.0};
        const Spectrum b = solve_spectrum(g, build_hamiltonian_1d(g, nullptr), 3);
        for (int m = 0; m < 3; ++m) {
            const double e = std::pow(std::numbers::pi * (m + 1), 2) / 8.0;
            CHECK(std::abs(b.energies(m) - e) / e <= 1e-3);
        }
    }
    CHECK(code_of([&] { solve_spectrum(kGrid, build_hamiltonian_1d(kGrid, harmonic), 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("distributions") {
    const Spectrum s = solve_spectrum(kGrid, build_hamiltonian_1d(kGrid, harmonic), 2);
    const WaveFunction ground = from_eigenvector(kGrid, s, 0);
    CHECK(ground.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
    const Moments mo = moments(kGrid, invariant_distribution(ground));
    CHECK(mo.mass == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(mo.mean) <= 1e-10);
    CHECK(mo.variance == doctest::Approx(0.5).epsilon(1e-3));
    const Moments m1 = moments(kGrid, invariant_distribution(from_eigenvector(kGrid, s, 1)));
    CHECK(m1.variance == doctest::Approx(1.5).epsilon(1e-3));

    SUBCASE("Lebesgue-normalized state carries the weight e^q") {
        const WaveFunction leb = from_eigenvector(kGrid, s, 0, QMeasure::Lebesgue);
        CHECK(leb.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
        const Eigen::VectorXd rho = invariant_distribution(leb);
        const int j = kGrid.m / 2 + 50;
        CHECK(rho(j) == doctest::Approx(std::norm(leb.values(j)) * std::exp(kGrid.q(j))).epsilon(1e-14));
        CHECK(moments(kGrid, rho).mass == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("hermiticity under the two measures") {
    CHECK(hermiticity_check(kGrid, QOperator::Sigma, QMeasure::Haar) <= 1e-10);
    CHECK(hermiticity_check(kGrid, QOperator::Sigma, QMeasure::Lebesgue) > 1e-3);
    CHECK(hermiticity_check(kGrid, QOperator::SigmaCorrected, QMeasure::Lebesgue) <= 1e-10);
    CHECK(hermiticity_check(kGrid, QOperator::MomentumP, QMeasure::Lebesgue) <= 1e-10);
    CHECK(hermiticity_check(kGrid, QOperator::MomentumP, QMeasure::Haar) <= 1e-10);
}

TEST_CASE("dilatation shifts") {
    const GaussianPacket p{0.2, 0.9, 0.7};
    CHECK(std::abs(p(0.2) - std::complex<double>(std::cos(0.14), std::sin(0.14))) <= 1e-15);
    CHECK(shift_action_check(0.0, p, kGrid) <= 1e-12);
    CHECK(shift_action_check(0.35, p, kGrid) <= 1e-6);
    CHECK(shift_action_check(-1.2, p, kGrid) <= 1e-6);
    CHECK(shift_series_check(0.35, p, kGrid) <= 1e-6);
    CHECK(shift_series_check(0.0, p, kGrid) == 0.0);
    CHECK(code_of([&] { shift_action_check(20.0, p, kGrid); }) == ErrorCode::DomainOverflow);
    CHECK(code_of([&] { shift_series_check(-25.0, p, kGrid); }) == ErrorCode::DomainOverflow);

    const WaveFunction psi = sample(kGrid, p);
    const Eigen::VectorXcd out = shift_interpolate(psi, 1.0);
    CHECK(std::isnan(out(kGrid.m - 1).real()));
    CHECK_FALSE(std::isnan(out(0).real()));
}

TEST_CASE("potential strings") {
    CHECK(parse_q_potential("none")(3.0) == 0.0);
    CHECK(parse_q_potential("harmonic:2,1")(3.0) == doctest::Approx(4.0));
    CHECK(parse_q_potential("harmonic:2")(3.0) == doctest::Approx(9.0));
    CHECK(parse_q_potential("poly:1,0,3")(2.0) == doctest::Approx(13.0));
    CHECK(code_of([] { parse_q_potential("spring:1"); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { parse_q_potential("harmonic:a,b"); }) == ErrorCode::InvalidArgument);
}
