#include "affinekit/errors.hpp"
#include "affinekit/measures.hpp"
#include "oracles.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <numbers>

using namespace affinekit;
using oracle::code_of;
using oracle::max_abs;

namespace {

// Independent chart Jacobian for n = 2: phi = L rot(a) diag(e^q) (R rot(b))^T,
// differentiated numerically in (a, q1, q2, b) at a = b = 0.
double lebesgue_oracle_2d(const Mat& L, const Vec& q, const Mat& R) {
    auto chart = [&](const Eigen::Vector4d& u) {
        Mat d = Mat::Zero(2, 2);
        d(0, 0) = std::exp(u(1));
        d(1, 1) = std::exp(u(2));
        const Mat out = L * oracle::rotation2(u(0)) * d * (R * oracle::rotation2(u(3))).transpose();
        return Eigen::Vector4d(out(0, 0), out(0, 1), out(1, 0), out(1, 1));
    };
    const Eigen::Vector4d u0(0.0, q(0), q(1), 0.0);
    Eigen::Matrix4d jac;
    const double h = 1e-6;
    for (int k = 0; k < 4; ++k) {
        Eigen::Vector4d up = u0, um = u0;
        up(k) += h;
        um(k) -= h;
        jac.col(k) = (chart(up) - chart(um)) / (2.0 * h);
    }
    return std::abs(jac.determinant());
}

double mat_det(const Mat& m) { return m.determinant(); }

}  // namespace

TEST_CASE("Haar densities") {
    for (int n = 1; n <= 3; ++n) {
        for (auto k : {MeasureKind::LebesgueA, MeasureKind::HaarAlpha, MeasureKind::LebesgueL, MeasureKind::HaarLambda})
            CHECK(haar_density(Mat::Identity(n, n), k) == doctest::Approx(1.0));
    }
    Mat phi = Mat::Identity(2, 2);
    phi(0, 0) = 2.0;
    CHECK(haar_density(phi, MeasureKind::HaarLambda) == doctest::Approx(0.25));
    CHECK(haar_density(phi, MeasureKind::HaarAlpha) == doctest::Approx(0.125));
    CHECK(haar_density(phi, MeasureKind::LebesgueL) == 1.0);
    CHECK(parse_measure_kind("haar_lambda") == MeasureKind::HaarLambda);
    CHECK(parse_measure_kind(to_string(MeasureKind::LebesgueA)) == MeasureKind::LebesgueA);
    CHECK_FALSE(parse_measure_kind("haar").has_value());
}

TEST_CASE("Haar invariance through the Jacobian of the group action") {
    // phi -> A phi and phi -> phi A scale Lebesgue measure on GL(n) by det(A)^n;
    // (x, phi) -> (A x + b, A phi) scales Lebesgue on R^n x GL(n) by det(A)^(n+1),
    // while the right action (x, phi) -> (x + phi b, phi A) only by det(A)^n.
    CounterRng rng(61);
    double alpha_right = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + trial % 2;
        const Mat phi = random_gl_plus(rng, n);
        const Mat a = random_gl_plus(rng, n);
        const double d = mat_det(a);
        auto lam = [&](const Mat& m) { return haar_density(m, MeasureKind::HaarLambda); };
        auto alp = [&](const Mat& m) { return haar_density(m, MeasureKind::HaarAlpha); };
        CHECK(lam(a * phi) * std::pow(d, n) == doctest::Approx(lam(phi)).epsilon(1e-12));
        CHECK(lam(phi * a) * std::pow(d, n) == doctest::Approx(lam(phi)).epsilon(1e-12));
        CHECK(alp(a * phi) * std::pow(d, n + 1) == doctest::Approx(alp(phi)).epsilon(1e-12));
        alpha_right = std::max(alpha_right, std::abs(alp(phi * a) * std::pow(d, n) / alp(phi) - 1.0));
    }
    CHECK(alpha_right > 1e-3);
}

TEST_CASE("two-polar densities") {
    CHECK(twopolar_constant(1) == 1.0);
    CHECK(twopolar_constant(2) == 2.0);
    CHECK(twopolar_constant(3) == 8.0);

    Vec q(2);
    q << 0.3, 0.3;
    CHECK(sinh_product(q, 1) == 0.0);
    q << 0.7, -0.2;
    CHECK(sinh_product(q, 1) == doctest::Approx(std::sinh(0.9)));
    CHECK(sinh_product(q, 2) == doctest::Approx(std::sinh(0.9) * std::sinh(0.9)));

    SUBCASE("n = 1 chart is phi = e^q") {
        Vec q1(1);
        q1 << 0.4;
        const TwoPolarFactors f = two_polar_from(Mat::Identity(1, 1), q1, Mat::Identity(1, 1));
        CHECK(jacobian_oracle(f) == doctest::Approx(std::exp(0.4)).epsilon(1e-8));
        CHECK(twopolar_densities(f).haar == doctest::Approx(1.0));
    }
    SUBCASE("analytic Lebesgue density against an independent chart Jacobian") {
        CounterRng rng(62);
        for (int trial = 0; trial < 50; ++trial) {
            const TwoPolarFactors f = random_twopolar(rng, 2);
            const double oracle_value = lebesgue_oracle_2d(f.L, f.q, f.R);
            const TwoPolarDensities d = twopolar_densities(f);
            CHECK(d.lebesgue == doctest::Approx(oracle_value).epsilon(1e-7));
            CHECK(jacobian_oracle(f) == doctest::Approx(oracle_value).epsilon(1e-7));
            // Haar = Lebesgue det^-n.
            CHECK(d.haar == doctest::Approx(d.lebesgue * std::exp(-2.0 * f.q.sum())).epsilon(1e-12));
        }
    }
    SUBCASE("n = 3 against the library chart Jacobian") {
        CounterRng rng(63);
        for (int trial = 0; trial < 20; ++trial) {
            const TwoPolarFactors f = random_twopolar(rng, 3);
            CHECK(twopolar_densities(f).lebesgue == doctest::Approx(jacobian_oracle(f)).epsilon(1e-6));
        }
    }
    SUBCASE("densities do not depend on L and R") {
        CounterRng rng(64);
        const TwoPolarFactors f = random_twopolar(rng, 3);
        const Mat r0 = sample_orthogonal(rng, 3);
        const TwoPolarFactors g = two_polar_from(r0 * f.L, f.q, r0 * f.R);
        CHECK(twopolar_densities(g).haar == doctest::Approx(twopolar_densities(f).haar).epsilon(1e-14));
        CHECK(jacobian_oracle(g) == doctest::Approx(jacobian_oracle(f)).epsilon(1e-6));
    }
    SUBCASE("coincident q") {
        Vec qq(2);
        qq << 0.1, 0.1 + 1e-9;
        const TwoPolarFactors f = two_polar_from(Mat::Identity(2, 2), qq, Mat::Identity(2, 2));
        CHECK(code_of([&] { jacobian_oracle(f); }) == ErrorCode::DegenerateSpectrum);
    }
}

TEST_CASE("so(n) chart") {
    Eigen::VectorXd t(3);
    t << 0.2, -0.4, 0.7;
    Mat a = Mat::Zero(3, 3);
    for (int k = 0; k < 3; ++k) a += t(k) * so_basis(3, k);
    CHECK(max_abs(a + a.transpose()) == 0.0);
    const Eigen::Matrix3d expected = Eigen::Matrix3d(a).exp();
    CHECK(max_abs(so_exp(t, 3) - Mat(expected)) <= 1e-13);
    CHECK(so_basis(3, 1)(0, 2) == 1.0);
    CHECK(so_basis(3, 1)(2, 0) == -1.0);
}

TEST_CASE("fit recovers exponent and constant") {
    for (int n = 2; n <= 3; ++n) {
        const MeasureFit fit = fit_twopolar(n, 60, 65 + n);
        CHECK(fit.exponent_e == kSinhExponent);
        CHECK(fit.constant_c == doctest::Approx(twopolar_constant(n)).epsilon(1e-6));
        CHECK(fit.max_rel_err <= 1e-6);
        CHECK(fit.spread_e1 <= 1e-6);
        CHECK(fit.spread_e2 > 0.1);
        CHECK(fit.points == 60);
    }
}

TEST_CASE("Haar sampling of SO(n)") {
    CounterRng rng(66);
    for (int n = 1; n <= 3; ++n) {
        for (int k = 0; k < 100; ++k) {
            const Mat r = sample_orthogonal(rng, n);
            CHECK(max_abs(r.transpose() * r - Mat::Identity(n, n)) <= 1e-14);
            CHECK(r.determinant() == doctest::Approx(1.0));
        }
    }
    CHECK(max_abs(sample_orthogonal(3, 9) - sample_orthogonal(3, 9)) == 0.0);

    const std::size_t count = 20000;
    SUBCASE("SO(2) angle is uniform") {
        std::vector<double> u;
        for (std::size_t k = 0; k < count; ++k) u.push_back(so2_angle(sample_orthogonal(rng, 2)) / (2.0 * std::numbers::pi));
        CHECK(ks_uniform(u) <= ks_critical_1pct(count));
    }
    SUBCASE("SO(3) rotation angle has density (1 - cos t) / pi") {
        // Its CDF (t - sin t) / pi maps Haar samples to Uniform(0, 1).
        std::vector<double> u;
        for (std::size_t k = 0; k < count; ++k) {
            const Mat r = sample_orthogonal(rng, 3);
            const double t = std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
            u.push_back((t - std::sin(t)) / std::numbers::pi);
        }
        CHECK(ks_uniform(u) <= ks_critical_1pct(count));
    }
    SUBCASE("left translation preserves the distribution") {
        const Mat r0 = sample_orthogonal(rng, 3);
        std::vector<double> a, b;
        for (std::size_t k = 0; k < 5000; ++k) {
            a.push_back(sample_orthogonal(rng, 3)(0, 0));
            b.push_back((r0 * sample_orthogonal(rng, 3))(0, 0));
        }
        CHECK(ks_two_sample(a, b) <= ks_critical_1pct(a.size(), b.size()));
    }
    SUBCASE("the KS test detects a non-uniform sample") {
        std::vector<double> u;
        for (std::size_t k = 0; k < 2000; ++k) u.push_back(std::pow(rng.uniform(), 1.3));
        CHECK(ks_uniform(u) > ks_critical_1pct(u.size()));
    }
}
