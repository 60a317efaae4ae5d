#include "affinekit/checks.hpp"
#include "affinekit/kinetics.hpp"
#include "affinekit/measures.hpp"
#include "affinekit/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace affinekit;
using oracle::code_of;
using oracle::max_abs;

namespace {

// Closed forms written out independently of the library.
double family(const Mat& w, double I, double A, double B) {
    const double tr = w.trace();
    return 0.5 * (I * (w.transpose() * w).trace() + A * (w * w).trace() + B * tr * tr);
}

InertiaParams family_params(double I, double A, double B) {
    InertiaParams p;
    p.M = 1.7;
    p.I = I;
    p.A = A;
    p.B = B;
    return p;
}

std::vector<KineticModel> all_models() {
    std::vector<KineticModel> out;
    for (auto t : kAllTranslational)
        for (auto i : kAllInternal) out.push_back({t, i});
    return out;
}

}  // namespace

TEST_CASE("zero velocities and zero momenta") {
    CounterRng rng(31);
    for (int n : {2, 3}) {
        const InertiaParams params = random_inertia(rng, n);
        const SystemConfig c{n, {{random_vector(rng, n), random_gl_plus(rng, n)}}};
        for (const auto& m : all_models()) {
            CHECK(kinetic_energy(m, params, c, zero_velocities(c)) == 0.0);
            CHECK(kinetic_hamiltonian(m, params, c, zero_momenta(c)) == 0.0);
            const MomentumState mom = legendre(m, params, c, zero_velocities(c));
            CHECK(max_abs(Mat(mom.p[0])) == 0.0);
            CHECK(max_abs(mom.pi[0]) == 0.0);
            const VelocityState vel = inverse_legendre(m, params, c, zero_momenta(c));
            CHECK(max_abs(vel.xi[0]) == 0.0);
        }
    }
}

TEST_CASE("d'Alembert examples") {
    InertiaParams p;
    p.M = 2.0;
    p.J = Mat::Identity(2, 2);
    const KineticModel m{};
    const SystemConfig c{2, {{Vec::Zero(2), Mat::Identity(2, 2)}}};
    VelocityState vel{{Vec::Zero(2)}, {Mat::Zero(2, 2)}};
    vel.v[0](0) = 1.0;
    const MomentumState mom = legendre(m, p, c, vel);
    CHECK(mom.p[0](0) == doctest::Approx(2.0));
    CHECK(mom.p[0](1) == 0.0);
    const VelocityState back = inverse_legendre(m, p, c, mom);
    CHECK(back.v[0](0) == doctest::Approx(1.0));
    CHECK(kinetic_hamiltonian(m, p, c, mom) == doctest::Approx(1.0));

    // Internal part: T = 1/2 Tr(xi J xi^T).
    CounterRng rng(32);
    Mat J = random_matrix(rng, 2);
    J = J * J.transpose() + Mat::Identity(2, 2);
    p.J = J;
    const Mat xi = random_matrix(rng, 2);
    const Vec v = random_vector(rng, 2);
    CHECK(body_kinetic_energy(m, p, random_gl_plus(rng, 2), v, xi) ==
          doctest::Approx(0.5 * p.M * v.squaredNorm() + 0.5 * (xi * J * xi.transpose()).trace()).epsilon(1e-14));
}

TEST_CASE("affine family closed forms") {
    CounterRng rng(33);
    const double I = 2.2, A = 0.6, B = 0.3;
    const InertiaParams p = family_params(I, A, B);
    for (int s = 0; s < 50; ++s) {
        const Mat phi = random_gl_plus(rng, 3);
        const Mat xi = random_matrix(rng, 3);
        const Vec v = random_vector(rng, 3);
        const Mat inv = phi.inverse();
        const Mat omega = xi * inv, omega_hat = inv * xi;
        const Vec zero = Vec::Zero(3);
        CHECK(body_kinetic_energy({TranslationalModel::DAlembert, InternalModel::IsAf}, p, phi, zero, xi) ==
              doctest::Approx(family(omega, I, A, B)).epsilon(1e-12));
        CHECK(body_kinetic_energy({TranslationalModel::DAlembert, InternalModel::AfIs}, p, phi, zero, xi) ==
              doctest::Approx(family(omega_hat, I, A, B)).epsilon(1e-12));
        CHECK(body_kinetic_energy({TranslationalModel::DAlembert, InternalModel::AfAf}, p, phi, zero, xi) ==
              doctest::Approx(family(omega, 0.0, A, B)).epsilon(1e-12));
        CHECK(body_kinetic_energy({TranslationalModel::AfIs, InternalModel::AfAf}, p, phi, v, Mat::Zero(3, 3)) ==
              doctest::Approx(0.5 * p.M * (inv * v).squaredNorm()).epsilon(1e-12));
    }
    // af-af at Omega = identity, n = 2: T = A + 2B.
    const SystemConfig c{2, {{Vec::Zero(2), Mat::Identity(2, 2)}}};
    const VelocityState vel{{Vec::Zero(2)}, {Mat::Identity(2, 2)}};
    CHECK(kinetic_energy({TranslationalModel::DAlembert, InternalModel::AfAf}, p, c, vel) ==
          doctest::Approx(A + 2.0 * B));
}

TEST_CASE("gyroscopic limit: is-af and af-is agree on rigid motion") {
    CounterRng rng(34);
    const InertiaParams p = family_params(2.0, 0.7, 0.4);
    for (int s = 0; s < 20; ++s) {
        const Mat R = sample_orthogonal(rng, 3);
        Mat w = random_matrix(rng, 3);
        w = w - w.transpose();
        const Mat xi = w * R;
        const Vec zero = Vec::Zero(3);
        CHECK(body_kinetic_energy({TranslationalModel::DAlembert, InternalModel::IsAf}, p, R, zero, xi) ==
              doctest::Approx(body_kinetic_energy({TranslationalModel::DAlembert, InternalModel::AfIs}, p, R, zero, xi))
                  .epsilon(1e-12));
    }
}

TEST_CASE("momenta are the velocity derivatives of T") {
    CounterRng rng(35);
    for (int n : {2, 3}) {
        const InertiaParams params = random_inertia(rng, n);
        for (const auto& m : all_models()) {
            const Mat phi = random_gl_plus(rng, n);
            const Vec v = random_vector(rng, n);
            const Mat xi = random_matrix(rng, n);
            const SystemConfig c{n, {{Vec::Zero(n), phi}}};
            const MomentumState mom = legendre(m, params, c, {{v}, {xi}});
            const Vec dv = oracle::fd_vector([&](const Vec& u) { return body_kinetic_energy(m, params, phi, u, xi); }, v);
            // pi^A_i = dT / d xi^i_A, so pi is the transpose of the entrywise derivative.
            const Mat dxi = oracle::fd_matrix([&](const Mat& u) { return body_kinetic_energy(m, params, phi, v, u); }, xi);
            CAPTURE(to_string(m.translational));
            CAPTURE(to_string(m.internal));
            CHECK(max_abs(Mat(mom.p[0] - dv)) <= 1e-7);
            CHECK(max_abs(mom.pi[0] - dxi.transpose()) <= 1e-7);
        }
    }
}

TEST_CASE("kinetic Hamiltonian gradient against finite differences") {
    CounterRng rng(36);
    for (int n : {2, 3}) {
        const InertiaParams params = random_inertia(rng, n);
        for (const auto& m : all_models()) {
            const Mat phi = random_gl_plus(rng, n);
            const Vec p = random_vector(rng, n);
            const Mat pi = random_matrix(rng, n);
            const SystemConfig c{n, {{Vec::Zero(n), phi}}};
            const KineticGradient g = kinetic_hamiltonian_gradient(m, params, c, {{p}, {pi}});
            const Mat dphi = oracle::fd_matrix([&](const Mat& u) { return body_kinetic_hamiltonian(m, params, u, p, pi); }, phi);
            const Vec dp = oracle::fd_vector([&](const Vec& u) { return body_kinetic_hamiltonian(m, params, phi, u, pi); }, p);
            const Mat dpi = oracle::fd_matrix([&](const Mat& u) { return body_kinetic_hamiltonian(m, params, phi, p, u); }, pi);
            CAPTURE(to_string(m.translational));
            CAPTURE(to_string(m.internal));
            CHECK(oracle::rel_err(g.dphi[0], dphi) <= 1e-6);
            CHECK(oracle::rel_err(Mat(g.dp[0]), Mat(dp)) <= 1e-6);
            CHECK(oracle::rel_err(g.dpi[0], dpi) <= 1e-6);
        }
    }
}

TEST_CASE("tilde constants") {
    const TildeConstants t = tilde_constants(2.0, 1.0, 1.0, 2);
    CHECK(1.0 / t.recip_I == doctest::Approx(1.5));
    CHECK(1.0 / t.recip_A == doctest::Approx(-3.0));
    CHECK(1.0 / t.recip_B == doctest::Approx(-15.0));
    CHECK(code_of([] { tilde_constants(1.0, 1.0, 0.0, 2); }) == ErrorCode::DegenerateMetric);
    CHECK(tilde_constants(0.0, 1.0, 1.0, 2).recip_I == 0.0);

    // The round trip at (2, 1, 1, 2) pins the constants through the Hamiltonian.
    CounterRng rng(37);
    const InertiaParams p = family_params(2.0, 1.0, 1.0);
    const KineticModel m{TranslationalModel::DAlembert, InternalModel::IsAf};
    for (int s = 0; s < 100; ++s) {
        const SystemConfig c{2, {{Vec::Zero(2), random_gl_plus(rng, 2)}}};
        const VelocityState vel{{Vec::Zero(2)}, {random_matrix(rng, 2)}};
        const MomentumState mom = legendre(m, p, c, vel);
        CHECK(kinetic_hamiltonian(m, p, c, mom) == doctest::Approx(kinetic_energy(m, p, c, vel)).epsilon(1e-12));
        const VelocityState back = inverse_legendre(m, p, c, mom);
        CHECK(max_abs(back.xi[0] - vel.xi[0]) <= 1e-12);
    }
}

TEST_CASE("positivity of the is-af form") {
    CHECK(positivity_check(1.0, 0.0, 0.0, 2).positive_definite);
    CHECK_FALSE(positivity_check(0.0, 1.0, 0.0, 2).positive_definite);

    CounterRng rng(38);
    for (int s = 0; s < 20; ++s) {
        const double I = rng.uniform(-0.5, 3.0), A = rng.uniform(-1.5, 1.5), B = rng.uniform(-1.0, 1.0);
        const int n = 2 + s % 2;
        double lowest = INFINITY;
        for (int k = 0; k < 10000; ++k) {
            Mat w = random_matrix(rng, n);
            w /= w.norm();
            lowest = std::min(lowest, family(w, I, A, B));
        }
        const PositivityReport r = positivity_check(I, A, B, n);
        CAPTURE(I);
        CAPTURE(A);
        CAPTURE(B);
        CHECK(r.positive_definite == (lowest > 0.0));
        // The smallest eigenvalue of the form bounds every sample: T >= lambda_min / 2 on unit w.
        CHECK(lowest >= 0.5 * r.spectrum(0) - 1e-12);
    }
}

TEST_CASE("parameter validation") {
    InertiaParams p;
    CHECK(code_of([&] { validate_params({}, p, 2); }) == ErrorCode::MissingParams);
    p.J = -Mat::Identity(2, 2);
    CHECK(code_of([&] { validate_params({}, p, 2); }) == ErrorCode::InvalidInertia);
    p.J = Mat::Identity(2, 2);
    p.M = 0.0;
    CHECK(code_of([&] { validate_params({}, p, 2); }) == ErrorCode::InvalidInertia);
    const InertiaParams degenerate = family_params(1.0, 1.0, 0.0);
    CHECK(code_of([&] { validate_params({TranslationalModel::DAlembert, InternalModel::IsAf}, degenerate, 2); }) ==
          ErrorCode::DegenerateMetric);
    CHECK(code_of([&] { validate_params({TranslationalModel::DAlembert, InternalModel::HAf}, family_params(1, 0, 0), 2); }) ==
          ErrorCode::MissingParams);
}

TEST_CASE("pairing identities") {
    CounterRng rng(39);
    const InertiaParams params = random_inertia(rng, 3);
    for (const auto& m : all_models()) {
        const Mat phi = random_gl_plus(rng, 3);
        const Vec v = random_vector(rng, 3);
        const Mat xi = random_matrix(rng, 3);
        const SystemConfig c{3, {{Vec::Zero(3), phi}}};
        const MomentumState mom = legendre(m, params, c, {{v}, {xi}});
        const SpinParts sp = spin_parts(phi, mom.p[0], mom.pi[0]);
        const AffineVelocity av = affine_velocity(phi, xi, v);
        CHECK(mom.p[0].dot(v) == doctest::Approx(sp.pHat.dot(av.vHat)).epsilon(1e-12));
        CHECK((sp.Sigma * av.Omega).trace() == doctest::Approx((sp.SigmaHat * av.OmegaHat).trace()).epsilon(1e-12));
        CHECK(max_abs(sp.S + sp.S.transpose()) == 0.0);
        CHECK(max_abs(sp.V + sp.V.transpose()) == 0.0);
    }
}

TEST_CASE("model keys round trip") {
    for (auto t : kAllTranslational) CHECK(parse_translational(to_string(t)) == t);
    for (auto i : kAllInternal) CHECK(parse_internal(to_string(i)) == i);
    CHECK_FALSE(parse_internal("af_af").has_value());
    CHECK(parse_internal("af-af") == InternalModel::AfAf);
    CHECK(parse_translational("dalembert") == TranslationalModel::DAlembert);
}

TEST_CASE("heterogeneous inertia") {
    InertiaParams a, b;
    a.M = 1.0;
    a.J = Mat::Identity(2, 2);
    b.M = 3.0;
    b.J = 2.0 * Mat::Identity(2, 2);
    const InertiaTable t = InertiaTable::heterogeneous({a, b});
    const SystemConfig c{2, {{Vec::Zero(2), Mat::Identity(2, 2)}, {Vec::Ones(2), Mat::Identity(2, 2)}}};
    const VelocityState vel{{Vec::Ones(2), Vec::Ones(2)}, {Mat::Zero(2, 2), Mat::Zero(2, 2)}};
    CHECK(kinetic_energy({}, t, c, vel) == doctest::Approx(0.5 * 1.0 * 2.0 + 0.5 * 3.0 * 2.0));
    CHECK(code_of([] { InertiaTable::heterogeneous({}); }) == ErrorCode::MissingParams);
}
