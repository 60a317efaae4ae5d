#include "affinekit/kinematics.hpp"

#include "affinekit/errors.hpp"

#include <string>

namespace affinekit {

void validate(const SystemConfig& c) {
    require_dim(c.n);
    if (c.bodies.empty()) throw Error(ErrorCode::InvalidArgument, "system has no bodies");
    for (std::size_t k = 0; k < c.bodies.size(); ++k) {
        const auto& b = c.bodies[k];
        if (b.x.size() != c.n || b.phi.rows() != c.n || b.phi.cols() != c.n) {
            throw Error(ErrorCode::InvalidArgument, "body " + std::to_string(k + 1) + " has wrong dimension");
        }
        if (!b.x.allFinite()) throw Error(ErrorCode::InvalidArgument, "body " + std::to_string(k + 1) + " position not finite");
        checked_positive_det(b.phi);
    }
}

VelocityState zero_velocities(const SystemConfig& c) {
    VelocityState vel;
    vel.v.assign(c.bodies.size(), Vec::Zero(c.n));
    vel.xi.assign(c.bodies.size(), Mat::Zero(c.n, c.n));
    return vel;
}

DeformationTensors deformation_tensors(const Mat& phi) {
    checked_positive_det(phi);
    const Mat inv = phi.inverse();
    const auto n = phi.rows();
    const Mat id = Mat::Identity(n, n);
    DeformationTensors t;
    t.G = symmetrized(phi.transpose() * phi);
    t.C = symmetrized(inv.transpose() * inv);
    t.Gtilde = symmetrized(inv * inv.transpose());
    t.Ctilde = symmetrized(phi * phi.transpose());
    t.E = 0.5 * (t.G - id);
    t.e = 0.5 * (id - t.C);
    return t;
}

MutualTensors mutual_tensors(const Mat& psi, const Mat& phi) {
    const Mat psi_inv = checked_inverse(psi);
    const Mat phi_inv = checked_inverse(phi);
    const Mat id = Mat::Identity(phi.rows(), phi.cols());
    MutualTensors t;
    t.Gm = psi.transpose() * phi;
    t.Cm = phi_inv.transpose() * psi_inv;
    t.Gamma = psi_inv * phi;
    t.SigmaM = phi * psi_inv;
    t.gamma_small = t.Gamma - id;
    t.sigma_small = t.SigmaM - id;
    t.E = 0.5 * (t.Gm - id);
    t.e = 0.5 * (id - t.Cm);
    return t;
}

namespace {

Vec power_traces(const Mat& m) {
    const auto n = m.rows();
    Vec out(n);
    Mat p = m;
    for (Eigen::Index a = 0; a < n; ++a) {
        out(a) = p.trace();
        if (a + 1 < n) p = p * m;
    }
    return out;
}

}  // namespace

Vec invariants_K(const Mat& psi, const Mat& phi) {
    checked_det(psi);
    checked_det(phi);
    return power_traces(psi.transpose() * phi);
}

Vec invariants_M(const Mat& psi, const Mat& phi) {
    return power_traces(checked_inverse(psi) * phi);
}

Vec elementary_symmetric(const Vec& v) {
    const auto n = v.size();
    // e[k] accumulated over prefixes of v; e_0 = 1.
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n + 1);
    e(0) = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k >= 1; --k) e(k) += v(i) * e(k - 1);
    }
    return e.tail(n);
}

EigInvariants eig_invariants(const Mat& phi) {
    checked_positive_det(phi);
    const SymmetricEigen se = symmetric_eigen(phi.transpose() * phi);
    return {se.values, elementary_symmetric(se.values)};
}

AffineVelocity affine_velocity(const Mat& phi, const Mat& xi, const Vec& v) {
    checked_positive_det(phi);
    const Mat inv = phi.inverse();
    return {xi * inv, inv * xi, inv * v};
}

SystemConfig act_spatial(const Mat& A, const SystemConfig& c) {
    checked_det(A);
    SystemConfig out = c;
    for (auto& b : out.bodies) {
        b.x = A * b.x;
        b.phi = A * b.phi;
    }
    return out;
}

SystemConfig act_material(const Mat& A, const SystemConfig& c) {
    checked_det(A);
    SystemConfig out = c;
    for (auto& b : out.bodies) b.phi = b.phi * A;
    return out;
}

VelocityState act_spatial(const Mat& A, const VelocityState& vel) {
    checked_det(A);
    VelocityState out = vel;
    for (auto& v : out.v) v = A * v;
    for (auto& xi : out.xi) xi = A * xi;
    return out;
}

VelocityState act_material(const Mat& A, const VelocityState& vel) {
    checked_det(A);
    VelocityState out = vel;
    for (auto& xi : out.xi) xi = xi * A;
    return out;
}

}  // namespace affinekit
