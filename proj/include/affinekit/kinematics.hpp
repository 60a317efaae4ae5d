#pragma once

// Configurations of N affinely-rigid bodies and the objects built from them:
// deformation tensors, mutual two-body tensors, scalar invariants, affine
// velocities and the left (spatial) / right (material) group actions.

#include "affinekit/matcore.hpp"

#include <vector>

namespace affinekit {

/// A body's placement: material point a sits at x + phi a.
struct BodyConfig {
    Vec x;
    Mat phi;
};

struct SystemConfig {
    int n = 0;
    std::vector<BodyConfig> bodies;

    [[nodiscard]] int count() const { return static_cast<int>(bodies.size()); }
};

/// Throws when dimensions disagree, N == 0 or some det phi_K <= 0.
void validate(const SystemConfig& c);

struct VelocityState {
    std::vector<Vec> v;
    std::vector<Mat> xi;  ///< d phi / dt
};

VelocityState zero_velocities(const SystemConfig& c);

struct DeformationTensors {
    Mat G;       ///< phi^T phi (Green)
    Mat C;       ///< phi^-T phi^-1 (Cauchy)
    Mat Gtilde;  ///< phi^-1 phi^-T
    Mat Ctilde;  ///< phi phi^T
    Mat E;       ///< (G - I)/2
    Mat e;       ///< (I - C)/2
};

DeformationTensors deformation_tensors(const Mat& phi);

/// Two-body tensors. SigmaM is the mutual Sigma[psi, phi] = phi psi^-1, named
/// apart from the canonical affine spin.
struct MutualTensors {
    Mat Gm;           ///< psi^T phi
    Mat Cm;           ///< phi^-T psi^-1
    Mat Gamma;        ///< psi^-1 phi
    Mat SigmaM;       ///< phi psi^-1
    Mat gamma_small;  ///< Gamma - I
    Mat sigma_small;  ///< SigmaM - I
    Mat E;            ///< (Gm - I)/2
    Mat e;            ///< (I - Cm)/2
};

MutualTensors mutual_tensors(const Mat& psi, const Mat& phi);

/// K_a = Tr((psi^T phi)^a), a = 1..n. Orthogonally invariant.
Vec invariants_K(const Mat& psi, const Mat& phi);

/// M_a = Tr((psi^-1 phi)^a), a = 1..n. Invariant under GL(n) on both sides.
Vec invariants_M(const Mat& psi, const Mat& phi);

struct EigInvariants {
    Vec lambdas;  ///< eigenvalues of G, descending
    Vec I;        ///< elementary symmetric polynomials I_1..I_n of lambdas
};

EigInvariants eig_invariants(const Mat& phi);

/// Elementary symmetric polynomials e_1..e_n of the entries of v.
Vec elementary_symmetric(const Vec& v);

struct AffineVelocity {
    Mat Omega;      ///< xi phi^-1
    Mat OmegaHat;   ///< phi^-1 xi
    Vec vHat;       ///< phi^-1 v
};

AffineVelocity affine_velocity(const Mat& phi, const Mat& xi, const Vec& v);

/// (x_K, phi_K) -> (A x_K, A phi_K).
SystemConfig act_spatial(const Mat& A, const SystemConfig& c);
/// phi_K -> phi_K A.
SystemConfig act_material(const Mat& A, const SystemConfig& c);

/// Velocity counterparts of the two actions.
VelocityState act_spatial(const Mat& A, const VelocityState& vel);
VelocityState act_material(const Mat& A, const VelocityState& vel);

}  // namespace affinekit
