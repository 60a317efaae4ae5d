#pragma once

// Canonical Hamilton equations for N affine bodies, time integration,
// numeric Poisson brackets and conserved-charge bookkeeping.
//
// Flat phase vector. z = (q, P) with, per body K in order,
//   q block: x_K (n entries), then phi_K row-major (entry (i, A) at i*n + A)
//   P block: p_K (n entries), then pi_K^T row-major (entry (i, A) is pi^A_i)
// so that q_j and P_j are canonically conjugate for every j.

#include "affinekit/kinetics.hpp"
#include "affinekit/potentials.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace affinekit {

struct PhaseState {
    SystemConfig config;
    MomentumState mom;
    double time = 0.0;
};

struct Hamiltonian {
    KineticModel model;
    InertiaTable inertia{InertiaParams{}};
    PotentialSpec potential;

    [[nodiscard]] double energy(const PhaseState& s) const;
};

struct PhaseDerivative {
    std::vector<Vec> dx;
    std::vector<Mat> dphi;
    std::vector<Vec> dp;
    std::vector<Mat> dpi;
};

/// x' = dH/dp, phi' = (dH/dpi)^T, p' = -dH/dx, pi' = -(dH/dphi)^T.
PhaseDerivative hamilton_rhs(const Hamiltonian& h, const PhaseState& s);

Eigen::VectorXd pack(const PhaseState& s);
/// Inverse of pack; n and N come from the template state, time is kept.
PhaseState unpack(const Eigen::VectorXd& z, const PhaseState& like);
Eigen::VectorXd pack(const PhaseDerivative& d);

/// Conserved and monitored quantities at one instant.
struct ChargeRecord {
    double energy = 0.0;
    Vec p;           ///< total linear momentum
    Mat Sigma;       ///< total phi pi
    Mat SigmaHat;    ///< total pi phi
    Mat Lambda;      ///< total x p^T
    Mat J;           ///< Lambda + Sigma
    Mat S;           ///< total Sigma - Sigma^T
    Mat V;           ///< total SigmaHat - SigmaHat^T
    std::vector<Mat> S_body;
    std::vector<Mat> V_body;
    std::vector<double> det_phi;
    std::vector<Vec> q;  ///< logarithms of the singular values of phi_K, descending
};

/// Charges of s; energy is filled only when h is given.
ChargeRecord noether_charges(const PhaseState& s, const Hamiltonian* h = nullptr);

enum class Method { ImplicitMidpoint, Rk4 };
std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view key);

enum class RunStatus { Completed, StateInvalid };

struct IntegratorOptions {
    Method method = Method::ImplicitMidpoint;
    double dt = 1e-3;
    double T = 0.0;
    int record_every = 1;  ///< keep every k-th step; the final state is always kept
    double det_floor = 1e-12;
    double tolerance = 1e-12;  ///< fixed-point residual, relative to max(1, |z|_inf)
    int max_iterations = 50;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<ChargeRecord> charges;
    RunStatus status = RunStatus::Completed;
    std::size_t steps = 0;
    int max_iterations_used = 0;
};

/// Throws IterationDiverged if the midpoint solve does not converge. A state
/// leaving GL+(n) (det phi_K <= det_floor) ends the run with
/// status StateInvalid and the samples recorded so far.
Trajectory integrate(const Hamiltonian& h, const PhaseState& s0, const IntegratorOptions& opt);

/// One step of either method; exposed for convergence tests.
PhaseState step(const Hamiltonian& h, const PhaseState& s, double dt, Method m,
                const IntegratorOptions& opt = {}, int* iterations = nullptr);

/// Largest drift of each charge over a trajectory: max-norm of c(t) - c(0)
/// divided by the max-norm of c(0), or absolute when c(0) = 0.
struct ChargeDrift {
    double energy = 0.0;
    double p = 0.0;
    double Sigma = 0.0;
    double SigmaHat = 0.0;
    double J = 0.0;
    double S = 0.0;
    double V = 0.0;
};

ChargeDrift charge_drift(const Trajectory& t);

/// Max-norm drift of a matrix series, by the rule above.
double relative_drift(const Mat& initial, const Mat& current);

/// A phase-space function with an optional analytic gradient dF/dz in the
/// flat layout.
struct PhaseFunction {
    std::function<double(const PhaseState&)> value;
    std::function<Eigen::VectorXd(const PhaseState&)> gradient;
};

/// dF/dz by central differences, step 1e-5 * max(1, |z_j|).
Eigen::VectorXd numeric_gradient(const std::function<double(const PhaseState&)>& f, const PhaseState& s);

/// {F, G} = sum_j dF/dq_j dG/dP_j - dF/dP_j dG/dq_j.
double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G, const PhaseState& s);

/// Component (a, b) of the total Sigma or SigmaHat, with analytic gradient.
PhaseFunction sigma_component(int a, int b);
PhaseFunction sigma_hat_component(int a, int b);

}  // namespace affinekit
