#pragma once

// Quantum mechanics of the n = 1 affine body, where GL+(1) = R+ and q = ln phi.
// The dilatation generator is Sigma = (hbar/i) d/dq; the Haar measure is dq
// and Lebesgue measure d phi = e^q dq. The Hamiltonian
// -(hbar^2 / 2 alpha) d^2/dq^2 + V(q) is discretized by central second
// differences on a uniform grid whose two end points carry Dirichlet
// (box) conditions.

#include "affinekit/potentials.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace affinekit {

struct QGrid {
    double q_min = -10.0;
    double q_max = 10.0;
    int m = 4000;
    double hbar = 1.0;
    double alpha_eff = 1.0;

    [[nodiscard]] double h() const { return (q_max - q_min) / (m - 1); }
    [[nodiscard]] double q(int j) const { return j == m - 1 ? q_max : q_min + j * h(); }
};

/// Throws InvalidArgument unless q_min < q_max, m >= 16 and hbar > 0;
/// InvalidInertia unless alpha_eff > 0.
void validate(const QGrid& g);

/// alpha_eff = I + A + B, the n = 1 reduction of the (I, A, B) family.
double alpha_effective(double I, double A, double B);

/// Symmetric tridiagonal operator on the m - 2 interior points.
struct TridiagonalOperator {
    Eigen::VectorXd diag;
    Eigen::VectorXd off;
};

TridiagonalOperator build_hamiltonian_1d(const QGrid& g, const std::function<double(double)>& V);

/// Dense copy of the operator, for tests.
Eigen::MatrixXd to_dense(const TridiagonalOperator& op);

struct Spectrum {
    Eigen::VectorXd energies;  ///< ascending
    Eigen::MatrixXd vectors;   ///< m x k on the full grid (zero end points), sum |psi|^2 h = 1
};

/// Lowest k eigenpairs. Throws ConvergenceFailure on solver failure.
Spectrum solve_spectrum(const QGrid& g, const TridiagonalOperator& op, int k);

enum class QMeasure { Haar, Lebesgue };
std::string_view to_string(QMeasure m);

/// Density of the measure with respect to dq: 1 or e^q.
double measure_weight(QMeasure m, double q);

struct WaveFunction {
    QGrid grid;
    Eigen::VectorXcd values;
    QMeasure measure = QMeasure::Haar;

    /// Scales to unit norm under the tagged measure (trapezoid rule).
    void normalize();
    [[nodiscard]] double norm_squared() const;
};

WaveFunction from_eigenvector(const QGrid& g, const Spectrum& s, int level, QMeasure m = QMeasure::Haar);

/// rho_j = |psi_j|^2 w(q_j); its trapezoid integral is the squared norm.
Eigen::VectorXd invariant_distribution(const WaveFunction& psi);

/// Mean and variance of q under a density sampled on the grid.
struct Moments {
    double mass = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

Moments moments(const QGrid& g, const Eigen::VectorXd& rho);

enum class QOperator { Sigma, SigmaCorrected, MomentumP };
std::string_view to_string(QOperator op);

/// max over pairs of smooth compactly supported test functions of
/// |<f, Op g> - <Op f, g>|. Sigma and SigmaCorrected (Sigma + hbar/(2i)) use
/// the tagged measure; MomentumP = (hbar/i) d/dx acts on a translational
/// coordinate, whose Haar and Lebesgue measures both equal dx.
double hermiticity_check(const QGrid& g, QOperator op, QMeasure m);

/// Gaussian test packet exp(-(q - center)^2 / (2 width^2)) exp(i k q).
struct GaussianPacket {
    double center = 0.0;
    double width = 1.0;
    double k = 0.0;

    [[nodiscard]] std::complex<double> operator()(double q) const;
};

WaveFunction sample(const QGrid& g, const GaussianPacket& p, QMeasure m = QMeasure::Haar);

/// Values of psi(q_j + z) by cubic interpolation of the grid samples; NaN
/// where q_j + z is outside [q_min, q_max].
Eigen::VectorXcd shift_interpolate(const WaveFunction& psi, double z);

/// exp((i/hbar) z Sigma) psi = psi(q + z) by interpolation, compared with
/// the packet evaluated at e^z phi, i.e. q + z. Max abs error over points
/// that stay inside the grid. Throws DomainOverflow when |z| >= q_max - q_min.
double shift_action_check(double z, const GaussianPacket& p, const QGrid& g);

/// The same identity through the truncated power series
/// sum_k z^k / k! d^k psi / dq^k, evaluated pointwise. Max abs error.
double shift_series_check(double z, const GaussianPacket& p, const QGrid& g, int terms = 60);

/// Parses "none", or "<shape>:<c0>,<c1>,..." with a shape key of the
/// potentials module ("harmonic:1,0" is k q^2 / 2).
std::function<double(double)> parse_q_potential(const std::string& text);

}  // namespace affinekit
