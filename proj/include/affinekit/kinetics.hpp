#pragma once

// Kinetic-energy models for affine bodies, their Legendre transforms and
// kinetic Hamiltonians.
//
// Conventions. The internal momentum pi is paired with xi = d phi/dt through
// Tr(pi xi), so pi = (dT/dxi)^T. The non-holonomic momenta are
// Sigma = phi pi (conjugate to Omega = xi phi^-1) and SigmaHat = pi phi
// (conjugate to OmegaHat = phi^-1 xi); both pairings equal Tr(pi xi).
//
// Bi-index tensors (the l-af and r-af models) are stored as n^2 x n^2
// matrices over row-major flattened matrices: entry ((i,j),(k,l)) sits at
// (i*n + j, k*n + l), and T = 1/2 w^T Lten w with w the flattened OmegaHat
// (l-af) or Omega (r-af).

#include "affinekit/kinematics.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace affinekit {

enum class TranslationalModel { DAlembert, IsAf, AfIs };
enum class InternalModel { DAlembert, AfJ, AfIs, HAf, LAf, RAf, AfAf, IsAf };

/// Scenario keys: "dalembert", "is-af", "af-is".
std::string_view to_string(TranslationalModel m);
/// Scenario keys: "dalembert", "af-J", "af-is", "H-af", "l-af", "r-af", "af-af", "is-af".
std::string_view to_string(InternalModel m);
std::optional<TranslationalModel> parse_translational(std::string_view key);
std::optional<InternalModel> parse_internal(std::string_view key);

inline constexpr TranslationalModel kAllTranslational[] = {
    TranslationalModel::DAlembert, TranslationalModel::IsAf, TranslationalModel::AfIs};
inline constexpr InternalModel kAllInternal[] = {
    InternalModel::DAlembert, InternalModel::AfJ, InternalModel::AfIs, InternalModel::HAf,
    InternalModel::LAf,       InternalModel::RAf, InternalModel::AfAf, InternalModel::IsAf};

/// Free product of the translational and internal menus.
struct KineticModel {
    TranslationalModel translational = TranslationalModel::DAlembert;
    InternalModel internal = InternalModel::DAlembert;

    bool operator==(const KineticModel&) const = default;
};

/// Inertial constants of one body. Which fields are consulted depends on the
/// model: M for every translational model; J for dalembert/af-J; (I, A, B)
/// for af-is/is-af; (A, B) for af-af (I is ignored there); H for H-af;
/// Lten/Rten for l-af/r-af.
struct InertiaParams {
    double M = 1.0;
    std::optional<Mat> J;
    double I = 0.0;
    double A = 0.0;
    double B = 0.0;
    std::optional<Mat> H;
    std::optional<Eigen::MatrixXd> Lten;
    std::optional<Eigen::MatrixXd> Rten;

    bool operator==(const InertiaParams&) const = default;
};

/// Per-body inertia. Bodies are identical unless built with heterogeneous().
class InertiaTable {
public:
    InertiaTable(InertiaParams shared) : params_{std::move(shared)} {}  // NOLINT(google-explicit-constructor)

    static InertiaTable heterogeneous(std::vector<InertiaParams> per_body);

    [[nodiscard]] const InertiaParams& operator[](std::size_t body) const {
        return heterogeneous_ ? params_.at(body) : params_.front();
    }
    [[nodiscard]] bool is_heterogeneous() const { return heterogeneous_; }
    [[nodiscard]] const std::vector<InertiaParams>& entries() const { return params_; }

    bool operator==(const InertiaTable&) const = default;

private:
    InertiaTable() = default;
    std::vector<InertiaParams> params_;
    bool heterogeneous_ = false;
};

struct MomentumState {
    std::vector<Vec> p;
    std::vector<Mat> pi;
};

MomentumState zero_momenta(const SystemConfig& c);

/// Co-moving and non-holonomic momenta of one body.
struct SpinParts {
    Vec pHat;       ///< phi^T p
    Mat Sigma;      ///< phi pi
    Mat SigmaHat;   ///< pi phi
    Mat S;          ///< Sigma - Sigma^T
    Mat V;          ///< SigmaHat - SigmaHat^T
};

SpinParts spin_parts(const Mat& phi, const Vec& p, const Mat& pi);

/// Reciprocals 1/I~, 1/A~, 1/B~ of the kinetic-Hamiltonian constants of the
/// is-af / af-is / af-af family.
struct TildeConstants {
    double recip_I = 0.0;
    double recip_A = 0.0;
    double recip_B = 0.0;
};

/// Throws DegenerateMetric when I^2 == A^2 or (I + A)(I + A + nB) == 0.
TildeConstants tilde_constants(double I, double A, double B, int n);

struct PositivityReport {
    bool positive_definite = false;
    Eigen::VectorXd spectrum;  ///< ascending eigenvalues of the n^2 x n^2 form
};

/// Quadratic form Q of T_int^{is-af} on L(n): T = 1/2 w^T Q w, w = vec(Omega).
Eigen::MatrixXd isaf_quadratic_form(double I, double A, double B, int n);

PositivityReport positivity_check(double I, double A, double B, int n);

/// Row-major flattening helpers matching the bi-index layout.
Eigen::VectorXd flatten(const Mat& m);
Mat unflatten(const Eigen::VectorXd& w, int n);

/// Checks that params carry what the model needs. Throws MissingParams,
/// InvalidInertia or DegenerateMetric.
void validate_params(const KineticModel& model, const InertiaParams& params, int n);

// Single-body kernels.
double body_kinetic_energy(const KineticModel& model, const InertiaParams& params, const Mat& phi,
                           const Vec& v, const Mat& xi);
double body_kinetic_hamiltonian(const KineticModel& model, const InertiaParams& params, const Mat& phi,
                                const Vec& p, const Mat& pi);

// System-level operations (sums over bodies in index order).
double kinetic_energy(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                      const VelocityState& vel);
MomentumState legendre(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                       const VelocityState& vel);
VelocityState inverse_legendre(const KineticModel& model, const InertiaTable& params,
                               const SystemConfig& c, const MomentumState& mom);
double kinetic_hamiltonian(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                           const MomentumState& mom);

/// Partial derivatives of the kinetic Hamiltonian, as matrices shaped like
/// the variable they differentiate against. Positions do not enter.
struct KineticGradient {
    std::vector<Mat> dphi;
    std::vector<Vec> dp;
    std::vector<Mat> dpi;
};

KineticGradient kinetic_hamiltonian_gradient(const KineticModel& model, const InertiaTable& params,
                                             const SystemConfig& c, const MomentumState& mom);

}  // namespace affinekit
