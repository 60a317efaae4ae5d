#include "affinekit/kinetics.hpp"

#include "affinekit/errors.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace affinekit {

namespace {

constexpr std::array<std::pair<TranslationalModel, std::string_view>, 3> kTranslationalKeys{{
    {TranslationalModel::DAlembert, "dalembert"},
    {TranslationalModel::IsAf, "is-af"},
    {TranslationalModel::AfIs, "af-is"},
}};

constexpr std::array<std::pair<InternalModel, std::string_view>, 8> kInternalKeys{{
    {InternalModel::DAlembert, "dalembert"},
    {InternalModel::AfJ, "af-J"},
    {InternalModel::AfIs, "af-is"},
    {InternalModel::HAf, "H-af"},
    {InternalModel::LAf, "l-af"},
    {InternalModel::RAf, "r-af"},
    {InternalModel::AfAf, "af-af"},
    {InternalModel::IsAf, "is-af"},
}};

bool uses_sigma(InternalModel m) {
    return m == InternalModel::HAf || m == InternalModel::RAf || m == InternalModel::AfAf ||
           m == InternalModel::IsAf;
}

bool uses_sigma_hat(InternalModel m) {
    return m == InternalModel::AfJ || m == InternalModel::AfIs || m == InternalModel::LAf;
}

// (I, A, B) actually used by the is-af family; af-af drops I.
double family_I(InternalModel m, const InertiaParams& p) { return m == InternalModel::AfAf ? 0.0 : p.I; }

void require_spd(const std::optional<Mat>& m, int n, const char* name) {
    if (!m) throw Error(ErrorCode::MissingParams, std::string(name) + " is required by the selected model");
    if (m->rows() != n || m->cols() != n) throw Error(ErrorCode::InvalidInertia, std::string(name) + " has wrong size");
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m->cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::InvalidInertia, std::string(name) + " is not symmetric");
    }
    Eigen::LLT<Mat> llt(*m);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::InvalidInertia, std::string(name) + " is not positive definite");
}

void require_bimatrix(const std::optional<Eigen::MatrixXd>& m, int n, const char* name) {
    if (!m) throw Error(ErrorCode::MissingParams, std::string(name) + " is required by the selected model");
    const int nn = n * n;
    if (m->rows() != nn || m->cols() != nn) {
        throw Error(ErrorCode::InvalidInertia, std::string(name) + " must be n^2 x n^2");
    }
    if ((*m - m->transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m->cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::InvalidInertia, std::string(name) + " is not symmetric under bi-index exchange");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(*m);
    if (!lu.isInvertible()) throw Error(ErrorCode::DegenerateMetric, std::string(name) + " is singular");
}

// --- is-af family: Sigma = I Omega^T + A Omega + B tr(Omega) Id ------------

Mat family_forward(const Mat& omega, double I, double A, double B) {
    const auto n = omega.rows();
    return I * omega.transpose() + A * omega + B * omega.trace() * Mat::Identity(n, n);
}

Mat family_inverse(const Mat& sigma, double I, double A, double B) {
    const auto n = sigma.rows();
    const double trace_omega = sigma.trace() / (I + A + static_cast<double>(n) * B);
    const Mat reduced = sigma - B * trace_omega * Mat::Identity(n, n);
    return (I * reduced.transpose() - A * reduced) / (I * I - A * A);
}

double family_energy(const Mat& omega, double I, double A, double B) {
    const double tr = omega.trace();
    return 0.5 * I * (omega.transpose() * omega).trace() + 0.5 * A * (omega * omega).trace() + 0.5 * B * tr * tr;
}

double family_hamiltonian(const Mat& sigma, const TildeConstants& t) {
    const double tr = sigma.trace();
    return 0.5 * t.recip_I * (sigma.transpose() * sigma).trace() + 0.5 * t.recip_A * (sigma * sigma).trace() +
           0.5 * t.recip_B * tr * tr;
}

// --- bi-index models --------------------------------------------------------

Mat bimatrix_forward(const Mat& omega, const Eigen::MatrixXd& ten) {
    const int n = static_cast<int>(omega.rows());
    return unflatten(ten * flatten(omega), n).transpose();
}

Mat bimatrix_inverse(const Mat& sigma, const Eigen::MatrixXd& ten) {
    const int n = static_cast<int>(sigma.rows());
    return unflatten(ten.fullPivLu().solve(flatten(sigma.transpose())), n);
}

// Non-holonomic velocity (Omega for Sigma-models, OmegaHat for
// SigmaHat-models) -> conjugate non-holonomic momentum.
Mat nonholonomic_forward(InternalModel m, const InertiaParams& p, const Mat& w) {
    switch (m) {
        case InternalModel::AfJ: return *p.J * w.transpose();
        case InternalModel::HAf: return *p.H * w.transpose();
        case InternalModel::LAf: return bimatrix_forward(w, *p.Lten);
        case InternalModel::RAf: return bimatrix_forward(w, *p.Rten);
        case InternalModel::AfIs:
        case InternalModel::AfAf:
        case InternalModel::IsAf: return family_forward(w, family_I(m, p), p.A, p.B);
        case InternalModel::DAlembert: break;
    }
    throw Error(ErrorCode::InvalidArgument, "model has no non-holonomic Legendre map");
}

Mat nonholonomic_inverse(InternalModel m, const InertiaParams& p, const Mat& s) {
    switch (m) {
        case InternalModel::AfJ: return s.transpose() * p.J->inverse();
        case InternalModel::HAf: return s.transpose() * p.H->inverse();
        case InternalModel::LAf: return bimatrix_inverse(s, *p.Lten);
        case InternalModel::RAf: return bimatrix_inverse(s, *p.Rten);
        case InternalModel::AfIs:
        case InternalModel::AfAf:
        case InternalModel::IsAf: return family_inverse(s, family_I(m, p), p.A, p.B);
        case InternalModel::DAlembert: break;
    }
    throw Error(ErrorCode::InvalidArgument, "model has no non-holonomic Legendre map");
}

double internal_energy(InternalModel m, const InertiaParams& p, const Mat& phi, const Mat& xi) {
    if (m == InternalModel::DAlembert) return 0.5 * (xi * *p.J * xi.transpose()).trace();
    const Mat inv = phi.inverse();
    const Mat omega = xi * inv;
    const Mat omega_hat = inv * xi;
    switch (m) {
        case InternalModel::AfJ: return 0.5 * (omega_hat * *p.J * omega_hat.transpose()).trace();
        case InternalModel::HAf: return 0.5 * (omega * *p.H * omega.transpose()).trace();
        case InternalModel::LAf: {
            const Eigen::VectorXd w = flatten(omega_hat);
            return 0.5 * w.dot(*p.Lten * w);
        }
        case InternalModel::RAf: {
            const Eigen::VectorXd w = flatten(omega);
            return 0.5 * w.dot(*p.Rten * w);
        }
        case InternalModel::AfIs: return family_energy(omega_hat, p.I, p.A, p.B);
        case InternalModel::AfAf: return family_energy(omega, 0.0, p.A, p.B);
        case InternalModel::IsAf: return family_energy(omega, p.I, p.A, p.B);
        case InternalModel::DAlembert: break;
    }
    return 0.0;
}

// Closed-form kinetic Hamiltonians, each written directly in momenta.
double internal_hamiltonian(InternalModel m, const InertiaParams& p, const Mat& phi, const Mat& pi, int n) {
    switch (m) {
        case InternalModel::DAlembert: return 0.5 * (pi.transpose() * p.J->inverse() * pi).trace();
        case InternalModel::AfJ: {
            const Mat sh = pi * phi;
            return 0.5 * (sh.transpose() * p.J->inverse() * sh).trace();
        }
        case InternalModel::HAf: {
            const Mat s = phi * pi;
            return 0.5 * (s.transpose() * p.H->inverse() * s).trace();
        }
        case InternalModel::LAf: {
            const Eigen::VectorXd s = flatten((pi * phi).transpose());
            return 0.5 * s.dot(p.Lten->fullPivLu().solve(s));
        }
        case InternalModel::RAf: {
            const Eigen::VectorXd s = flatten((phi * pi).transpose());
            return 0.5 * s.dot(p.Rten->fullPivLu().solve(s));
        }
        case InternalModel::AfIs: return family_hamiltonian(pi * phi, tilde_constants(p.I, p.A, p.B, n));
        case InternalModel::AfAf: return family_hamiltonian(phi * pi, tilde_constants(0.0, p.A, p.B, n));
        case InternalModel::IsAf: return family_hamiltonian(phi * pi, tilde_constants(p.I, p.A, p.B, n));
    }
    return 0.0;
}

void check_body(const KineticModel& model, const InertiaParams& params, const Mat& phi) {
    const int n = static_cast<int>(phi.rows());
    validate_params(model, params, n);
    checked_positive_det(phi);
}

void require_sizes(const SystemConfig& c, std::size_t a, std::size_t b, const char* what) {
    if (a != c.bodies.size() || b != c.bodies.size()) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " does not match body count");
    }
}

}  // namespace

std::string_view to_string(TranslationalModel m) {
    for (const auto& [k, v] : kTranslationalKeys)
        if (k == m) return v;
    return "?";
}

std::string_view to_string(InternalModel m) {
    for (const auto& [k, v] : kInternalKeys)
        if (k == m) return v;
    return "?";
}

std::optional<TranslationalModel> parse_translational(std::string_view key) {
    for (const auto& [k, v] : kTranslationalKeys)
        if (v == key) return k;
    return std::nullopt;
}

std::optional<InternalModel> parse_internal(std::string_view key) {
    for (const auto& [k, v] : kInternalKeys)
        if (v == key) return k;
    return std::nullopt;
}

InertiaTable InertiaTable::heterogeneous(std::vector<InertiaParams> per_body) {
    if (per_body.empty()) throw Error(ErrorCode::MissingParams, "heterogeneous inertia table is empty");
    InertiaTable t;
    t.params_ = std::move(per_body);
    t.heterogeneous_ = true;
    return t;
}

MomentumState zero_momenta(const SystemConfig& c) {
    MomentumState m;
    m.p.assign(c.bodies.size(), Vec::Zero(c.n));
    m.pi.assign(c.bodies.size(), Mat::Zero(c.n, c.n));
    return m;
}

SpinParts spin_parts(const Mat& phi, const Vec& p, const Mat& pi) {
    SpinParts s;
    s.pHat = phi.transpose() * p;
    s.Sigma = phi * pi;
    s.SigmaHat = pi * phi;
    s.S = s.Sigma - s.Sigma.transpose();
    s.V = s.SigmaHat - s.SigmaHat.transpose();
    return s;
}

TildeConstants tilde_constants(double I, double A, double B, int n) {
    const double d1 = I * I - A * A;
    const double d2 = (I + A) * (I + A + static_cast<double>(n) * B);
    if (d1 == 0.0 || d2 == 0.0 || !std::isfinite(d1) || !std::isfinite(d2)) {
        throw Error(ErrorCode::DegenerateMetric, "Legendre map of the (I, A, B) family is not invertible");
    }
    // A zero numerator inertia gives a zero reciprocal (I = 0 is the af-af case).
    return {I / d1, -A / d1, -B / d2};
}

Eigen::MatrixXd isaf_quadratic_form(double I, double A, double B, int n) {
    require_dim(n);
    const int nn = n * n;
    Eigen::MatrixXd q = I * Eigen::MatrixXd::Identity(nn, nn);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nn);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) q(i * n + j, j * n + i) += A;
        u(i * n + i) = 1.0;
    }
    q += B * u * u.transpose();
    return q;
}

PositivityReport positivity_check(double I, double A, double B, int n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(isaf_quadratic_form(I, A, B, n), Eigen::EigenvaluesOnly);
    PositivityReport r;
    r.spectrum = es.eigenvalues();
    const double scale = std::max({std::abs(I), std::abs(A), std::abs(B), 1e-300});
    r.positive_definite = r.spectrum.minCoeff() > 1e-12 * scale;
    return r;
}

Eigen::VectorXd flatten(const Mat& m) {
    const auto n = m.rows();
    Eigen::VectorXd w(n * m.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) w(i * m.cols() + j) = m(i, j);
    return w;
}

Mat unflatten(const Eigen::VectorXd& w, int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = w(i * n + j);
    return m;
}

void validate_params(const KineticModel& model, const InertiaParams& params, int n) {
    require_dim(n);
    if (!(params.M > 0.0) || !std::isfinite(params.M)) throw Error(ErrorCode::InvalidInertia, "mass M must be positive");
    switch (model.internal) {
        case InternalModel::DAlembert:
        case InternalModel::AfJ: require_spd(params.J, n, "J"); break;
        case InternalModel::HAf: require_spd(params.H, n, "H"); break;
        case InternalModel::LAf: require_bimatrix(params.Lten, n, "Lten"); break;
        case InternalModel::RAf: require_bimatrix(params.Rten, n, "Rten"); break;
        case InternalModel::AfIs:
        case InternalModel::IsAf: tilde_constants(params.I, params.A, params.B, n); break;
        case InternalModel::AfAf: tilde_constants(0.0, params.A, params.B, n); break;
    }
}

double body_kinetic_energy(const KineticModel& model, const InertiaParams& params, const Mat& phi, const Vec& v,
                           const Mat& xi) {
    check_body(model, params, phi);
    double t_tr = 0.0;
    if (model.translational == TranslationalModel::AfIs) {
        const Vec v_hat = phi.inverse() * v;
        t_tr = 0.5 * params.M * v_hat.squaredNorm();
    } else {
        t_tr = 0.5 * params.M * v.squaredNorm();
    }
    return t_tr + internal_energy(model.internal, params, phi, xi);
}

double body_kinetic_hamiltonian(const KineticModel& model, const InertiaParams& params, const Mat& phi, const Vec& p,
                                const Mat& pi) {
    check_body(model, params, phi);
    const int n = static_cast<int>(phi.rows());
    double h_tr = 0.0;
    if (model.translational == TranslationalModel::AfIs) {
        const Vec p_hat = phi.transpose() * p;
        h_tr = p_hat.squaredNorm() / (2.0 * params.M);
    } else {
        h_tr = p.squaredNorm() / (2.0 * params.M);
    }
    return h_tr + internal_hamiltonian(model.internal, params, phi, pi, n);
}

double kinetic_energy(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                      const VelocityState& vel) {
    require_sizes(c, vel.v.size(), vel.xi.size(), "velocity state");
    double total = 0.0;
    for (std::size_t k = 0; k < c.bodies.size(); ++k) {
        total += body_kinetic_energy(model, params[k], c.bodies[k].phi, vel.v[k], vel.xi[k]);
    }
    return total;
}

MomentumState legendre(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                       const VelocityState& vel) {
    require_sizes(c, vel.v.size(), vel.xi.size(), "velocity state");
    MomentumState mom;
    mom.p.reserve(c.bodies.size());
    mom.pi.reserve(c.bodies.size());
    for (std::size_t k = 0; k < c.bodies.size(); ++k) {
        const InertiaParams& ip = params[k];
        const Mat& phi = c.bodies[k].phi;
        check_body(model, ip, phi);
        const Mat inv = phi.inverse();
        if (model.translational == TranslationalModel::AfIs) {
            // p = M C v, i.e. pHat = M vHat.
            mom.p.push_back(ip.M * inv.transpose() * (inv * vel.v[k]));
        } else {
            mom.p.push_back(ip.M * vel.v[k]);
        }
        const Mat& xi = vel.xi[k];
        const InternalModel im = model.internal;
        if (im == InternalModel::DAlembert) {
            mom.pi.push_back(*ip.J * xi.transpose());
        } else if (uses_sigma(im)) {
            const Mat sigma = nonholonomic_forward(im, ip, xi * inv);
            mom.pi.push_back(inv * sigma);
        } else {
            const Mat sigma_hat = nonholonomic_forward(im, ip, inv * xi);
            mom.pi.push_back(sigma_hat * inv);
        }
    }
    return mom;
}

VelocityState inverse_legendre(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                               const MomentumState& mom) {
    require_sizes(c, mom.p.size(), mom.pi.size(), "momentum state");
    VelocityState vel;
    vel.v.reserve(c.bodies.size());
    vel.xi.reserve(c.bodies.size());
    for (std::size_t k = 0; k < c.bodies.size(); ++k) {
        const InertiaParams& ip = params[k];
        const Mat& phi = c.bodies[k].phi;
        check_body(model, ip, phi);
        if (model.translational == TranslationalModel::AfIs) {
            vel.v.push_back(phi * (phi.transpose() * mom.p[k]) / ip.M);
        } else {
            vel.v.push_back(mom.p[k] / ip.M);
        }
        const Mat& pi = mom.pi[k];
        const InternalModel im = model.internal;
        if (im == InternalModel::DAlembert) {
            vel.xi.push_back(pi.transpose() * ip.J->inverse());
        } else if (uses_sigma(im)) {
            vel.xi.push_back(nonholonomic_inverse(im, ip, phi * pi) * phi);
        } else {
            vel.xi.push_back(phi * nonholonomic_inverse(im, ip, pi * phi));
        }
    }
    return vel;
}

double kinetic_hamiltonian(const KineticModel& model, const InertiaTable& params, const SystemConfig& c,
                           const MomentumState& mom) {
    require_sizes(c, mom.p.size(), mom.pi.size(), "momentum state");
    double total = 0.0;
    for (std::size_t k = 0; k < c.bodies.size(); ++k) {
        total += body_kinetic_hamiltonian(model, params[k], c.bodies[k].phi, mom.p[k], mom.pi[k]);
    }
    return total;
}

KineticGradient kinetic_hamiltonian_gradient(const KineticModel& model, const InertiaTable& params,
                                             const SystemConfig& c, const MomentumState& mom) {
    require_sizes(c, mom.p.size(), mom.pi.size(), "momentum state");
    KineticGradient g;
    const std::size_t count = c.bodies.size();
    g.dphi.reserve(count);
    g.dp.reserve(count);
    g.dpi.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const InertiaParams& ip = params[k];
        const Mat& phi = c.bodies[k].phi;
        const Vec& p = mom.p[k];
        const Mat& pi = mom.pi[k];
        check_body(model, ip, phi);
        const auto n = phi.rows();
        Mat dphi = Mat::Zero(n, n);
        if (model.translational == TranslationalModel::AfIs) {
            const Vec p_hat = phi.transpose() * p;
            g.dp.push_back(phi * p_hat / ip.M);
            dphi += p * p_hat.transpose() / ip.M;
        } else {
            g.dp.push_back(p / ip.M);
        }
        const InternalModel im = model.internal;
        if (im == InternalModel::DAlembert) {
            g.dpi.push_back(ip.J->inverse() * pi);
        } else if (uses_sigma(im)) {
            // dT/dSigma = Omega^T; Sigma = phi pi.
            const Mat omega = nonholonomic_inverse(im, ip, phi * pi);
            g.dpi.push_back(phi.transpose() * omega.transpose());
            dphi += omega.transpose() * pi.transpose();
        } else if (uses_sigma_hat(im)) {
            // dT/dSigmaHat = OmegaHat^T; SigmaHat = pi phi.
            const Mat omega_hat = nonholonomic_inverse(im, ip, pi * phi);
            g.dpi.push_back(omega_hat.transpose() * phi.transpose());
            dphi += pi.transpose() * omega_hat.transpose();
        }
        g.dphi.push_back(dphi);
    }
    return g;
}

}  // namespace affinekit
