#include "affinekit/qdesk.hpp"

#include "affinekit/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace affinekit {

namespace {

using cd = std::complex<double>;

double trapezoid_weight(const QGrid& g, int j) { return (j == 0 || j == g.m - 1) ? 0.5 * g.h() : g.h(); }

// Smooth bump supported on |q - center| < width, times exp(i k q).
struct TestFunction {
    double center;
    double width;
    double k;

    [[nodiscard]] cd value(double q) const {
        const double u = (q - center) / width;
        if (std::abs(u) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u)) * std::exp(cd(0.0, k * q));
    }
    [[nodiscard]] cd derivative(double q) const {
        const double u = (q - center) / width;
        if (std::abs(u) >= 1.0) return 0.0;
        const double s = 1.0 - u * u;
        const double b = std::exp(-1.0 / s);
        const double db = b * (-2.0 * u / (s * s)) / width;
        return (db + cd(0.0, k) * b) * std::exp(cd(0.0, k * q));
    }
};

}  // namespace

void validate(const QGrid& g) {
    if (!(g.q_min < g.q_max)) throw Error(ErrorCode::InvalidArgument, "q_min must be below q_max");
    if (g.m < 16) throw Error(ErrorCode::InvalidArgument, "grid needs at least 16 points");
    if (!(g.hbar > 0.0)) throw Error(ErrorCode::InvalidArgument, "hbar must be positive");
    if (!(g.alpha_eff > 0.0)) throw Error(ErrorCode::InvalidInertia, "effective inertia must be positive");
}

double alpha_effective(double I, double A, double B) { return I + A + B; }

TridiagonalOperator build_hamiltonian_1d(const QGrid& g, const std::function<double(double)>& V) {
    validate(g);
    const int interior = g.m - 2;
    const double h = g.h();
    const double c = g.hbar * g.hbar / (2.0 * g.alpha_eff * h * h);
    TridiagonalOperator op;
    op.diag.resize(interior);
    op.off = Eigen::VectorXd::Constant(interior - 1, -c);
    for (int j = 0; j < interior; ++j) op.diag(j) = 2.0 * c + (V ? V(g.q(j + 1)) : 0.0);
    return op;
}

Eigen::MatrixXd to_dense(const TridiagonalOperator& op) {
    const auto n = op.diag.size();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    m.diagonal() = op.diag;
    for (Eigen::Index j = 0; j + 1 < n; ++j) m(j, j + 1) = m(j + 1, j) = op.off(j);
    return m;
}

Spectrum solve_spectrum(const QGrid& g, const TridiagonalOperator& op, int k) {
    const auto interior = static_cast<lapack_int>(op.diag.size());
    if (k < 1 || k > interior) throw Error(ErrorCode::InvalidArgument, "level count out of range");
    std::vector<double> d(op.diag.data(), op.diag.data() + interior);
    std::vector<double> e(static_cast<std::size_t>(interior), 0.0);
    std::copy(op.off.data(), op.off.data() + op.off.size(), e.begin());
    std::vector<double> w(static_cast<std::size_t>(interior));
    std::vector<double> z(static_cast<std::size_t>(interior) * static_cast<std::size_t>(k));
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(k));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', interior, d.data(), e.data(), 0.0, 0.0, 1, k,
                                           0.0, &found, w.data(), z.data(), interior, support.data());
    if (info != 0 || found != k) {
        throw Error(ErrorCode::ConvergenceFailure, "tridiagonal eigensolver failed (info " + std::to_string(info) + ")");
    }
    Spectrum s;
    s.energies = Eigen::Map<Eigen::VectorXd>(w.data(), k);
    s.vectors = Eigen::MatrixXd::Zero(g.m, k);
    const double scale = 1.0 / std::sqrt(g.h());
    for (int c = 0; c < k; ++c) {
        Eigen::Map<const Eigen::VectorXd> col(z.data() + static_cast<std::size_t>(c) * interior, interior);
        // Fix the sign so the largest-magnitude entry is positive.
        Eigen::Index arg = 0;
        col.cwiseAbs().maxCoeff(&arg);
        const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
        s.vectors.col(c).segment(1, interior) = sign * scale * col;
    }
    return s;
}

std::string_view to_string(QMeasure m) { return m == QMeasure::Haar ? "haar" : "lebesgue"; }

double measure_weight(QMeasure m, double q) { return m == QMeasure::Haar ? 1.0 : std::exp(q); }

double WaveFunction::norm_squared() const {
    double acc = 0.0;
    for (int j = 0; j < grid.m; ++j) acc += std::norm(values(j)) * measure_weight(measure, grid.q(j)) * trapezoid_weight(grid, j);
    return acc;
}

void WaveFunction::normalize() {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot normalize a zero wave function");
    values /= std::sqrt(n2);
}

WaveFunction from_eigenvector(const QGrid& g, const Spectrum& s, int level, QMeasure m) {
    if (level < 0 || level >= s.vectors.cols()) throw Error(ErrorCode::InvalidArgument, "level out of range");
    WaveFunction psi{g, s.vectors.col(level).cast<cd>(), m};
    psi.normalize();
    return psi;
}

Eigen::VectorXd invariant_distribution(const WaveFunction& psi) {
    Eigen::VectorXd rho(psi.grid.m);
    for (int j = 0; j < psi.grid.m; ++j) rho(j) = std::norm(psi.values(j)) * measure_weight(psi.measure, psi.grid.q(j));
    return rho;
}

Moments moments(const QGrid& g, const Eigen::VectorXd& rho) {
    Moments mo;
    double m1 = 0.0;
    for (int j = 0; j < g.m; ++j) {
        const double w = rho(j) * trapezoid_weight(g, j);
        mo.mass += w;
        m1 += w * g.q(j);
    }
    mo.mean = m1 / mo.mass;
    double m2 = 0.0;
    for (int j = 0; j < g.m; ++j) {
        const double d = g.q(j) - mo.mean;
        m2 += rho(j) * trapezoid_weight(g, j) * d * d;
    }
    mo.variance = m2 / mo.mass;
    return mo;
}

std::string_view to_string(QOperator op) {
    switch (op) {
        case QOperator::Sigma: return "Sigma";
        case QOperator::SigmaCorrected: return "Sigma_corrected";
        case QOperator::MomentumP: return "momentum_p";
    }
    return "?";
}

double hermiticity_check(const QGrid& g, QOperator op, QMeasure m) {
    validate(g);
    const double W = g.q_max - g.q_min;
    const double width = std::min(2.0, W / 5.0);
    const std::array<TestFunction, 3> family{{
        {g.q_min + 0.3 * W, width, 0.0},
        {g.q_min + 0.5 * W, width, 1.3},
        {g.q_min + 0.65 * W, width, -0.7},
    }};
    const cd minus_i_hbar(0.0, -g.hbar);
    const cd correction = op == QOperator::SigmaCorrected ? cd(0.0, -0.5 * g.hbar) : cd(0.0);
    const QMeasure effective = op == QOperator::MomentumP ? QMeasure::Haar : m;

    // Sampled values of each test function and of Op applied to it.
    std::vector<Eigen::VectorXcd> f(family.size()), of(family.size());
    for (std::size_t t = 0; t < family.size(); ++t) {
        f[t].resize(g.m);
        of[t].resize(g.m);
        for (int j = 0; j < g.m; ++j) {
            const double q = g.q(j);
            f[t](j) = family[t].value(q);
            of[t](j) = minus_i_hbar * family[t].derivative(q) + correction * f[t](j);
        }
    }
    auto inner = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
        cd acc = 0.0;
        for (int j = 0; j < g.m; ++j) acc += std::conj(a(j)) * b(j) * measure_weight(effective, g.q(j)) * trapezoid_weight(g, j);
        return acc;
    };
    double defect = 0.0;
    for (std::size_t a = 0; a < family.size(); ++a)
        for (std::size_t b = 0; b < family.size(); ++b)
            defect = std::max(defect, std::abs(inner(f[a], of[b]) - inner(of[a], f[b])));
    return defect;
}

cd GaussianPacket::operator()(double q) const {
    const double u = (q - center) / width;
    return std::exp(-0.5 * u * u) * std::exp(cd(0.0, k * q));
}

WaveFunction sample(const QGrid& g, const GaussianPacket& p, QMeasure m) {
    validate(g);
    WaveFunction psi{g, Eigen::VectorXcd(g.m), m};
    for (int j = 0; j < g.m; ++j) psi.values(j) = p(g.q(j));
    return psi;
}

Eigen::VectorXcd shift_interpolate(const WaveFunction& psi, double z) {
    const QGrid& g = psi.grid;
    const double h = g.h();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXcd out(g.m);
    for (int j = 0; j < g.m; ++j) {
        const double x = g.q(j) + z;
        if (x < g.q_min || x > g.q_max) {
            out(j) = cd(nan, nan);
            continue;
        }
        // Four-point Lagrange stencil, kept inside the grid.
        const double s = (x - g.q_min) / h;
        int i0 = static_cast<int>(std::floor(s)) - 1;
        i0 = std::clamp(i0, 0, g.m - 4);
        const double t = s - i0;
        const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
        const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
        const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
        const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
        out(j) = l0 * psi.values(i0) + l1 * psi.values(i0 + 1) + l2 * psi.values(i0 + 2) + l3 * psi.values(i0 + 3);
    }
    return out;
}

double shift_action_check(double z, const GaussianPacket& p, const QGrid& g) {
    validate(g);
    if (std::abs(z) >= g.q_max - g.q_min) throw Error(ErrorCode::DomainOverflow, "shift leaves the grid");
    const WaveFunction psi = sample(g, p);
    const Eigen::VectorXcd shifted = shift_interpolate(psi, z);
    double err = 0.0;
    for (int j = 0; j < g.m; ++j) {
        if (std::isnan(shifted(j).real())) continue;
        err = std::max(err, std::abs(shifted(j) - p(g.q(j) + z)));
    }
    return err;
}

double shift_series_check(double z, const GaussianPacket& p, const QGrid& g, int terms) {
    validate(g);
    if (std::abs(z) >= g.q_max - g.q_min) throw Error(ErrorCode::DomainOverflow, "shift leaves the grid");
    // psi = exp(a q^2 + b q + c):  psi^(n+1) = (2 a q + b) psi^(n) + 2 a n psi^(n-1).
    const double a = -0.5 / (p.width * p.width);
    const cd b(p.center / (p.width * p.width), p.k);
    double err = 0.0;
    for (int j = 0; j < g.m; ++j) {
        const double q = g.q(j);
        if (q + z < g.q_min || q + z > g.q_max) continue;
        cd prev = 0.0;
        cd cur = p(q);
        cd sum = cur;
        double coeff = 1.0;
        for (int n = 0; n + 1 < terms; ++n) {
            const cd next = (2.0 * a * q + b) * cur + 2.0 * a * n * prev;
            prev = cur;
            cur = next;
            coeff *= z / (n + 1);
            sum += coeff * cur;
        }
        err = std::max(err, std::abs(sum - p(q + z)));
    }
    return err;
}

std::function<double(double)> parse_q_potential(const std::string& text) {
    if (text.empty() || text == "none") return [](double) { return 0.0; };
    const auto colon = text.find(':');
    const std::string key = text.substr(0, colon);
    const auto kind = parse_shape(key);
    if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown potential shape '" + key + "'");
    Shape shape{*kind, {}};
    if (colon != std::string::npos) {
        std::stringstream ss(text.substr(colon + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                shape.coeffs.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw Error(ErrorCode::InvalidArgument, "bad coefficient '" + item + "' in potential");
            }
        }
    }
    // Harmonic accepts a bare stiffness.
    if (shape.kind == ShapeKind::Harmonic && shape.coeffs.size() == 1) shape.coeffs.push_back(0.0);
    PotentialSpec check;
    check.one_body.push_back({shape, OneBodyArg::X2, 0, {}});
    validate(check, 1);
    return [shape](double q) { return shape_value(shape, q); };
}

}  // namespace affinekit
