#include "affinekit/matcore.hpp"

#include "affinekit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace affinekit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::SingularInput: return "SingularInput";
        case ErrorCode::NegativeOrientation: return "NegativeOrientation";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::DegenerateMetric: return "DegenerateMetric";
        case ErrorCode::MissingParams: return "MissingParams";
        case ErrorCode::NonDifferentiable: return "NonDifferentiable";
        case ErrorCode::IterationDiverged: return "IterationDiverged";
        case ErrorCode::StateInvalid: return "StateInvalid";
        case ErrorCode::InvalidInertia: return "InvalidInertia";
        case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
        case ErrorCode::DomainOverflow: return "DomainOverflow";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

void require_dim(int n) {
    if (n < 1 || n > kMaxDim) {
        throw Error(ErrorCode::InvalidArgument, "dimension " + std::to_string(n) + " outside 1..4");
    }
}

double checked_det(const Mat& m) {
    if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidArgument, "matrix is not square");
    require_dim(static_cast<int>(m.rows()));
    if (!all_finite(m)) throw Error(ErrorCode::SingularInput, "non-finite matrix entries");
    const double d = m.determinant();
    if (!(std::abs(d) > kSingularDet)) {
        throw Error(ErrorCode::SingularInput, "|det| = " + std::to_string(std::abs(d)) + " <= 1e-12");
    }
    return d;
}

double checked_positive_det(const Mat& m) {
    const double d = checked_det(m);
    if (d < 0.0) throw Error(ErrorCode::NegativeOrientation, "det < 0, configuration outside GL+(n)");
    return d;
}

Mat checked_inverse(const Mat& m) {
    checked_det(m);
    return m.inverse();
}

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

Mat mat_power(const Mat& m, int k) {
    Mat result = Mat::Identity(m.rows(), m.cols());
    Mat base = m;
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return result;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

bool is_orthogonal(const Mat& m, double tol) {
    const Mat id = Mat::Identity(m.rows(), m.cols());
    return (m.transpose() * m - id).cwiseAbs().maxCoeff() <= tol;
}

namespace {

struct Svd {
    Mat W;
    Vec S;
    Mat V;
};

// phi = W diag(S) V^T with det W = det V = +1; needs det phi > 0.
Svd rotation_svd(const Mat& phi) {
    Eigen::JacobiSVD<Mat> svd(phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    if (out.W.determinant() < 0.0) {
        // det phi > 0 forces det V < 0 as well; flipping the same column in
        // both factors leaves W S V^T unchanged.
        const auto last = out.W.cols() - 1;
        out.W.col(last) *= -1.0;
        out.V.col(last) *= -1.0;
    }
    return out;
}

}  // namespace

PolarFactors polar_decompose(const Mat& phi) {
    checked_positive_det(phi);
    const Svd s = rotation_svd(phi);
    PolarFactors f;
    f.U = s.W * s.V.transpose();
    f.A = symmetrized(s.V * s.S.asDiagonal() * s.V.transpose());
    f.B = symmetrized(s.W * s.S.asDiagonal() * s.W.transpose());
    return f;
}

Mat TwoPolarFactors::reconstruct() const { return L * D.asDiagonal() * R.transpose(); }

TwoPolarFactors two_polar_decompose(const Mat& phi) {
    checked_positive_det(phi);
    const Svd s = rotation_svd(phi);
    TwoPolarFactors f;
    f.L = s.W;
    f.D = s.S;
    f.R = s.V;
    f.q = s.S.array().log().matrix();
    for (Eigen::Index a = 0; a + 1 < f.D.size(); ++a) {
        if (f.D(a) - f.D(a + 1) < kDegenerateGap) f.degenerate_spectrum = true;
    }
    return f;
}

TwoPolarFactors two_polar_from(const Mat& L, const Vec& q, const Mat& R) {
    TwoPolarFactors f;
    f.L = L;
    f.R = R;
    f.q = q;
    f.D = q.array().exp().matrix();
    for (Eigen::Index a = 0; a + 1 < f.D.size(); ++a) {
        if (std::abs(f.D(a) - f.D(a + 1)) < kDegenerateGap) f.degenerate_spectrum = true;
    }
    return f;
}

SymmetricEigen symmetric_eigen(const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(symmetrized(s));
    const auto n = s.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Vec& ev = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return ev(a) > ev(b); });
    SymmetricEigen out{Vec(n), Mat(n, n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values(k) = ev(order[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

double rel_diff(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace affinekit
