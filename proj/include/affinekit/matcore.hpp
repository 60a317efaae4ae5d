#pragma once

// Dense small-matrix kernels shared by every other module: matrix/vector
// aliases, invertibility guards, polar and two-polar decompositions and a
// symmetric eigensolver with a deterministic ordering.

#include <Eigen/Dense>

namespace affinekit {

inline constexpr int kMaxDim = 4;

/// n x n real matrix, 1 <= n <= 4. Fixed upper bound keeps storage inline.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
/// Real n-vector, 1 <= n <= 4.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

/// |det| at or below this value is treated as singular.
inline constexpr double kSingularDet = 1e-12;
/// Singular values closer than this are reported as a degenerate spectrum.
inline constexpr double kDegenerateGap = 1e-10;

/// Throws InvalidArgument unless 1 <= n <= 4.
void require_dim(int n);

/// Throws SingularInput when |det m| <= 1e-12.
double checked_det(const Mat& m);

/// Throws SingularInput when singular, NegativeOrientation when det m < 0.
double checked_positive_det(const Mat& m);

/// Inverse after the SingularInput check.
Mat checked_inverse(const Mat& m);

/// (m + m^T) / 2.
Mat symmetrized(const Mat& m);

/// m^k for k >= 0 by repeated squaring.
Mat mat_power(const Mat& m, int k);

[[nodiscard]] bool all_finite(const Mat& m);
[[nodiscard]] bool is_orthogonal(const Mat& m, double tol = 1e-12);

struct PolarFactors {
    Mat U;  ///< rotation, det U = +1
    Mat A;  ///< right stretch: phi = U A
    Mat B;  ///< left stretch: phi = B U
};

/// phi = U A = B U for det phi > 0.
PolarFactors polar_decompose(const Mat& phi);

/// phi = L diag(D) R^T with L, R in SO(n), D descending and positive.
struct TwoPolarFactors {
    Mat L;
    Vec D;
    Mat R;
    Vec q;  ///< q_a = ln D_a
    bool degenerate_spectrum = false;

    [[nodiscard]] Mat reconstruct() const;
};

TwoPolarFactors two_polar_decompose(const Mat& phi);

/// Rebuilds the factors from (L, q, R); used by the measure charts.
TwoPolarFactors two_polar_from(const Mat& L, const Vec& q, const Mat& R);

struct SymmetricEigen {
    Vec values;    ///< descending
    Mat vectors;   ///< columns match values
};

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending. Ties
/// keep the order in which the underlying solver produced the vectors.
SymmetricEigen symmetric_eigen(const Mat& s);

/// Frobenius-norm relative difference ||a - b|| / max(1, ||b||).
double rel_diff(const Mat& a, const Mat& b);

}  // namespace affinekit
