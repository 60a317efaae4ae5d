#pragma once

// Invariant measures on GL+(n) and R^n x GL+(n), their densities in two-polar
// coordinates phi = L diag(exp q) R^T, and Haar sampling of SO(n).
//
// Two-polar densities are taken relative to dq^1...dq^n dmu(L) dmu(R), with
// mu the Haar measure of SO(n) normalized to agree with the exponential
// chart L exp(sum_{i<j} t_ij E_ij) at t = 0, where E_ij = e_i e_j^T - e_j e_i^T.
// In that normalization
//   Haar:     2^{n(n-1)/2} prod_{i<j} |sinh(q_i - q_j)|
//   Lebesgue: prod_i Q_i prod_{i<j} |Q_i^2 - Q_j^2|,   Q = exp(q)
// The sinh exponent and the constant are what measure-check recovers from
// the numeric chart Jacobian.

#include "affinekit/matcore.hpp"
#include "affinekit/random.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace affinekit {

/// lebesgue_a / haar_alpha live on R^n x GL+(n); lebesgue_l / haar_lambda on GL+(n).
enum class MeasureKind { LebesgueA, HaarAlpha, LebesgueL, HaarLambda };

std::string_view to_string(MeasureKind k);
std::optional<MeasureKind> parse_measure_kind(std::string_view key);

/// Density relative to Lebesgue measure: det^-n (haar_lambda), det^(-n-1)
/// (haar_alpha, left-invariant only), 1 for the Lebesgue kinds.
double haar_density(const Mat& phi, MeasureKind kind);

inline constexpr int kSinhExponent = 1;

/// 2^{n(n-1)/2}.
double twopolar_constant(int n);

struct TwoPolarDensities {
    double haar = 0.0;
    double lebesgue = 0.0;
};

TwoPolarDensities twopolar_densities(const TwoPolarFactors& f);

/// prod_{i<j} |sinh(q_i - q_j)|^e.
double sinh_product(const Vec& q, int e);

/// Skew basis element E_ij, i < j, with index k enumerating pairs row by row.
Mat so_basis(int n, int k);

/// exp(sum_k t_k E_k) for t of length n(n-1)/2.
Mat so_exp(const Eigen::VectorXd& t, int n);

/// Chart (t_L, q, t_R) -> L exp(t_L) diag(exp q) (R exp(t_R))^T about the
/// given factors.
Mat twopolar_chart(const TwoPolarFactors& f, const Eigen::VectorXd& tL, const Vec& q, const Eigen::VectorXd& tR);

/// |det| of the central-difference (step 1e-6) Jacobian of the chart at
/// t_L = t_R = 0, i.e. the Lebesgue density in chart coordinates. Throws
/// DegenerateSpectrum when two q entries lie within 1e-8.
double jacobian_oracle(const TwoPolarFactors& f);

/// Haar-distributed element of SO(n), n in 1..3: uniform angle for n = 2,
/// normalized Gaussian quaternion for n = 3.
Mat sample_orthogonal(CounterRng& rng, int n);
Mat sample_orthogonal(int n, std::uint64_t seed);

/// Rotation angle in [0, 2 pi) of an SO(2) element.
double so2_angle(const Mat& r);

/// Kolmogorov-Smirnov statistic of samples against Uniform(0, 1).
double ks_uniform(std::vector<double> u);
/// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);
/// 1% critical value for the one-sample test with N samples (asymptotic).
double ks_critical_1pct(std::size_t n);
/// 1% critical value for the two-sample test with sizes n and m.
double ks_critical_1pct(std::size_t n, std::size_t m);

/// Result of fitting the two-polar Haar density against the chart Jacobian.
struct MeasureFit {
    int exponent_e = 0;
    double constant_c = 0.0;
    double max_rel_err = 0.0;  ///< of the analytic Haar and Lebesgue densities vs the oracle
    int points = 0;
    double spread_e1 = 0.0;  ///< relative spread of oracle / sinh-product for e = 1
    double spread_e2 = 0.0;  ///< same for e = 2
};

/// Random q with pairwise gaps >= 0.1 within [-1.5, 1.5], random L, R.
TwoPolarFactors random_twopolar(CounterRng& rng, int n);

MeasureFit fit_twopolar(int n, int points, std::uint64_t seed);

}  // namespace affinekit
