#pragma once

// Potential energy of the N-body system: separable one-body terms, binary
// terms built from a scalar shape applied to one invariant argument, and the
// dilatation stabilizer sum_K f(det phi_K).
//
// A binary term is shape(arg). Arguments:
//   r     |x_K - x_L|
//   D     affine distance sqrt(dx^T Cbar dx), Cbar = (C[phi_K] + C[phi_L]) / 2
//   K     K_a = Tr((phi_K^T phi_L)^a)
//   M     Mbar_a = (Tr Gamma^a + Tr Gamma^-a) / 2, Gamma = phi_K^-1 phi_L
// For K and M an index a in 1..n selects one invariant; index 0 sums the
// shape over every a. Terms using only D and M are purely affine.
//
// One-body arguments: x2 = |x - center|^2 and K = Tr(G^a), G = phi^T phi.

#include "affinekit/kinematics.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace affinekit {

enum class ShapeKind { Harmonic, Poly, LennardJones, LogHarmonic };

/// harmonic [k, s0]:      k/2 (s - s0)^2
/// poly [c0, c1, ...]:    sum c_i s^i
/// lj [eps, sigma]:       4 eps ((sigma/s)^12 - (sigma/s)^6)
/// log_harmonic [k, s0]:  k/2 ln(s/s0)^2, s > 0
struct Shape {
    ShapeKind kind = ShapeKind::Poly;
    std::vector<double> coeffs;

    bool operator==(const Shape&) const = default;
};

double shape_value(const Shape& f, double s);
double shape_derivative(const Shape& f, double s);

enum class BinaryArg { R, D, K, M };
enum class OneBodyArg { X2, K };

std::string_view to_string(ShapeKind k);
std::string_view to_string(BinaryArg a);
std::string_view to_string(OneBodyArg a);
std::optional<ShapeKind> parse_shape(std::string_view key);
std::optional<BinaryArg> parse_binary_arg(std::string_view key);
std::optional<OneBodyArg> parse_one_body_arg(std::string_view key);

struct BinaryTerm {
    Shape shape;
    BinaryArg arg = BinaryArg::D;
    int index = 0;

    bool operator==(const BinaryTerm&) const = default;
};

struct OneBodyTerm {
    Shape shape;
    OneBodyArg arg = OneBodyArg::X2;
    int index = 0;
    Vec center;  ///< used by x2; empty means the origin

    bool operator==(const OneBodyTerm& o) const {
        return shape == o.shape && arg == o.arg && index == o.index && center.size() == o.center.size() &&
               (center.size() == 0 || center == o.center);
    }
};

/// f(d) = kappa/2 ln(d / d_ref)^2 per body.
struct Dilatation {
    double kappa = 0.0;
    double d_ref = 1.0;

    bool operator==(const Dilatation&) const = default;
};

struct PotentialSpec {
    std::vector<OneBodyTerm> one_body;
    std::vector<BinaryTerm> binary;
    std::optional<Dilatation> dilatation;

    [[nodiscard]] bool empty() const { return one_body.empty() && binary.empty() && !dilatation; }
    bool operator==(const PotentialSpec&) const = default;
};

/// Throws InvalidArgument for bad coefficient counts, indices or kappa < 0.
void validate(const PotentialSpec& spec, int n);

double affine_distance(const Vec& xK, const Mat& phiK, const Vec& xL, const Mat& phiL);

/// Sum of the binary terms for one pair. The pair is put in a canonical
/// order before evaluation, so swapping K and L gives identical bits.
double binary_potential(const PotentialSpec& spec, const BodyConfig& K, const BodyConfig& L);

double one_body_potential(const PotentialSpec& spec, const BodyConfig& b);

double dilatation_stabilizer(const PotentialSpec& spec, const Mat& phi);

/// Sum over bodies of one-body and stabilizer terms plus sum over K < L of
/// the binary terms.
double total_potential(const PotentialSpec& spec, const SystemConfig& c);

struct PotentialGradient {
    std::vector<Vec> dx;
    std::vector<Mat> dphi;  ///< shaped like phi: entry (i, A) is dV/dphi^i_A
};

/// Throws NonDifferentiable when r = 0 or D = 0 under a term using it.
PotentialGradient potential_gradient(const PotentialSpec& spec, const SystemConfig& c);

}  // namespace affinekit
