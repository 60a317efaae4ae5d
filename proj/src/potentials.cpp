#include "affinekit/potentials.hpp"

#include "affinekit/errors.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace affinekit {

namespace {

constexpr std::array<std::pair<ShapeKind, std::string_view>, 4> kShapeKeys{{
    {ShapeKind::Harmonic, "harmonic"},
    {ShapeKind::Poly, "poly"},
    {ShapeKind::LennardJones, "lj"},
    {ShapeKind::LogHarmonic, "log_harmonic"},
}};
constexpr std::array<std::pair<BinaryArg, std::string_view>, 4> kBinaryArgKeys{{
    {BinaryArg::R, "r"},
    {BinaryArg::D, "D"},
    {BinaryArg::K, "K"},
    {BinaryArg::M, "M"},
}};
constexpr std::array<std::pair<OneBodyArg, std::string_view>, 2> kOneBodyArgKeys{{
    {OneBodyArg::X2, "x2"},
    {OneBodyArg::K, "K"},
}};

template <class Table, class E>
std::string_view key_of(const Table& t, E e) {
    for (const auto& [k, v] : t)
        if (k == e) return v;
    return "?";
}

template <class E, class Table>
std::optional<E> parse_key(const Table& t, std::string_view key) {
    for (const auto& [k, v] : t)
        if (v == key) return k;
    return std::nullopt;
}

void check_shape(const Shape& f, const std::string& where) {
    const std::size_t m = f.coeffs.size();
    const bool ok = f.kind == ShapeKind::Poly ? m >= 1 : m == 2;
    if (!ok) throw Error(ErrorCode::InvalidArgument, where + ": wrong number of coefficients");
    for (double c : f.coeffs)
        if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, where + ": coefficient not finite");
    if (f.kind == ShapeKind::LogHarmonic && !(f.coeffs[1] > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, where + ": log_harmonic reference must be positive");
    }
    if (f.kind == ShapeKind::LennardJones && !(f.coeffs[1] > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, where + ": lj sigma must be positive");
    }
}

bool lex_less(const BodyConfig& a, const BodyConfig& b) {
    for (Eigen::Index i = 0; i < a.x.size(); ++i)
        if (a.x(i) != b.x(i)) return a.x(i) < b.x(i);
    for (Eigen::Index i = 0; i < a.phi.rows(); ++i)
        for (Eigen::Index j = 0; j < a.phi.cols(); ++j)
            if (a.phi(i, j) != b.phi(i, j)) return a.phi(i, j) < b.phi(i, j);
    return false;
}

// Sum of f over the selected invariant(s): a = index, or every a when index is 0.
template <class Fn>
void for_each_index(int index, int n, Fn&& fn) {
    if (index > 0) {
        fn(index);
    } else {
        for (int a = 1; a <= n; ++a) fn(a);
    }
}

// Invariants of one ordered pair, computed lazily once per pair.
struct PairData {
    const BodyConfig& K;
    const BodyConfig& L;
    int n;
    Vec delta;  // x_L - x_K
    Mat invK, invL;
    Mat P, Gamma, GammaInv;
    bool have_inv = false, have_P = false, have_Gamma = false;

    PairData(const BodyConfig& k, const BodyConfig& l)
        : K(k), L(l), n(static_cast<int>(k.x.size())), delta(l.x - k.x) {}

    void need_inv() {
        if (have_inv) return;
        invK = checked_inverse(K.phi);
        invL = checked_inverse(L.phi);
        have_inv = true;
    }
    void need_P() {
        if (have_P) return;
        checked_det(K.phi);
        checked_det(L.phi);
        P = K.phi.transpose() * L.phi;
        have_P = true;
    }
    void need_Gamma() {
        if (have_Gamma) return;
        need_inv();
        Gamma = invK * L.phi;
        GammaInv = invL * K.phi;
        have_Gamma = true;
    }

    double r() const { return delta.norm(); }

    double D() {
        need_inv();
        const Vec uK = invK * delta;
        const Vec uL = invL * delta;
        return std::sqrt(0.5 * (uK.squaredNorm() + uL.squaredNorm()));
    }
};

double binary_value_ordered(const PotentialSpec& spec, const BodyConfig& K, const BodyConfig& L) {
    PairData d(K, L);
    double total = 0.0;
    for (const BinaryTerm& t : spec.binary) {
        switch (t.arg) {
            case BinaryArg::R: {
                const double r = d.r();
                if (r == 0.0) throw Error(ErrorCode::SingularInput, "r = 0 in an r-dependent binary term");
                total += shape_value(t.shape, r);
                break;
            }
            case BinaryArg::D: {
                const double D = d.D();
                if (D == 0.0) throw Error(ErrorCode::SingularInput, "D = 0 in a D-dependent binary term");
                total += shape_value(t.shape, D);
                break;
            }
            case BinaryArg::K:
                d.need_P();
                for_each_index(t.index, d.n, [&](int a) { total += shape_value(t.shape, mat_power(d.P, a).trace()); });
                break;
            case BinaryArg::M:
                d.need_Gamma();
                for_each_index(t.index, d.n, [&](int a) {
                    const double m = 0.5 * (mat_power(d.Gamma, a).trace() + mat_power(d.GammaInv, a).trace());
                    total += shape_value(t.shape, m);
                });
                break;
        }
    }
    return total;
}

struct PairGradient {
    Vec dxK, dxL;
    Mat dphiK, dphiL;
};

PairGradient binary_gradient_ordered(const PotentialSpec& spec, const BodyConfig& K, const BodyConfig& L) {
    PairData d(K, L);
    const int n = d.n;
    PairGradient g{Vec::Zero(n), Vec::Zero(n), Mat::Zero(n, n), Mat::Zero(n, n)};
    for (const BinaryTerm& t : spec.binary) {
        switch (t.arg) {
            case BinaryArg::R: {
                const double r = d.r();
                if (r == 0.0) throw Error(ErrorCode::NonDifferentiable, "r = 0 in an r-dependent binary term");
                const Vec dr = d.delta / r;
                const double fp = shape_derivative(t.shape, r);
                g.dxL += fp * dr;
                g.dxK -= fp * dr;
                break;
            }
            case BinaryArg::D: {
                const double D = d.D();
                if (D == 0.0) throw Error(ErrorCode::NonDifferentiable, "D = 0 in a D-dependent binary term");
                const double fp = shape_derivative(t.shape, D);
                const Vec uK = d.invK * d.delta;
                const Vec uL = d.invL * d.delta;
                // Cbar delta = (phi_K^-T uK + phi_L^-T uL) / 2
                const Vec cd = 0.5 * (d.invK.transpose() * uK + d.invL.transpose() * uL);
                g.dxL += fp * cd / D;
                g.dxK -= fp * cd / D;
                g.dphiK -= fp * d.invK.transpose() * uK * uK.transpose() / (2.0 * D);
                g.dphiL -= fp * d.invL.transpose() * uL * uL.transpose() / (2.0 * D);
                break;
            }
            case BinaryArg::K:
                d.need_P();
                for_each_index(t.index, n, [&](int a) {
                    const Mat pa1 = mat_power(d.P, a - 1);
                    const double fp = shape_derivative(t.shape, (pa1 * d.P).trace());
                    g.dphiK += fp * a * L.phi * pa1;
                    g.dphiL += fp * a * K.phi * pa1.transpose();
                });
                break;
            case BinaryArg::M:
                d.need_Gamma();
                for_each_index(t.index, n, [&](int a) {
                    const Mat ga1 = mat_power(d.Gamma, a - 1);
                    const Mat ga = ga1 * d.Gamma;
                    const Mat gm = mat_power(d.GammaInv, a);
                    const Mat gm1 = gm * d.GammaInv;
                    const double fp = shape_derivative(t.shape, 0.5 * (ga.trace() + gm.trace()));
                    const double c = 0.5 * fp * a;
                    // d Tr Gamma^a and d Tr Gamma^-a through Gamma = phi_K^-1 phi_L.
                    g.dphiK += c * (-(ga * d.invK).transpose() + (gm * d.invK).transpose());
                    g.dphiL += c * ((ga1 * d.invK).transpose() - (gm1 * d.invK).transpose());
                });
                break;
        }
    }
    return g;
}

}  // namespace

std::string_view to_string(ShapeKind k) { return key_of(kShapeKeys, k); }
std::string_view to_string(BinaryArg a) { return key_of(kBinaryArgKeys, a); }
std::string_view to_string(OneBodyArg a) { return key_of(kOneBodyArgKeys, a); }
std::optional<ShapeKind> parse_shape(std::string_view key) { return parse_key<ShapeKind>(kShapeKeys, key); }
std::optional<BinaryArg> parse_binary_arg(std::string_view key) { return parse_key<BinaryArg>(kBinaryArgKeys, key); }
std::optional<OneBodyArg> parse_one_body_arg(std::string_view key) {
    return parse_key<OneBodyArg>(kOneBodyArgKeys, key);
}

double shape_value(const Shape& f, double s) {
    const auto& c = f.coeffs;
    switch (f.kind) {
        case ShapeKind::Harmonic: return 0.5 * c[0] * (s - c[1]) * (s - c[1]);
        case ShapeKind::Poly: {
            double acc = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * s + *it;
            return acc;
        }
        case ShapeKind::LennardJones: {
            const double r6 = std::pow(c[1] / s, 6);
            return 4.0 * c[0] * (r6 * r6 - r6);
        }
        case ShapeKind::LogHarmonic: {
            if (!(s > 0.0)) throw Error(ErrorCode::SingularInput, "log_harmonic argument must be positive");
            const double l = std::log(s / c[1]);
            return 0.5 * c[0] * l * l;
        }
    }
    return 0.0;
}

double shape_derivative(const Shape& f, double s) {
    const auto& c = f.coeffs;
    switch (f.kind) {
        case ShapeKind::Harmonic: return c[0] * (s - c[1]);
        case ShapeKind::Poly: {
            double acc = 0.0;
            for (std::size_t i = c.size() - 1; i >= 1; --i) acc = acc * s + static_cast<double>(i) * c[i];
            return acc;
        }
        case ShapeKind::LennardJones: {
            const double r6 = std::pow(c[1] / s, 6);
            return 4.0 * c[0] * (-12.0 * r6 * r6 + 6.0 * r6) / s;
        }
        case ShapeKind::LogHarmonic: {
            if (!(s > 0.0)) throw Error(ErrorCode::NonDifferentiable, "log_harmonic argument must be positive");
            return c[0] * std::log(s / c[1]) / s;
        }
    }
    return 0.0;
}

void validate(const PotentialSpec& spec, int n) {
    require_dim(n);
    for (std::size_t i = 0; i < spec.one_body.size(); ++i) {
        const auto& t = spec.one_body[i];
        const std::string where = "potential.one_body[" + std::to_string(i) + "]";
        check_shape(t.shape, where);
        if (t.arg == OneBodyArg::K && (t.index < 0 || t.index > n)) throw Error(ErrorCode::InvalidArgument, where + ": index out of range");
        if (t.arg == OneBodyArg::X2 && t.center.size() != 0 && t.center.size() != n) {
            throw Error(ErrorCode::InvalidArgument, where + ": center has wrong dimension");
        }
    }
    for (std::size_t i = 0; i < spec.binary.size(); ++i) {
        const auto& t = spec.binary[i];
        const std::string where = "potential.binary[" + std::to_string(i) + "]";
        check_shape(t.shape, where);
        if (t.index < 0 || t.index > n) throw Error(ErrorCode::InvalidArgument, where + ": index out of range");
    }
    if (spec.dilatation) {
        if (!(spec.dilatation->kappa >= 0.0)) throw Error(ErrorCode::InvalidArgument, "potential.dilatation: kappa must be >= 0");
        if (!(spec.dilatation->d_ref > 0.0)) throw Error(ErrorCode::InvalidArgument, "potential.dilatation: d_ref must be > 0");
    }
}

double affine_distance(const Vec& xK, const Mat& phiK, const Vec& xL, const Mat& phiL) {
    const Vec delta = xL - xK;
    const Vec uK = checked_inverse(phiK) * delta;
    const Vec uL = checked_inverse(phiL) * delta;
    return std::sqrt(0.5 * (uK.squaredNorm() + uL.squaredNorm()));
}

double binary_potential(const PotentialSpec& spec, const BodyConfig& K, const BodyConfig& L) {
    if (spec.binary.empty()) return 0.0;
    return lex_less(L, K) ? binary_value_ordered(spec, L, K) : binary_value_ordered(spec, K, L);
}

double one_body_potential(const PotentialSpec& spec, const BodyConfig& b) {
    double total = 0.0;
    for (const OneBodyTerm& t : spec.one_body) {
        if (t.arg == OneBodyArg::X2) {
            const Vec d = t.center.size() == 0 ? b.x : Vec(b.x - t.center);
            total += shape_value(t.shape, d.squaredNorm());
        } else {
            const Mat G = b.phi.transpose() * b.phi;
            for_each_index(t.index, static_cast<int>(b.x.size()),
                           [&](int a) { total += shape_value(t.shape, mat_power(G, a).trace()); });
        }
    }
    return total;
}

double dilatation_stabilizer(const PotentialSpec& spec, const Mat& phi) {
    const double d = checked_positive_det(phi);
    if (!spec.dilatation) return 0.0;
    const double l = std::log(d / spec.dilatation->d_ref);
    return 0.5 * spec.dilatation->kappa * l * l;
}

double total_potential(const PotentialSpec& spec, const SystemConfig& c) {
    double total = 0.0;
    const std::size_t count = c.bodies.size();
    for (std::size_t k = 0; k < count; ++k) {
        total += one_body_potential(spec, c.bodies[k]);
        if (spec.dilatation) total += dilatation_stabilizer(spec, c.bodies[k].phi);
    }
    for (std::size_t k = 0; k < count; ++k)
        for (std::size_t l = k + 1; l < count; ++l) total += binary_potential(spec, c.bodies[k], c.bodies[l]);
    return total;
}

PotentialGradient potential_gradient(const PotentialSpec& spec, const SystemConfig& c) {
    const int n = c.n;
    const std::size_t count = c.bodies.size();
    PotentialGradient g;
    g.dx.assign(count, Vec::Zero(n));
    g.dphi.assign(count, Mat::Zero(n, n));
    for (std::size_t k = 0; k < count; ++k) {
        const BodyConfig& b = c.bodies[k];
        for (const OneBodyTerm& t : spec.one_body) {
            if (t.arg == OneBodyArg::X2) {
                const Vec d = t.center.size() == 0 ? b.x : Vec(b.x - t.center);
                g.dx[k] += 2.0 * shape_derivative(t.shape, d.squaredNorm()) * d;
            } else {
                const Mat G = b.phi.transpose() * b.phi;
                for_each_index(t.index, n, [&](int a) {
                    const Mat ga1 = mat_power(G, a - 1);
                    const double fp = shape_derivative(t.shape, (ga1 * G).trace());
                    g.dphi[k] += 2.0 * a * fp * b.phi * ga1;
                });
            }
        }
        if (spec.dilatation) {
            const double d = checked_positive_det(b.phi);
            g.dphi[k] += spec.dilatation->kappa * std::log(d / spec.dilatation->d_ref) * b.phi.inverse().transpose();
        }
    }
    if (spec.binary.empty()) return g;
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t l = k + 1; l < count; ++l) {
            const bool swap = lex_less(c.bodies[l], c.bodies[k]);
            const std::size_t first = swap ? l : k;
            const std::size_t second = swap ? k : l;
            const PairGradient pg = binary_gradient_ordered(spec, c.bodies[first], c.bodies[second]);
            g.dx[first] += pg.dxK;
            g.dphi[first] += pg.dphiK;
            g.dx[second] += pg.dxL;
            g.dphi[second] += pg.dphiL;
        }
    }
    return g;
}

}  // namespace affinekit
