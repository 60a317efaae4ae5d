#include "affinekit/measures.hpp"

#include "affinekit/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace affinekit {

std::string_view to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::LebesgueA: return "lebesgue_a";
        case MeasureKind::HaarAlpha: return "haar_alpha";
        case MeasureKind::LebesgueL: return "lebesgue_l";
        case MeasureKind::HaarLambda: return "haar_lambda";
    }
    return "?";
}

std::optional<MeasureKind> parse_measure_kind(std::string_view key) {
    for (MeasureKind k : {MeasureKind::LebesgueA, MeasureKind::HaarAlpha, MeasureKind::LebesgueL, MeasureKind::HaarLambda})
        if (to_string(k) == key) return k;
    return std::nullopt;
}

double haar_density(const Mat& phi, MeasureKind kind) {
    const double d = checked_positive_det(phi);
    const double n = static_cast<double>(phi.rows());
    switch (kind) {
        case MeasureKind::HaarLambda: return std::pow(d, -n);
        case MeasureKind::HaarAlpha: return std::pow(d, -n - 1.0);
        case MeasureKind::LebesgueA:
        case MeasureKind::LebesgueL: return 1.0;
    }
    return 1.0;
}

double twopolar_constant(int n) { return std::ldexp(1.0, n * (n - 1) / 2); }

double sinh_product(const Vec& q, int e) {
    double acc = 1.0;
    for (Eigen::Index i = 0; i < q.size(); ++i)
        for (Eigen::Index j = i + 1; j < q.size(); ++j) acc *= std::pow(std::abs(std::sinh(q(i) - q(j))), e);
    return acc;
}

TwoPolarDensities twopolar_densities(const TwoPolarFactors& f) {
    const Eigen::Index n = f.q.size();
    TwoPolarDensities d;
    d.haar = twopolar_constant(static_cast<int>(n)) * sinh_product(f.q, kSinhExponent);
    double leb = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double Qi = std::exp(f.q(i));
        leb *= Qi;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double Qj = std::exp(f.q(j));
            leb *= std::abs((Qi - Qj) * (Qi + Qj));
        }
    }
    d.lebesgue = leb;
    return d;
}

Mat so_basis(int n, int k) {
    Mat e = Mat::Zero(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++idx) {
            if (idx == k) {
                e(i, j) = 1.0;
                e(j, i) = -1.0;
                return e;
            }
        }
    }
    throw Error(ErrorCode::InvalidArgument, "so(n) basis index out of range");
}

Mat so_exp(const Eigen::VectorXd& t, int n) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < t.size(); ++k) w += t(k) * Eigen::MatrixXd(so_basis(n, static_cast<int>(k)));
    const Eigen::MatrixXd r = w.exp();
    return Mat(r);
}

Mat twopolar_chart(const TwoPolarFactors& f, const Eigen::VectorXd& tL, const Vec& q, const Eigen::VectorXd& tR) {
    const int n = static_cast<int>(q.size());
    const Mat L = f.L * so_exp(tL, n);
    const Mat R = f.R * so_exp(tR, n);
    return L * q.array().exp().matrix().asDiagonal() * R.transpose();
}

double jacobian_oracle(const TwoPolarFactors& f) {
    const int n = static_cast<int>(f.q.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(f.q(i) - f.q(j)) <= 1e-8) throw Error(ErrorCode::DegenerateSpectrum, "coincident q entries");
    const int m = n * (n - 1) / 2;
    const int dim = n * n;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    theta.segment(m, n) = f.q;
    auto chart = [&](const Eigen::VectorXd& th) {
        const Mat phi = twopolar_chart(f, th.head(m), Vec(th.segment(m, n)), th.tail(m));
        Eigen::VectorXd out(dim);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) out(i * n + j) = phi(i, j);
        return out;
    };
    constexpr double h = 1e-6;
    Eigen::MatrixXd jac(dim, dim);
    for (int c = 0; c < dim; ++c) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp(c) += h;
        tm(c) -= h;
        jac.col(c) = (chart(tp) - chart(tm)) / (2.0 * h);
    }
    return std::abs(jac.determinant());
}

Mat sample_orthogonal(CounterRng& rng, int n) {
    if (n < 1 || n > 3) throw Error(ErrorCode::InvalidArgument, "sample_orthogonal supports 1 <= n <= 3");
    if (n == 1) return Mat::Identity(1, 1);
    if (n == 2) {
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        Mat r(2, 2);
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        return r;
    }
    // A normalized 4-d Gaussian is uniform on S^3; its rotation is Haar on SO(3).
    Eigen::Vector4d v;
    do {
        for (int i = 0; i < 4; ++i) v(i) = rng.normal();
    } while (v.norm() < 1e-12);
    const Eigen::Quaterniond quat(v(0), v(1), v(2), v(3));
    return Mat(quat.normalized().toRotationMatrix());
}

Mat sample_orthogonal(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    return sample_orthogonal(rng, n);
}

double so2_angle(const Mat& r) {
    double a = std::atan2(r(1, 0), r(0, 0));
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    return a;
}

double ks_uniform(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, hi - u[i], u[i] - lo});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_critical_1pct(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

double ks_critical_1pct(std::size_t n, std::size_t m) {
    const double a = static_cast<double>(n), b = static_cast<double>(m);
    return 1.628 * std::sqrt((a + b) / (a * b));
}

TwoPolarFactors random_twopolar(CounterRng& rng, int n) {
    Vec q(n);
    for (;;) {
        for (int i = 0; i < n; ++i) q(i) = rng.uniform(-1.5, 1.5);
        std::sort(q.data(), q.data() + n, std::greater<>());
        bool ok = true;
        for (int i = 0; i + 1 < n; ++i) ok = ok && q(i) - q(i + 1) >= 0.1;
        if (ok) break;
    }
    const Mat L = sample_orthogonal(rng, n);
    const Mat R = sample_orthogonal(rng, n);
    return two_polar_from(L, q, R);
}

MeasureFit fit_twopolar(int n, int points, std::uint64_t seed) {
    if (n < 2 || n > 3) throw Error(ErrorCode::InvalidArgument, "measure fit supports n = 2 or 3");
    if (points < 2) throw Error(ErrorCode::InvalidArgument, "measure fit needs at least 2 points");
    CounterRng rng(seed, 0x6d65617375726573ULL);
    std::vector<double> r1, r2;
    std::vector<TwoPolarFactors> samples;
    std::vector<double> oracle_leb;
    for (int k = 0; k < points; ++k) {
        samples.push_back(random_twopolar(rng, n));
        const TwoPolarFactors& f = samples.back();
        const double leb = jacobian_oracle(f);
        const double haar = leb * std::exp(-static_cast<double>(n) * f.q.sum());
        oracle_leb.push_back(leb);
        r1.push_back(haar / sinh_product(f.q, 1));
        r2.push_back(haar / sinh_product(f.q, 2));
    }
    auto spread = [](const std::vector<double>& r) {
        const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
        double mean = 0.0;
        for (double x : r) mean += x;
        mean /= static_cast<double>(r.size());
        return std::pair{(*hi - *lo) / mean, mean};
    };
    const auto [s1, c1] = spread(r1);
    const auto [s2, c2] = spread(r2);
    MeasureFit fit;
    fit.points = points;
    fit.spread_e1 = s1;
    fit.spread_e2 = s2;
    fit.exponent_e = s1 <= s2 ? 1 : 2;
    fit.constant_c = s1 <= s2 ? c1 : c2;
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const TwoPolarDensities d = twopolar_densities(samples[k]);
        const double haar = oracle_leb[k] * std::exp(-static_cast<double>(n) * samples[k].q.sum());
        fit.max_rel_err = std::max(fit.max_rel_err, std::abs(d.haar - haar) / haar);
        fit.max_rel_err = std::max(fit.max_rel_err, std::abs(d.lebesgue - oracle_leb[k]) / oracle_leb[k]);
    }
    return fit;
}

}  // namespace affinekit
