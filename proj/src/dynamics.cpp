#include "affinekit/dynamics.hpp"

#include "affinekit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace affinekit {

namespace {

int block_size(int n) { return n + n * n; }

// Largest |c(t) - c(0)| relative to |c(0)|, both in max-norm.
template <class M>
double drift_of(const M& initial, const M& current) {
    const double scale = initial.size() == 0 ? 0.0 : initial.cwiseAbs().maxCoeff();
    const double diff = initial.size() == 0 ? 0.0 : (current - initial).cwiseAbs().maxCoeff();
    return scale > 0.0 ? diff / scale : diff;
}

bool state_ok(const PhaseState& s, double det_floor) {
    for (const auto& b : s.config.bodies) {
        if (!b.x.allFinite() || !b.phi.allFinite()) return false;
        if (!(b.phi.determinant() > det_floor)) return false;
    }
    for (std::size_t k = 0; k < s.mom.p.size(); ++k) {
        if (!s.mom.p[k].allFinite() || !s.mom.pi[k].allFinite()) return false;
    }
    return true;
}

Eigen::VectorXd flat_rhs(const Hamiltonian& h, const Eigen::VectorXd& z, const PhaseState& like) {
    return pack(hamilton_rhs(h, unpack(z, like)));
}

}  // namespace

double Hamiltonian::energy(const PhaseState& s) const {
    return kinetic_hamiltonian(model, inertia, s.config, s.mom) + total_potential(potential, s.config);
}

PhaseDerivative hamilton_rhs(const Hamiltonian& h, const PhaseState& s) {
    const KineticGradient kg = kinetic_hamiltonian_gradient(h.model, h.inertia, s.config, s.mom);
    const PotentialGradient pg = potential_gradient(h.potential, s.config);
    const std::size_t count = s.config.bodies.size();
    PhaseDerivative d;
    d.dx.reserve(count);
    d.dphi.reserve(count);
    d.dp.reserve(count);
    d.dpi.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        d.dx.push_back(kg.dp[k]);
        d.dphi.push_back(kg.dpi[k].transpose());
        d.dp.push_back(-pg.dx[k]);
        d.dpi.push_back(-(kg.dphi[k] + pg.dphi[k]).transpose());
    }
    return d;
}

namespace {

void write_blocks(Eigen::VectorXd& z, int n, std::size_t count, const std::vector<Vec>& x, const std::vector<Mat>& phi,
                  const std::vector<Vec>& p, const std::vector<Mat>& pi_t) {
    const Eigen::Index half = static_cast<Eigen::Index>(count) * block_size(n);
    for (std::size_t k = 0; k < count; ++k) {
        const Eigen::Index o = static_cast<Eigen::Index>(k) * block_size(n);
        for (int i = 0; i < n; ++i) {
            z(o + i) = x[k](i);
            z(half + o + i) = p[k](i);
            for (int a = 0; a < n; ++a) {
                z(o + n + i * n + a) = phi[k](i, a);
                z(half + o + n + i * n + a) = pi_t[k](a, i);
            }
        }
    }
}

std::vector<Mat> positions_phi(const SystemConfig& c) {
    std::vector<Mat> out;
    for (const auto& b : c.bodies) out.push_back(b.phi);
    return out;
}

std::vector<Vec> positions_x(const SystemConfig& c) {
    std::vector<Vec> out;
    for (const auto& b : c.bodies) out.push_back(b.x);
    return out;
}

}  // namespace

Eigen::VectorXd pack(const PhaseState& s) {
    const int n = s.config.n;
    const std::size_t count = s.config.bodies.size();
    Eigen::VectorXd z(2 * static_cast<Eigen::Index>(count) * block_size(n));
    write_blocks(z, n, count, positions_x(s.config), positions_phi(s.config), s.mom.p, s.mom.pi);
    return z;
}

Eigen::VectorXd pack(const PhaseDerivative& d) {
    const std::size_t count = d.dx.size();
    const int n = count == 0 ? 0 : static_cast<int>(d.dx.front().size());
    Eigen::VectorXd z(2 * static_cast<Eigen::Index>(count) * block_size(n));
    write_blocks(z, n, count, d.dx, d.dphi, d.dp, d.dpi);
    return z;
}

PhaseState unpack(const Eigen::VectorXd& z, const PhaseState& like) {
    const int n = like.config.n;
    const std::size_t count = like.config.bodies.size();
    const Eigen::Index half = static_cast<Eigen::Index>(count) * block_size(n);
    if (z.size() != 2 * half) throw Error(ErrorCode::InvalidArgument, "phase vector has wrong length");
    PhaseState s;
    s.time = like.time;
    s.config.n = n;
    s.config.bodies.resize(count);
    s.mom.p.resize(count);
    s.mom.pi.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        const Eigen::Index o = static_cast<Eigen::Index>(k) * block_size(n);
        Vec x(n), p(n);
        Mat phi(n, n), pi(n, n);
        for (int i = 0; i < n; ++i) {
            x(i) = z(o + i);
            p(i) = z(half + o + i);
            for (int a = 0; a < n; ++a) {
                phi(i, a) = z(o + n + i * n + a);
                pi(a, i) = z(half + o + n + i * n + a);
            }
        }
        s.config.bodies[k] = {x, phi};
        s.mom.p[k] = p;
        s.mom.pi[k] = pi;
    }
    return s;
}

ChargeRecord noether_charges(const PhaseState& s, const Hamiltonian* h) {
    const int n = s.config.n;
    ChargeRecord r;
    r.p = Vec::Zero(n);
    r.Sigma = Mat::Zero(n, n);
    r.SigmaHat = Mat::Zero(n, n);
    r.Lambda = Mat::Zero(n, n);
    for (std::size_t k = 0; k < s.config.bodies.size(); ++k) {
        const BodyConfig& b = s.config.bodies[k];
        const SpinParts sp = spin_parts(b.phi, s.mom.p[k], s.mom.pi[k]);
        r.p += s.mom.p[k];
        r.Sigma += sp.Sigma;
        r.SigmaHat += sp.SigmaHat;
        r.Lambda += b.x * s.mom.p[k].transpose();
        r.S_body.push_back(sp.S);
        r.V_body.push_back(sp.V);
        r.det_phi.push_back(b.phi.determinant());
        r.q.push_back(two_polar_decompose(b.phi).q);
    }
    r.J = r.Lambda + r.Sigma;
    r.S = r.Sigma - r.Sigma.transpose();
    r.V = r.SigmaHat - r.SigmaHat.transpose();
    if (h != nullptr) r.energy = h->energy(s);
    return r;
}

std::string_view to_string(Method m) { return m == Method::Rk4 ? "rk4" : "implicit_midpoint"; }

std::optional<Method> parse_method(std::string_view key) {
    if (key == "implicit_midpoint") return Method::ImplicitMidpoint;
    if (key == "rk4") return Method::Rk4;
    return std::nullopt;
}

PhaseState step(const Hamiltonian& h, const PhaseState& s, double dt, Method m, const IntegratorOptions& opt,
                int* iterations) {
    const Eigen::VectorXd z0 = pack(s);
    Eigen::VectorXd z1;
    int used = 0;
    if (m == Method::Rk4) {
        const Eigen::VectorXd k1 = flat_rhs(h, z0, s);
        const Eigen::VectorXd k2 = flat_rhs(h, z0 + 0.5 * dt * k1, s);
        const Eigen::VectorXd k3 = flat_rhs(h, z0 + 0.5 * dt * k2, s);
        const Eigen::VectorXd k4 = flat_rhs(h, z0 + dt * k3, s);
        z1 = z0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
        z1 = z0 + dt * flat_rhs(h, z0, s);
        bool converged = false;
        while (used < opt.max_iterations) {
            ++used;
            const Eigen::VectorXd next = z0 + dt * flat_rhs(h, 0.5 * (z0 + z1), s);
            const double residual = (next - z1).cwiseAbs().maxCoeff();
            z1 = next;
            if (!std::isfinite(residual)) break;
            if (residual <= opt.tolerance * std::max(1.0, z1.cwiseAbs().maxCoeff())) {
                converged = true;
                break;
            }
        }
        // One more sweep after convergence pushes the fixed point to roundoff, so quadratic
        // invariants do not pick up a systematic 1e-12 per step.
        if (converged) z1 = z0 + dt * flat_rhs(h, 0.5 * (z0 + z1), s);
        if (!converged) {
            throw Error(ErrorCode::IterationDiverged,
                        "implicit midpoint did not converge in " + std::to_string(opt.max_iterations) + " iterations at t = " +
                            std::to_string(s.time));
        }
    }
    if (iterations != nullptr) *iterations = used;
    PhaseState out = unpack(z1, s);
    out.time = s.time + dt;
    return out;
}

Trajectory integrate(const Hamiltonian& h, const PhaseState& s0, const IntegratorOptions& opt) {
    if (!(opt.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    if (!(opt.T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be non-negative");
    if (opt.record_every < 1) throw Error(ErrorCode::InvalidArgument, "record_every must be >= 1");
    validate(s0.config);

    Trajectory traj;
    auto record = [&](const PhaseState& s) {
        traj.times.push_back(s.time);
        traj.states.push_back(s);
        traj.charges.push_back(noether_charges(s, &h));
    };
    record(s0);

    const std::size_t steps = opt.T > 0.0 ? static_cast<std::size_t>(std::ceil(opt.T / opt.dt - 1e-9)) : 0;
    PhaseState cur = s0;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_next = k == steps ? s0.time + opt.T : s0.time + static_cast<double>(k) * opt.dt;
        const double dt = t_next - cur.time;
        int used = 0;
        PhaseState next;
        try {
            next = step(h, cur, dt, opt.method, opt, &used);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::SingularInput || e.code() == ErrorCode::NegativeOrientation) {
                traj.status = RunStatus::StateInvalid;
                break;
            }
            throw;
        }
        next.time = t_next;
        traj.max_iterations_used = std::max(traj.max_iterations_used, used);
        if (!state_ok(next, opt.det_floor)) {
            traj.status = RunStatus::StateInvalid;
            break;
        }
        cur = std::move(next);
        traj.steps = k;
        if (k % static_cast<std::size_t>(opt.record_every) == 0 || k == steps) record(cur);
    }
    // Partial runs still end on the last valid state.
    if (traj.status == RunStatus::StateInvalid && traj.times.back() != cur.time) record(cur);
    return traj;
}

double relative_drift(const Mat& initial, const Mat& current) { return drift_of(initial, current); }

ChargeDrift charge_drift(const Trajectory& t) {
    ChargeDrift d;
    if (t.charges.empty()) return d;
    const ChargeRecord& c0 = t.charges.front();
    for (const ChargeRecord& c : t.charges) {
        const double de = std::abs(c.energy - c0.energy);
        d.energy = std::max(d.energy, c0.energy != 0.0 ? de / std::abs(c0.energy) : de);
        d.p = std::max(d.p, drift_of(c0.p, c.p));
        d.Sigma = std::max(d.Sigma, drift_of(c0.Sigma, c.Sigma));
        d.SigmaHat = std::max(d.SigmaHat, drift_of(c0.SigmaHat, c.SigmaHat));
        d.J = std::max(d.J, drift_of(c0.J, c.J));
        d.S = std::max(d.S, drift_of(c0.S, c.S));
        d.V = std::max(d.V, drift_of(c0.V, c.V));
    }
    return d;
}

Eigen::VectorXd numeric_gradient(const std::function<double(const PhaseState&)>& f, const PhaseState& s) {
    const Eigen::VectorXd z = pack(s);
    Eigen::VectorXd g(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(z(j)));
        Eigen::VectorXd zp = z, zm = z;
        zp(j) += h;
        zm(j) -= h;
        g(j) = (f(unpack(zp, s)) - f(unpack(zm, s))) / (zp(j) - zm(j));
    }
    return g;
}

double poisson_bracket(const PhaseFunction& F, const PhaseFunction& G, const PhaseState& s) {
    const Eigen::VectorXd gf = F.gradient ? F.gradient(s) : numeric_gradient(F.value, s);
    const Eigen::VectorXd gg = G.gradient ? G.gradient(s) : numeric_gradient(G.value, s);
    const Eigen::Index half = gf.size() / 2;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < half; ++j) acc += gf(j) * gg(half + j) - gf(half + j) * gg(j);
    return acc;
}

PhaseFunction sigma_component(int a, int b) {
    PhaseFunction f;
    f.value = [a, b](const PhaseState& s) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.config.bodies.size(); ++k) acc += (s.config.bodies[k].phi * s.mom.pi[k])(a, b);
        return acc;
    };
    f.gradient = [a, b](const PhaseState& s) {
        const int n = s.config.n;
        const std::size_t count = s.config.bodies.size();
        const Eigen::Index half = static_cast<Eigen::Index>(count) * block_size(n);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * half);
        for (std::size_t k = 0; k < count; ++k) {
            const Eigen::Index o = static_cast<Eigen::Index>(k) * block_size(n) + n;
            const Mat& phi = s.config.bodies[k].phi;
            const Mat& pi = s.mom.pi[k];
            for (int A = 0; A < n; ++A) {
                g(o + a * n + A) += pi(A, b);           // d/d phi^a_A
                g(half + o + b * n + A) += phi(a, A);   // d/d pi^A_b
            }
        }
        return g;
    };
    return f;
}

PhaseFunction sigma_hat_component(int a, int b) {
    PhaseFunction f;
    f.value = [a, b](const PhaseState& s) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s.config.bodies.size(); ++k) acc += (s.mom.pi[k] * s.config.bodies[k].phi)(a, b);
        return acc;
    };
    f.gradient = [a, b](const PhaseState& s) {
        const int n = s.config.n;
        const std::size_t count = s.config.bodies.size();
        const Eigen::Index half = static_cast<Eigen::Index>(count) * block_size(n);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * half);
        for (std::size_t k = 0; k < count; ++k) {
            const Eigen::Index o = static_cast<Eigen::Index>(k) * block_size(n) + n;
            const Mat& phi = s.config.bodies[k].phi;
            const Mat& pi = s.mom.pi[k];
            for (int i = 0; i < n; ++i) {
                g(o + i * n + b) += pi(a, i);           // d/d phi^i_b
                g(half + o + i * n + a) += phi(i, b);   // d/d pi^a_i
            }
        }
        return g;
    };
    return f;
}

}  // namespace affinekit
