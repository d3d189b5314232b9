#include "sgs/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "sgs/parallel.hpp"

namespace sgs {

GuidanceField::GuidanceField(const ComplexField& psi, Complex phase) : spec_(psi.spec), nodes_(psi.spec.size()) {
    ComplexField aligned = psi;
    if (phase != Complex(1.0))
        for (Complex& v : aligned.values) v *= phase;
    const auto grad = spectral_gradient(aligned);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i] = {aligned.values[i], grad[0].values[i], grad[1].values[i], grad[2].values[i]};
        max_density_ = std::max(max_density_, std::norm(aligned.values[i]));
    }
}

namespace {

/// Lagrange weights for nodes -1, 0, 1, 2 at fractional offset t in [0, 1).
std::array<double, 4> cubic_weights(double t) {
    return {-t * (t - 1.0) * (t - 2.0) / 6.0, (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
            -(t + 1.0) * t * (t - 2.0) / 2.0, (t + 1.0) * t * (t - 1.0) / 6.0};
}

}  // namespace

GuidanceField::Sample GuidanceField::sample(const Vec3& x) const {
    const int n = spec_.n();
    std::array<std::array<int, 4>, 3> idx;
    std::array<std::array<double, 4>, 3> w;
    for (int a = 0; a < 3; ++a) {
        const double u = (x[a] + 0.5 * spec_.box_length()) / spec_.spacing();
        const double fl = std::floor(u);
        long long i0 = static_cast<long long>(fl) % n;
        if (i0 < 0) i0 += n;
        for (int m = 0; m < 4; ++m) idx[a][m] = static_cast<int>((i0 - 1 + m + n) % n);
        w[a] = cubic_weights(u - fl);
    }
    std::array<Complex, 4> acc{};
    for (int i = 0; i < 4; ++i) {
        std::array<Complex, 4> plane{};
        for (int j = 0; j < 4; ++j) {
            std::array<Complex, 4> line{};
            const std::size_t row = (static_cast<std::size_t>(idx[0][i]) * n + idx[1][j]) * n;
            for (int k = 0; k < 4; ++k) {
                const auto& node = nodes_[row + idx[2][k]];
                for (int c = 0; c < 4; ++c) line[c] += w[2][k] * node[c];
            }
            for (int c = 0; c < 4; ++c) plane[c] += w[1][j] * line[c];
        }
        for (int c = 0; c < 4; ++c) acc[c] += w[0][i] * plane[c];
    }
    return {acc[0], {acc[1], acc[2], acc[3]}};
}

Vec3 GuidanceField::velocity(const Vec3& x) const { return velocity_from(sample(x), max_density_); }

Vec3 velocity_from(const GuidanceField::Sample& s, double max_density) {
    const double rho = std::norm(s.psi);
    if (!(rho >= kNodeFloor * max_density) || rho == 0.0)
        fail(ErrorCode::NodeProximity, "guidance: |psi|^2 = " + std::to_string(rho) + " is below the node floor");
    // Im(g / psi) = Im(g conj(psi)) / |psi|^2
    Vec3 v;
    for (int a = 0; a < 3; ++a) v[a] = (s.grad[a] * std::conj(s.psi)).imag() / rho;
    return v;
}

Vec3 dbb_velocity(const ComplexField& psi, const Vec3& x) { return GuidanceField(psi).velocity(x); }

namespace {

Vec3 checked(const Vec3& v, const TrajectoryOptions& opts) {
    const double speed = norm(v);
    if (!std::isfinite(speed) || speed > opts.v_max)
        fail(ErrorCode::NonFinite, "guidance: |v| = " + std::to_string(speed) + " exceeds the sanity cap");
    return v;
}

/// Velocity field on [t0, t1] from two phase-aligned snapshots.
struct Interval {
    const GuidanceField& a;
    const GuidanceField& b;
    double t0;
    double t1;

    Vec3 velocity(const Vec3& x, double t) const {
        const double theta = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        const auto sa = a.sample(x);
        const auto sb = b.sample(x);
        GuidanceField::Sample s;
        s.psi = (1.0 - theta) * sa.psi + theta * sb.psi;
        for (int c = 0; c < 3; ++c) s.grad[c] = (1.0 - theta) * sa.grad[c] + theta * sb.grad[c];
        return velocity_from(s, std::max(a.max_density(), b.max_density()));
    }
};

Vec3 rk4_step(const Interval& iv, const Vec3& x, double t, double h, const TrajectoryOptions& opts) {
    const Vec3 k1 = checked(iv.velocity(x, t), opts);
    const Vec3 k2 = checked(iv.velocity(x + (0.5 * h) * k1, t + 0.5 * h), opts);
    const Vec3 k3 = checked(iv.velocity(x + (0.5 * h) * k2, t + 0.5 * h), opts);
    const Vec3 k4 = checked(iv.velocity(x + h * k3, t + h), opts);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Walks the snapshot list, yielding phase-aligned guidance fields pairwise.
class PilotWalker {
public:
    explicit PilotWalker(std::span<const StateSnapshot> pilot) : pilot_(pilot) {
        require(pilot.size() >= 2, "guidance: need at least two pilot snapshots");
        for (std::size_t i = 1; i < pilot.size(); ++i)
            require(pilot[i].time > pilot[i - 1].time, "guidance: snapshot times must increase strictly");
        current_ = std::make_unique<GuidanceField>(pilot[0].psi);
        phase_ = 1.0;
    }

    std::size_t intervals() const { return pilot_.size() - 1; }

    /// Advances to interval k (must be called with k = 0, 1, 2, ...).
    Interval interval(std::size_t k) {
        if (k > 0) {
            current_ = std::move(next_);
        }
        const ComplexField& prev = pilot_[k].psi;
        const ComplexField& nxt = pilot_[k + 1].psi;
        require(prev.spec == nxt.spec, "guidance: snapshots on different grids");
        // phase_ aligns snapshot k; extend it to k+1.
        const Complex overlap = inner_product(prev, nxt);
        const Complex step = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
        const Complex next_phase = phase_ * std::conj(step);
        double diff = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < prev.values.size(); ++i) {
            diff += std::norm(nxt.values[i] * next_phase - prev.values[i] * phase_);
            ref += std::norm(prev.values[i]);
        }
        const double rel = std::sqrt(diff / ref);
        if (rel > 0.25)
            fail(ErrorCode::StepOutOfBand, "guidance: snapshots " + std::to_string(k) + "->" + std::to_string(k + 1) +
                                               " differ by " + std::to_string(rel) + " (relative L2); refine the stride");
        next_ = std::make_unique<GuidanceField>(nxt, next_phase);
        phase_ = next_phase;
        return Interval{*current_, *next_, pilot_[k].time, pilot_[k + 1].time};
    }

private:
    std::span<const StateSnapshot> pilot_;
    std::unique_ptr<GuidanceField> current_;
    std::unique_ptr<GuidanceField> next_;
    Complex phase_;
};

constexpr int kStepsPerInterval = 4;

}  // namespace

Trajectory integrate_trajectory(std::span<const StateSnapshot> pilot, const Vec3& x_init, const TrajectoryOptions& opts) {
    PilotWalker walker(pilot);
    const GridSpec& spec = pilot.front().psi.spec;
    Trajectory traj;
    traj.positions.resize(1);
    traj.velocities.resize(1);

    Vec3 x = spec.wrap(x_init);
    for (std::size_t k = 0; k < walker.intervals(); ++k) {
        const Interval iv = walker.interval(k);
        const double h = (iv.t1 - iv.t0) / kStepsPerInterval;
        for (int s = 0; s < kStepsPerInterval; ++s) {
            const double t = iv.t0 + s * h;
            if (k == 0 && s == 0) {
                traj.times.push_back(t);
                traj.positions[0].push_back(x);
                traj.velocities[0].push_back(checked(iv.velocity(x, t), opts));
            }
            // Positions are kept unwrapped; the velocity lookup wraps internally.
            x = rk4_step(iv, x, t, h, opts);
            const double t_next = (s + 1 == kStepsPerInterval) ? iv.t1 : t + h;
            traj.times.push_back(t_next);
            traj.positions[0].push_back(x);
            traj.velocities[0].push_back(checked(iv.velocity(x, t_next), opts));
        }
    }
    return traj;
}

std::vector<Vec3> integrate_ensemble(std::span<const StateSnapshot> pilot, std::span<const Vec3> starts,
                                     const TrajectoryOptions& opts) {
    PilotWalker walker(pilot);
    std::vector<Vec3> x(starts.begin(), starts.end());
    for (std::size_t k = 0; k < walker.intervals(); ++k) {
        const Interval iv = walker.interval(k);
        const double h = (iv.t1 - iv.t0) / kStepsPerInterval;
        parallel_for(x.size(), [&](std::size_t p) {
            for (int s = 0; s < kStepsPerInterval; ++s) x[p] = rk4_step(iv, x[p], iv.t0 + s * h, h, opts);
        });
    }
    return x;
}

double slow_guidance_diagnostic(const Trajectory& trajectory, double soliton_width) {
    double vmax = 0.0;
    for (const auto& vs : trajectory.velocities)
        for (const Vec3& v : vs) vmax = std::max(vmax, norm(v));
    return vmax * soliton_width;
}

// ---------------------------------------------------------------------------
// Analytic pilots

Complex FreePacket::value(const Vec3& x, double t) const {
    const double p2 = dot(momentum, momentum);
    if (width == 0.0) return std::polar(1.0, dot(momentum, x) - 0.5 * p2 * t);
    const double s2 = width * width;
    const Complex alpha(1.0, t / (2.0 * s2));
    const Vec3 d = x - centre - t * momentum;
    const Complex envelope = std::exp(-dot(d, d) / (4.0 * s2 * alpha));
    const Complex prefactor = std::pow(2.0 * kPi * s2, -0.75) * std::pow(alpha, -1.5);
    return prefactor * envelope * std::polar(1.0, dot(momentum, x - centre) - 0.5 * p2 * t);
}

std::array<Complex, 3> FreePacket::log_gradient(const Vec3& x, double t) const {
    std::array<Complex, 3> g;
    if (width == 0.0) {
        for (int a = 0; a < 3; ++a) g[a] = Complex(0.0, momentum[a]);
        return g;
    }
    const double s2 = width * width;
    const Complex alpha(1.0, t / (2.0 * s2));
    const Vec3 d = x - centre - t * momentum;
    for (int a = 0; a < 3; ++a) g[a] = -d[a] / (2.0 * s2 * alpha) + Complex(0.0, momentum[a]);
    return g;
}

TwoParticlePilot TwoParticlePilot::product(const FreePacket& a, const FreePacket& b) {
    TwoParticlePilot p;
    p.add_term(1.0, a, b);
    return p;
}

TwoParticlePilot TwoParticlePilot::symmetrized(const FreePacket& a, const FreePacket& b) {
    TwoParticlePilot p;
    p.add_term(0.5, a, b);
    p.add_term(0.5, b, a);
    return p;
}

void TwoParticlePilot::add_term(Complex c, const FreePacket& first, const FreePacket& second) {
    require(first.width >= 0.0 && second.width >= 0.0, "TwoParticlePilot: packet widths must be >= 0");
    terms_.push_back({c, first, second});
}

Complex TwoParticlePilot::value(const Vec3& x1, const Vec3& x2, double t) const {
    Complex sum = 0.0;
    for (const Term& term : terms_) sum += term.coefficient * term.first.value(x1, t) * term.second.value(x2, t);
    return sum;
}

std::pair<Vec3, Vec3> TwoParticlePilot::velocities(const Vec3& x1, const Vec3& x2, double t) const {
    require(!terms_.empty(), "TwoParticlePilot: no terms");
    Complex psi = 0.0;
    std::array<Complex, 3> g1{}, g2{};
    double scale = 0.0;
    for (const Term& term : terms_) {
        const Complex f = term.first.value(x1, t);
        const Complex g = term.second.value(x2, t);
        const Complex c = term.coefficient * f * g;
        const auto l1 = term.first.log_gradient(x1, t);
        const auto l2 = term.second.log_gradient(x2, t);
        psi += c;
        for (int a = 0; a < 3; ++a) {
            g1[a] += c * l1[a];
            g2[a] += c * l2[a];
        }
        scale += std::norm(c);
    }
    const double rho = std::norm(psi);
    if (!(rho >= kNodeFloor * scale) || rho == 0.0)
        fail(ErrorCode::NodeProximity, "two-particle guidance: configuration sits on a node of the pilot");
    Vec3 v1, v2;
    for (int a = 0; a < 3; ++a) {
        v1[a] = (g1[a] * std::conj(psi)).imag() / rho;
        v2[a] = (g2[a] * std::conj(psi)).imag() / rho;
    }
    return {v1, v2};
}

Trajectory integrate_two_particle(const TwoParticlePilot& pilot, const Vec3& x1_init, const Vec3& x2_init,
                                  double t_end, double dt, const TrajectoryOptions& opts) {
    require(dt > 0.0 && t_end >= dt, "integrate_two_particle: need 0 < dt <= t_end");
    const int steps = std::max(1, static_cast<int>(std::llround(t_end / dt)));
    Trajectory traj;
    traj.positions.resize(2);
    traj.velocities.resize(2);

    auto rate = [&](const Vec3& a, const Vec3& b, double t) {
        auto [v1, v2] = pilot.velocities(a, b, t);
        return std::pair{checked(v1, opts), checked(v2, opts)};
    };
    auto record = [&](double t, const Vec3& a, const Vec3& b) {
        const auto [v1, v2] = rate(a, b, t);
        traj.times.push_back(t);
        traj.positions[0].push_back(a);
        traj.positions[1].push_back(b);
        traj.velocities[0].push_back(v1);
        traj.velocities[1].push_back(v2);
    };

    Vec3 x1 = x1_init, x2 = x2_init;
    record(0.0, x1, x2);
    for (int s = 0; s < steps; ++s) {
        const double t = s * dt;
        const auto [a1, a2] = rate(x1, x2, t);
        const auto [b1, b2] = rate(x1 + (0.5 * dt) * a1, x2 + (0.5 * dt) * a2, t + 0.5 * dt);
        const auto [c1, c2] = rate(x1 + (0.5 * dt) * b1, x2 + (0.5 * dt) * b2, t + 0.5 * dt);
        const auto [d1, d2] = rate(x1 + dt * c1, x2 + dt * c2, t + dt);
        x1 = x1 + (dt / 6.0) * (a1 + 2.0 * b1 + 2.0 * c1 + d1);
        x2 = x2 + (dt / 6.0) * (a2 + 2.0 * b2 + 2.0 * c2 + d2);
        record((s + 1) * dt, x1, x2);
    }
    return traj;
}

}  // namespace sgs
