#include "sgs/droplets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/tools/roots.hpp>

#include "sgs/kernels.hpp"

namespace sgs {

void ForcingSpec::validate() const {
    require(std::isfinite(f0) && f0 >= 0.0, "forcing: f0 must be >= 0");
    require(std::isfinite(v) && v > 0.0, "forcing: v must be positive");
}

void DropletPair::validate() const {
    for (double x : {M_A, M_B, L_A, L_B}) require(std::isfinite(x) && x > 0.0, "droplet pair: M and L must be positive");
}

double pseudo_potential(const Vec3& x, const std::vector<PointSource>& sources, const ForcingSpec& spec) {
    spec.validate();
    double sum = 0.0;
    for (const PointSource& s : sources) {
        const double r = norm(x - s.position);
        require(r > 0.0, "pseudo_potential: query point coincides with a source");
        sum += s.L * helmholtz_green(r, spec.k0());
    }
    return -spec.v * spec.v * sum;
}

namespace {

double strength(const DropletPair& pair, const ForcingSpec& spec) {
    return spec.v * spec.v * (pair.M_B * pair.L_A + pair.M_A * pair.L_B);
}

/// x sin x + cos x; proportional to dU/dd.
double g(double x) { return x * std::sin(x) + std::cos(x); }

}  // namespace

double pair_interaction(double d, const DropletPair& pair, const ForcingSpec& spec) {
    require(std::isfinite(d) && d > 0.0, "pair_interaction: separation must be positive");
    return -strength(pair, spec) * helmholtz_green(d, spec.k0());
}

double pair_force(double d, const DropletPair& pair, const ForcingSpec& spec) {
    require(std::isfinite(d) && d > 0.0, "pair_force: separation must be positive");
    return -strength(pair, spec) * g(spec.k0() * d) / (d * d);
}

std::vector<double> force_roots(const ForcingSpec& spec, double r_max) {
    spec.validate();
    require(std::isfinite(r_max) && r_max > 0.0, "force_roots: r_max must be positive");
    std::vector<double> roots;
    const double k0 = spec.k0();
    if (k0 == 0.0) return roots;
    const double x_max = k0 * r_max;
    // g' = x cos x, so g is monotone between pi/2 + n pi and its sign alternates there.
    for (int n = 0;; ++n) {
        const double a = 0.5 * kPi + n * kPi;
        const double b = a + kPi;
        if (a >= x_max) break;
        std::uintmax_t iters = 200;
        const auto [lo, hi] = boost::math::tools::toms748_solve(
            g, a, b, g(a), g(b), boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1),
            iters);
        const double x = 0.5 * (lo + hi);
        if (x >= x_max) break;
        roots.push_back(x / k0);
    }
    return roots;
}

std::vector<Zone> classify_zones(const ForcingSpec& spec, double r_max) {
    spec.validate();
    if (spec.k0() > 0.0)
        require(r_max > spec.faraday_wavelength(), "classify_zones: r_max must exceed lambda_F");
    const std::vector<double> roots = force_roots(spec, r_max);
    std::vector<Zone> zones;
    double lo = 0.0;
    bool attractive = true;
    for (double r : roots) {
        zones.push_back({lo, r, attractive});
        lo = r;
        attractive = !attractive;
    }
    zones.push_back({lo, r_max, attractive});
    return zones;
}

OrbitResult orbit_equilibria(const DropletPair& pair, const ForcingSpec& spec, double r_max) {
    pair.validate();
    spec.validate();
    if (spec.k0() == 0.0) fail(ErrorCode::NoEquilibria, "orbit_equilibria: k0 = 0 has no finite minima");
    const double lf = spec.faraday_wavelength();
    if (r_max < 5.0 * lf)
        fail(ErrorCode::NoEquilibria, "orbit_equilibria: r_max must be >= 5 lambda_F = " + std::to_string(5.0 * lf));

    const std::vector<double> roots = force_roots(spec, r_max);
    OrbitResult out;
    // g < 0 between roots 0 and 1, so U falls and then rises across every odd root.
    for (std::size_t i = 1; i < roots.size(); i += 2) {
        const double d = roots[i];
        out.equilibrium_radii.push_back(d);
        out.n_index.push_back(static_cast<int>(std::lround(2.0 * d / lf)));
        // U'' = C k0 x cos x / d^2 where g(x) = 0.
        out.stable.push_back(std::cos(spec.k0() * d) > 0.0);
    }
    const std::size_t m = out.equilibrium_radii.size();
    if (m == 0) fail(ErrorCode::NoEquilibria, "orbit_equilibria: no minima below r_max");

    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) sum += 0.5 * out.n_index[i] - out.equilibrium_radii[i] / lf;
    out.epsilon = sum / m;
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = out.equilibrium_radii[i] / lf - (0.5 * out.n_index[i] - out.epsilon);
        out.residuals.push_back(r);
        out.max_residual = std::max(out.max_residual, std::abs(r));
        ss += r * r;
    }
    if (m >= 2) {
        const boost::math::students_t dist(static_cast<double>(m - 1));
        out.epsilon_ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * std::sqrt(ss / (m - 1) / m);
    }
    return out;
}

double circular_speed(double d, const DropletPair& pair, const ForcingSpec& spec) {
    const double f = pair_force(d, pair, spec);
    return f < 0.0 ? std::sqrt(-f * d / pair.reduced_mass()) : 0.0;
}

const char* to_string(Encounter e) {
    switch (e) {
        case Encounter::captured: return "captured";
        case Encounter::scattered: return "scattered";
        case Encounter::undetermined: return "undetermined";
    }
    return "?";
}

namespace {

struct Accel {
    Vec3 a_A, a_B;
};

Accel accelerations(const Vec3& x_A, const Vec3& x_B, const DropletPair& pair, const ForcingSpec& spec,
                    double collision_radius) {
    const Vec3 r = x_B - x_A;
    const double d = norm(r);
    if (!(d >= collision_radius))
        fail(ErrorCode::CollisionDetected, "simulate_orbit: separation " + std::to_string(d) + " below " +
                                               std::to_string(collision_radius));
    const Vec3 on_B = (pair_force(d, pair, spec) / d) * r;
    return {(-1.0 / pair.M_A) * on_B, (1.0 / pair.M_B) * on_B};
}

double energy(const TwoBodyState& s, const DropletPair& pair, const ForcingSpec& spec, double* kinetic = nullptr) {
    const double k = 0.5 * pair.M_A * dot(s.v_A, s.v_A) + 0.5 * pair.M_B * dot(s.v_B, s.v_B);
    if (kinetic) *kinetic = k;
    return k + pair_interaction(norm(s.x_B - s.x_A), pair, spec);
}

Vec3 angular_momentum(const TwoBodyState& s, const DropletPair& pair) {
    return pair.M_A * cross(s.x_A, s.v_A) + pair.M_B * cross(s.x_B, s.v_B);
}

}  // namespace

OrbitRun simulate_orbit(const DropletPair& pair, const ForcingSpec& spec, const TwoBodyState& init, double t_end,
                        double dt, const OrbitOptions& opts) {
    pair.validate();
    spec.validate();
    require(std::isfinite(dt) && dt > 0.0 && std::isfinite(t_end) && t_end >= dt,
            "simulate_orbit: need 0 < dt <= t_end");
    require(opts.record_stride >= 1, "simulate_orbit: record_stride must be >= 1");
    const double d0 = norm(init.x_B - init.x_A);
    require(d0 > 0.0, "simulate_orbit: initial separation must be positive");
    const double collision = opts.collision_radius > 0.0 ? opts.collision_radius
                             : spec.k0() > 0.0         ? 1e-3 * spec.faraday_wavelength()
                                                       : 1e-3 * d0;

    TwoBodyState s = init;
    double k0_energy = 0.0;
    const double e0 = energy(s, pair, spec, &k0_energy);
    const double e_scale = std::abs(k0_energy) + std::abs(e0 - k0_energy);
    const Vec3 l0 = angular_momentum(s, pair);
    const double l_scale = norm(l0) > 0.0 ? norm(l0) : 1.0;

    OrbitRun run;
    run.trajectory.positions.resize(2);
    run.trajectory.velocities.resize(2);
    run.min_separation = run.max_separation = d0;
    auto record = [&](double t) {
        run.trajectory.times.push_back(t);
        run.trajectory.positions[0].push_back(s.x_A);
        run.trajectory.positions[1].push_back(s.x_B);
        run.trajectory.velocities[0].push_back(s.v_A);
        run.trajectory.velocities[1].push_back(s.v_B);
    };
    record(0.0);

    const long steps = std::max(1L, std::lround(t_end / dt));
    Accel acc = accelerations(s.x_A, s.x_B, pair, spec, collision);
    double previous = d0;
    for (long step = 1; step <= steps; ++step) {
        s.v_A = s.v_A + (0.5 * dt) * acc.a_A;
        s.v_B = s.v_B + (0.5 * dt) * acc.a_B;
        s.x_A = s.x_A + dt * s.v_A;
        s.x_B = s.x_B + dt * s.v_B;
        acc = accelerations(s.x_A, s.x_B, pair, spec, collision);
        s.v_A = s.v_A + (0.5 * dt) * acc.a_A;
        s.v_B = s.v_B + (0.5 * dt) * acc.a_B;

        const double d = norm(s.x_B - s.x_A);
        run.min_separation = std::min(run.min_separation, d);
        run.max_separation = std::max(run.max_separation, d);
        if (d < previous) run.separation_nondecreasing = false;
        previous = d;
        run.energy_drift = std::max(run.energy_drift, std::abs(energy(s, pair, spec) - e0) / e_scale);
        run.angular_momentum_drift = std::max(run.angular_momentum_drift, norm(angular_momentum(s, pair) - l0) / l_scale);
        if (step % opts.record_stride == 0 || step == steps) record(step * dt);
    }
    return run;
}

EncounterResult classify_encounter(const DropletPair& pair, const ForcingSpec& spec, double b, double speed,
                                   double revolutions, double dt) {
    require(b > 0.0 && speed > 0.0 && revolutions > 0.0, "classify_encounter: b, speed and revolutions must be positive");
    pair.validate();
    const double m = pair.M_A + pair.M_B;
    TwoBodyState init;
    init.x_A = {0.0, -pair.M_B / m * b, 0.0};
    init.x_B = {0.0, pair.M_A / m * b, 0.0};
    init.v_A = {-pair.M_B / m * speed, 0.0, 0.0};
    init.v_B = {pair.M_A / m * speed, 0.0, 0.0};

    const double t_end = revolutions * 2.0 * kPi * b / speed;
    OrbitOptions opts;
    opts.record_stride = std::numeric_limits<int>::max();
    const OrbitRun run = simulate_orbit(pair, spec, init, t_end, dt, opts);

    const double lf = spec.k0() > 0.0 ? spec.faraday_wavelength() : b;
    EncounterResult r;
    r.impact_parameter = b;
    r.energy_drift = run.energy_drift;
    r.min_separation = run.min_separation;
    r.max_separation = run.max_separation;
    r.revolutions = revolutions;
    if (run.min_separation >= b - 0.5 * lf && run.max_separation <= b + 0.5 * lf)
        r.outcome = Encounter::captured;
    else if (run.separation_nondecreasing && run.max_separation > b + lf)
        r.outcome = Encounter::scattered;
    return r;
}

}  // namespace sgs
