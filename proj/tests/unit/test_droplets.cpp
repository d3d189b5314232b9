#include <doctest.h>

#include <cmath>

#include "sgs/droplets.hpp"

using namespace sgs;

namespace {

const ForcingSpec kBath{2.0, 1.0};  // lambda_F = 1, k0 = 4 pi
const DropletPair kPair{1.0, 1.0, 0.01, 0.01};

/// Root of d/dr [cos(k r) / r] in (a, b) by plain bisection.
double bisect_derivative_root(double k, double a, double b) {
    auto f = [k](double r) { return (-k * r * std::sin(k * r) - std::cos(k * r)) / (r * r); };
    double fa = f(a);
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double separation(const Trajectory& t, std::size_t i) { return norm(t.positions[1][i] - t.positions[0][i]); }

TwoBodyState relative_start(const DropletPair& p, double d, double speed) {
    const double m = p.M_A + p.M_B;
    TwoBodyState s;
    s.x_A = {-p.M_B / m * d, 0.0, 0.0};
    s.x_B = {p.M_A / m * d, 0.0, 0.0};
    s.v_A = {0.0, -p.M_B / m * speed, 0.0};
    s.v_B = {0.0, p.M_A / m * speed, 0.0};
    return s;
}

}  // namespace

TEST_CASE("forcing relations") {
    const ForcingSpec s{3.0, 2.0};
    CHECK(s.faraday_wavelength() == doctest::Approx(2.0 * s.lambda0()).epsilon(1e-15));
    CHECK(s.k0() == doctest::Approx(4.0 * kPi / s.faraday_wavelength()).epsilon(1e-15));
    CHECK(s.faraday_frequency() == 1.5);
    CHECK_THROWS_AS((ForcingSpec{-1.0, 1.0}.validate()), Error);
    CHECK_THROWS_AS((ForcingSpec{1.0, 0.0}.validate()), Error);
    CHECK_NOTHROW((ForcingSpec{0.0, 1.0}.validate()));
    CHECK_THROWS_AS((DropletPair{1.0, 0.0, 1.0, 1.0}.validate()), Error);
}

TEST_CASE("pseudo-potential") {
    const std::vector<PointSource> one{{{0, 0, 0}, 0.3}};
    const Vec3 x{0.6, 0.0, 0.8};
    CHECK(pseudo_potential(x, one, ForcingSpec{0.0, 2.0}) == doctest::Approx(-4.0 * 0.3 / 1.0));

    const double r_zero = 0.5 * kPi / kBath.k0();
    CHECK(std::abs(pseudo_potential({r_zero, 0, 0}, one, kBath)) < 1e-15);

    const std::vector<PointSource> two{{{-0.7, 0, 0}, 0.3}, {{0.7, 0, 0}, 0.3}};
    const Vec3 mid{0.0, 0.2, 0.0};
    CHECK(pseudo_potential(mid, two, kBath) ==
          doctest::Approx(2.0 * pseudo_potential(mid - Vec3{-0.7, 0, 0}, one, kBath)).epsilon(1e-14));
    CHECK_THROWS_AS(pseudo_potential({0, 0, 0}, one, kBath), Error);
}

TEST_CASE("pair interaction") {
    const DropletPair p{2.0, 0.5, 0.03, 0.07};
    const DropletPair swapped{0.5, 2.0, 0.07, 0.03};
    const double c = p.M_B * p.L_A + p.M_A * p.L_B;
    for (double d : {0.1, 0.37, 1.9}) {
        CHECK(pair_interaction(d, p, kBath) == pair_interaction(d, swapped, kBath));
        CHECK(pair_interaction(d, p, kBath) == doctest::Approx(-c * std::cos(kBath.k0() * d) / d).epsilon(1e-14));
        CHECK(pair_interaction(d, p, ForcingSpec{2.0 * kBath.f0, 2.0 * kBath.v}) ==
              doctest::Approx(4.0 * pair_interaction(d, p, kBath)).epsilon(1e-14));
        const double h = 1e-6;
        const double fd = -(pair_interaction(d + h, p, kBath) - pair_interaction(d - h, p, kBath)) / (2 * h);
        CHECK(pair_force(d, p, kBath) == doctest::Approx(fd).epsilon(1e-6));
    }

    // Zeros at k0 d = pi/2 + n pi, alternating sign, attractive first.
    const double k0 = kBath.k0();
    CHECK(pair_interaction(0.2 / k0, p, kBath) < 0.0);
    for (int n = 0; n < 12; ++n) {
        const double d = (0.5 * kPi + n * kPi) / k0;
        CHECK(std::abs(pair_interaction(d, p, kBath)) < 1e-15 * c / d * 4);
        const double inside = pair_interaction((n + 1) * kPi / k0, p, kBath);
        CHECK((n % 2 == 0 ? inside > 0.0 : inside < 0.0));
    }
    CHECK_THROWS_AS(pair_interaction(0.0, p, kBath), Error);
    CHECK_THROWS_AS(pair_force(-1.0, p, kBath), Error);
}

TEST_CASE("force-sign boundaries") {
    const double k0 = kBath.k0();
    const auto roots = force_roots(kBath, 5.0);
    REQUIRE(roots.size() == 20);
    for (std::size_t n = 0; n < roots.size(); ++n) {
        const double x = k0 * roots[n];
        CHECK(std::abs(std::tan(x) + 1.0 / x) < 1e-8);
        const double oracle = bisect_derivative_root(k0, (0.5 + n) * kPi / k0, (1.5 + n) * kPi / k0);
        CHECK(std::abs(roots[n] - oracle) < 1e-12);
        // x_n approaches (n + 1) pi from below as 1 / ((n + 1) pi).
        const double m = (n + 1) * kPi;
        CHECK(x < m);
        CHECK((m - x) * m == doctest::Approx(1.0).epsilon(2.0 / (m * m)));
    }
    for (std::size_t n = 10; n + 1 < roots.size(); ++n)
        CHECK(roots[n + 1] - roots[n] == doctest::Approx(0.25 * kBath.faraday_wavelength()).epsilon(1e-3));
    CHECK(force_roots(ForcingSpec{0.0, 1.0}, 10.0).empty());
}

TEST_CASE("zones") {
    const auto zones = classify_zones(kBath, 5.0);
    REQUIRE(zones.size() == 21);
    CHECK(zones.front().r_lo == 0.0);
    CHECK(zones.back().r_hi == 5.0);
    for (std::size_t i = 0; i < zones.size(); ++i) {
        CHECK(zones[i].attractive == (i % 2 == 0));
        const double mid = 0.5 * (zones[i].r_lo + zones[i].r_hi);
        CHECK((pair_force(mid, kPair, kBath) < 0.0) == zones[i].attractive);
        if (i > 0) CHECK(zones[i].r_lo == zones[i - 1].r_hi);
    }
    const auto flat = classify_zones(ForcingSpec{0.0, 1.0}, 3.0);
    REQUIRE(flat.size() == 1);
    CHECK(flat[0].attractive);
    CHECK_THROWS_AS(classify_zones(kBath, 1.0), Error);
}

TEST_CASE("orbit equilibria") {
    const double lf = kBath.faraday_wavelength();
    const auto eq = orbit_equilibria(kPair, kBath, 5.0);
    REQUIRE(eq.equilibrium_radii.size() >= 8);
    const auto zones = classify_zones(kBath, 5.0);
    for (std::size_t i = 0; i < eq.equilibrium_radii.size(); ++i) {
        const double d = eq.equilibrium_radii[i];
        if (i > 0) CHECK(d > eq.equilibrium_radii[i - 1]);
        // Local minimum of U.
        const double h = 1e-4;
        CHECK(pair_interaction(d, kPair, kBath) < pair_interaction(d - h, kPair, kBath));
        CHECK(pair_interaction(d, kPair, kBath) < pair_interaction(d + h, kPair, kBath));
        CHECK(eq.stable[i]);
        // Repulsive below, attractive above.
        bool boundary = false;
        for (std::size_t z = 1; z < zones.size(); ++z)
            boundary |= zones[z].r_lo == d && zones[z].attractive && !zones[z - 1].attractive;
        CHECK(boundary);
        if (d > 2.0 * lf && i + 1 < eq.equilibrium_radii.size())
            CHECK(eq.equilibrium_radii[i + 1] - d == doctest::Approx(0.5 * lf).epsilon(1e-2));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, std::abs(eq.residuals[i]));
    CHECK(worst < 0.02);
    CHECK(eq.epsilon_ci > 0.0);

    const auto scaled = orbit_equilibria(DropletPair{3.0, 5.0, 0.2, 0.9}, kBath, 5.0);
    CHECK(scaled.epsilon == eq.epsilon);

    CHECK_THROWS_WITH_AS(orbit_equilibria(kPair, ForcingSpec{0.0, 1.0}, 5.0), doctest::Contains("NoEquilibria"),
                         Error);
    CHECK_THROWS_WITH_AS(orbit_equilibria(kPair, kBath, 4.9), doctest::Contains("NoEquilibria"), Error);
}

TEST_CASE("orbits") {
    SUBCASE("resting pair at a potential minimum stays put") {
        const double d = orbit_equilibria(kPair, kBath, 5.0).equilibrium_radii[1];
        CHECK(circular_speed(d, kPair, kBath) < 1e-6);
        const auto run = simulate_orbit(kPair, kBath, relative_start(kPair, d, 0.0), 200.0, 0.01);
        CHECK(std::abs(run.max_separation - d) < 1e-10);
        CHECK(std::abs(run.min_separation - d) < 1e-10);
    }
    SUBCASE("circular orbit in an attractive basin") {
        const DropletPair pair{1.0, 2.0, 0.01, 0.02};
        const double d = orbit_equilibria(pair, kBath, 5.0).equilibrium_radii[1] + 0.05;
        const double speed = circular_speed(d, pair, kBath);
        REQUIRE(speed > 0.0);
        const double period = 2.0 * kPi * d / speed;
        const auto run = simulate_orbit(pair, kBath, relative_start(pair, d, speed), 20.0 * period, period / 2000.0);
        CHECK((run.max_separation - run.min_separation) / d < 0.02);
        CHECK(run.energy_drift < 1e-4);
        CHECK(run.angular_momentum_drift < 1e-10);
    }
    SUBCASE("inbound start in a repulsive zone scatters") {
        // Just outside a barrier top, so every later barrier is lower.
        const auto zones = classify_zones(kBath, 5.0);
        REQUIRE(!zones[3].attractive);
        const double d = zones[3].r_lo + 0.02 * (zones[3].r_hi - zones[3].r_lo);
        auto init = relative_start(kPair, d, 0.0);
        init.v_A = {1e-4, 0.0, 0.0};
        init.v_B = {-1e-4, 0.0, 0.0};
        const auto run = simulate_orbit(kPair, kBath, init, 400.0, 0.002, {10, 0.0});
        CHECK(!run.separation_nondecreasing);
        const auto& t = run.trajectory;
        std::size_t turn = 0;
        for (std::size_t i = 1; i < t.times.size(); ++i)
            if (separation(t, i) < separation(t, turn)) turn = i;
        CHECK(run.min_separation > zones[3].r_lo);
        for (std::size_t i = turn + 1; i < t.times.size(); ++i) CHECK(separation(t, i) >= separation(t, i - 1));
        CHECK(run.max_separation > d + kBath.faraday_wavelength());
        CHECK(run.energy_drift < 1e-4);
    }
    SUBCASE("Kepler limit") {
        const ForcingSpec flat{0.0, 1.0};
        const DropletPair pair{1.0, 3.0, 0.5, 0.25};
        const double mu = pair.reduced_mass();
        const double c = pair.M_B * pair.L_A + pair.M_A * pair.L_B;
        std::vector<double> ratio;
        for (double r0 : {1.0, 2.5}) {
            // Start at periapsis with eccentricity 0.3.
            const double e = 0.3;
            const double speed = std::sqrt(c / mu * (1 + e) / r0);
            const double a = r0 / (1 - e);
            const double period_exact = 2.0 * kPi * std::sqrt(a * a * a * mu / c);
            const auto run = simulate_orbit(pair, flat, relative_start(pair, r0, speed), 3.2 * period_exact,
                                            period_exact / 20000.0);
            // Period from successive periapsis passages.
            const auto& t = run.trajectory;
            std::vector<double> passes;
            for (std::size_t i = 1; i + 1 < t.times.size(); ++i)
                if (separation(t, i) < separation(t, i - 1) && separation(t, i) <= separation(t, i + 1))
                    passes.push_back(t.times[i]);
            REQUIRE(passes.size() >= 2);
            const double period = (passes.back() - passes.front()) / (passes.size() - 1);
            CHECK(period == doctest::Approx(period_exact).epsilon(1e-3));
            CHECK(0.5 * (run.max_separation + run.min_separation) == doctest::Approx(a).epsilon(1e-3));
            CHECK(run.energy_drift < 1e-4);
            CHECK(run.angular_momentum_drift < 1e-10);
            ratio.push_back(period * period / (a * a * a));
        }
        CHECK(ratio[0] == doctest::Approx(ratio[1]).epsilon(1e-2));
    }
    SUBCASE("head-on collapse is detected") {
        const auto init = relative_start(kPair, 1.0, 0.0);
        CHECK_THROWS_WITH_AS(simulate_orbit(kPair, ForcingSpec{0.0, 1.0}, init, 1e4, 0.01, {1, 0.05}),
                             doctest::Contains("CollisionDetected"), Error);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(simulate_orbit(kPair, kBath, relative_start(kPair, 1.0, 0.0), 1.0, 0.0), Error);
        CHECK_THROWS_AS(simulate_orbit(kPair, kBath, TwoBodyState{}, 1.0, 0.1), Error);
    }
}

TEST_CASE("encounters") {
    const auto captured = classify_encounter(kPair, kBath, 1.0, 0.1, 20.0, 0.002);
    CHECK(captured.outcome == Encounter::captured);
    CHECK(captured.energy_drift < 1e-4);
    CHECK(captured.max_separation <= 1.0 + 0.5 * kBath.faraday_wavelength());

    const auto scattered = classify_encounter(kPair, kBath, 1.3, 0.1, 20.0, 0.002);
    CHECK(scattered.outcome == Encounter::scattered);
    CHECK(scattered.min_separation == doctest::Approx(1.3));
    CHECK(scattered.energy_drift < 1e-4);

    CHECK(std::string(to_string(Encounter::undetermined)) == "undetermined");
    CHECK_THROWS_AS(classify_encounter(kPair, kBath, 0.0, 0.1, 1.0, 0.01), Error);
}
