#include <doctest.h>

#include "sgs/evolution.hpp"
#include "sgs/ground_state.hpp"

using namespace sgs;

namespace {

// psi ~ exp(-|x - c|^2 / (4 s^2) + i p.x): density of standard deviation s per axis.
ComplexField packet(const GridSpec& g, const Vec3& c, double s, const Vec3& p = {}) {
    auto psi = sample_complex(g, [&](const Vec3& x) {
        const Vec3 d = x - c;
        return std::polar(std::exp(-dot(d, d) / (4.0 * s * s)), dot(p, x));
    });
    const double n = std::sqrt(l2_norm_sq(psi));
    for (auto& v : psi.values) v /= n;
    return psi;
}

EvolutionConfig config(double dt, double t_end, int stride = 1) {
    EvolutionConfig c;
    c.dt = dt;
    c.t_end = t_end;
    c.snapshot_stride = stride;
    return c;
}

double relative_l2(const ComplexField& a, const ComplexField& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        num += std::norm(a.values[i] - b.values[i]);
        den += std::norm(b.values[i]);
    }
    return std::sqrt(num / den);
}

// Density of |g(x - a) + g(x + a)|^2 on the x axis for freely evolved packets of initial spread s.
double two_packet_density(double x, double a, double s, double t) {
    auto amp = [&](double x0) {
        const std::complex<double> q(4.0 * s * s, 2.0 * t);
        return std::exp(-std::complex<double>((x - x0) * (x - x0)) / q) / std::sqrt(q);
    };
    return std::norm(amp(a) + amp(-a));
}

}  // namespace

TEST_CASE("configuration checks") {
    const GridSpec g(16, 8.0);  // h^2 = 0.25
    CHECK_THROWS_AS(config(0.25, 1.0).validate(g), Error);
    CHECK_THROWS_AS(config(-0.1, 1.0).validate(g), Error);
    CHECK_THROWS_AS(config(0.1, 0.05).validate(g), Error);
    CHECK_NOTHROW(config(0.1, 1.0).validate(g));
    CHECK(config(0.1, 1.0).step_count() == 10);
    CHECK_THROWS_AS(evolve_linear_pilot(packet(g, {}, 1.0), config(0.3, 1.0)), Error);
}

TEST_CASE("free Gaussian spreading") {
    const GridSpec g(64, 40.0);
    const double s = 1.0;
    const auto snaps = evolve_linear_pilot(packet(g, {}, s), config(0.05, 5.0 * s * s, 10));
    for (const auto& snap : snaps) {
        const double t = snap.time;
        const double expect = std::sqrt(3.0 * (s * s + t * t / (4.0 * s * s)));
        CHECK(snap.width == doctest::Approx(expect).epsilon(5e-3));
        CHECK(snap.norm_sq == doctest::Approx(1.0).epsilon(1e-8));
    }
    const auto rep = stability_report(snaps);
    const double t = snaps.back().time;
    CHECK(rep.width_drift == doctest::Approx(std::sqrt(1.0 + t * t / 4.0) - 1.0).epsilon(5e-3));
}

TEST_CASE("two-packet interference fringes") {
    const GridSpec g(128, 48.0);
    const double s = 1.0, a = 4.0, t = 4.0;
    auto psi = packet(g, {-a, 0, 0}, s);
    const auto right = packet(g, {a, 0, 0}, s);
    for (std::size_t i = 0; i < psi.values.size(); ++i) psi.values[i] += right.values[i];
    const auto snaps = evolve_linear_pilot(psi, config(0.1, t, 1000));
    const auto& end = snaps.back().psi;

    // First density minimum on the positive x axis, refined by a parabola through the grid nodes.
    const int c = g.n() / 2;
    const double h = g.spacing();
    auto rho = [&](int i) { return std::norm(end(i, c, c)); };
    int m = c + 1;
    while (!(rho(m) <= rho(m - 1) && rho(m) <= rho(m + 1))) ++m;
    const double y0 = rho(m - 1), y1 = rho(m), y2 = rho(m + 1);
    const double measured = g.coordinate(m) + 0.5 * h * (y0 - y2) / (y0 - 2.0 * y1 + y2);

    // Same minimum of the closed-form density by golden-section search.
    double lo = 0.0, hi = 2.0 * measured;
    for (int it = 0; it < 200; ++it) {
        const double x1 = hi - 0.618033988749895 * (hi - lo), x2 = lo + 0.618033988749895 * (hi - lo);
        if (two_packet_density(x1, a, s, t) < two_packet_density(x2, a, s, t)) hi = x2;
        else lo = x1;
    }
    const double exact = 0.5 * (lo + hi);
    // The fringe spacing is twice the distance of the first minimum from the symmetry plane.
    CHECK(2.0 * measured == doctest::Approx(2.0 * exact).epsilon(0.02));
}

TEST_CASE("plane wave is an eigenstate") {
    const GridSpec g(16, 8.0);
    const double dk = 2.0 * kPi / g.box_length();
    const Vec3 k{dk, 2 * dk, 0};
    const auto psi0 = sample_complex(g, [&](const Vec3& x) { return std::polar(1.0, dot(k, x)); });
    const double T = 1.0;
    const auto snaps = evolve_linear_pilot(psi0, config(0.1, T));
    const auto& end = snaps.back().psi;
    const Complex rot = std::polar(1.0, -0.5 * dot(k, k) * T);
    double err = 0.0;
    for (std::size_t i = 0; i < end.values.size(); ++i) err = std::max(err, std::abs(end.values[i] - rot * psi0.values[i]));
    CHECK(err < 1e-12);
}

TEST_CASE("external potentials") {
    const GridSpec g(32, 16.0);
    const auto psi0 = packet(g, {}, 1.0);

    SUBCASE("uniform potential only rotates the phase") {
        auto cfg = config(0.1, 2.0);
        const auto free = evolve_linear_pilot(psi0, cfg);
        cfg.external = UniformPotential{0.7};
        const auto shifted = evolve_linear_pilot(psi0, cfg);
        auto expect = free.back().psi;
        for (auto& v : expect.values) v *= std::polar(1.0, -0.7 * 2.0);
        CHECK(relative_l2(shifted.back().psi, expect) < 1e-12);
    }
    SUBCASE("linear potential accelerates the barycentre") {
        auto cfg = config(0.05, 3.0, 10);
        const Vec3 grad{0.2, 0.0, -0.1};
        cfg.external = LinearPotential{grad};
        for (const auto& snap : evolve_linear_pilot(psi0, cfg)) {
            const double t = snap.time;
            CHECK(snap.barycentre[0] == doctest::Approx(-0.5 * grad[0] * t * t).epsilon(1e-3).scale(1.0));
            CHECK(snap.barycentre[2] == doctest::Approx(-0.5 * grad[2] * t * t).epsilon(1e-3).scale(1.0));
        }
    }
    SUBCASE("harmonic coherent state oscillates classically") {
        const double omega = 1.0, x0 = 2.0;
        const auto coherent = packet(g, {x0, 0, 0}, std::sqrt(0.5 / omega));
        auto cfg = config(0.02, 2.0 * kPi / omega, 5);
        cfg.external = HarmonicPotential{omega, {}};
        const auto snaps = evolve_linear_pilot(coherent, cfg);
        for (const auto& snap : snaps) {
            CHECK(std::abs(snap.barycentre[0] - x0 * std::cos(omega * snap.time)) < 5e-3 * x0);
            CHECK(snap.width == doctest::Approx(snaps.front().width).epsilon(1e-3));
        }
    }
}

TEST_CASE("time reversal of linear evolution") {
    const GridSpec g(32, 16.0);
    const auto psi0 = packet(g, {0.5, 0, 0}, 1.0, {0.8, 0, 0});
    auto cfg = config(0.05, 2.0);
    const auto fwd = evolve_linear_pilot(psi0, cfg);
    cfg.direction = TimeDirection::backward;
    const auto back = evolve_linear_pilot(fwd.back().psi, cfg);
    CHECK(back.back().time == doctest::Approx(-2.0));
    CHECK(relative_l2(back.back().psi, psi0) < 1e-6);
}

TEST_CASE("ground state is stationary under the nonlinear flow") {
    const GridSpec g(32, 28.0);
    const auto kernel = KernelSpec::coulomb(1.0, Boundary::isolated);
    const auto gs = solve_choquard(g, kernel, 2.0);
    const double period = 2.0 * kPi / std::abs(gs.eigenvalue);
    const auto snaps = evolve_nls(to_complex(gs.phi), kernel, config(0.05, 10.0 * period, 10));
    const auto rep = stability_report(snaps);
    CHECK(rep.width_drift < 1e-2);
    CHECK(rep.norm_drift < 1e-8);

    double phase = 0.0, prev = 0.0;
    for (std::size_t i = 1; i < snaps.size(); ++i) {
        const double a = std::arg(inner_product(snaps.front().psi, snaps[i].psi));
        phase += std::remainder(a - prev, 2.0 * kPi);
        prev = a;
    }
    CHECK(-phase / snaps.back().time == doctest::Approx(gs.eigenvalue).epsilon(1e-2));
}

TEST_CASE("split-step is second order with self-interaction") {
    const GridSpec g(32, 20.0);
    const auto kernel = KernelSpec::coulomb(2.0, Boundary::isolated);
    const auto psi0 = packet(g, {}, 1.2, {0.3, 0, 0});
    const double T = 1.6;
    const auto ref = evolve_nls(psi0, kernel, config(0.0125, T)).back().psi;
    const double e1 = relative_l2(evolve_nls(psi0, kernel, config(0.1, T)).back().psi, ref);
    const double e2 = relative_l2(evolve_nls(psi0, kernel, config(0.05, T)).back().psi, ref);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("stability report") {
    const GridSpec g(16, 8.0);
    const auto snap = make_snapshot(0.0, packet(g, {}, 1.0));
    const std::vector<StateSnapshot> same{snap, snap};
    const auto rep = stability_report(same);
    CHECK(rep.width_drift == 0.0);
    CHECK(rep.barycentre_drift == 0.0);
    CHECK(rep.norm_drift == 0.0);
    CHECK_THROWS_AS(stability_report(std::span(same).first(1)), Error);
}
