#include <doctest.h>

#include "sgs/kernels.hpp"

using namespace sgs;

namespace {

// Potential -K \int rho(x') e^{-|x-x'|/lam} / |x-x'| of a unit Gaussian blob of
// standard deviation s, in closed form.
double smeared_yukawa(double r, double s, double lam) {
    const double a = s * s / lam;
    const double q = std::sqrt(2.0) * s;
    return -0.5 / r * std::exp(s * s / (2.0 * lam * lam)) *
           (std::exp(-r / lam) * std::erfc((a - r) / q) - std::exp(r / lam) * std::erfc((a + r) / q));
}

double smeared_coulomb(double r, double s) { return -std::erf(r / (std::sqrt(2.0) * s)) / r; }

double max_rel(const RealField& a, const RealField& b, double r_lo, double r_hi) {
    double worst = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        const double r = norm(a.spec.position(n));
        if (r < r_lo || r > r_hi) continue;
        worst = std::max(worst, std::abs(a.values[n] - b.values[n]) / std::abs(b.values[n]));
    }
    return worst;
}

}  // namespace

TEST_CASE("regularized delta normalisation") {
    const GridSpec g(32, 16.0);
    double total = integrate(regularized_delta({0.3, -0.2, 0.1}, 1.0, 1.0, g));
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    const auto zero = regularized_delta({0, 0, 0}, 0.0, 1.0, g);
    for (double v : zero.values) CHECK(v == 0.0);
    auto two = regularized_delta({-3, 0, 0}, 0.7, 1.0, g);
    const auto other = regularized_delta({3, 0, 0}, 0.7, 1.0, g);
    for (std::size_t n = 0; n < two.values.size(); ++n) two.values[n] += other.values[n];
    CHECK(integrate(two) == doctest::Approx(1.4).epsilon(1e-6));
    CHECK_THROWS_AS(regularized_delta({0, 0, 0}, 1.0, 0.7, g), Error);
}

TEST_CASE("isolated coulomb convolution of a Gaussian blob") {
    const GridSpec g(48, 24.0);
    const double s = 1.0;
    const auto rho = regularized_delta({0, 0, 0}, 1.0, s, g);
    const auto v = convolve_potential(rho, KernelSpec::coulomb(1.0, Boundary::isolated));
    const auto exact = sample_real(g, [&](const Vec3& x) { return smeared_coulomb(std::max(norm(x), 1e-12), s); });
    CHECK(max_rel(v, exact, 0.5, 0.25 * g.box_length()) < 1e-3);
    // Centre value: -sqrt(2/pi)/s.
    CHECK(v(24, 24, 24) == doctest::Approx(-std::sqrt(2.0 / kPi) / s).epsilon(2e-3));
}

TEST_CASE("isolated yukawa convolution of a point-like blob") {
    const GridSpec g(32, 16.0);
    const double s = 0.75, lam = 2.0, K = 1.5;
    const auto rho = regularized_delta({0, 0, 0}, 1.0, s, g);
    const auto v = convolve_potential(rho, KernelSpec::yukawa(K, lam, Boundary::isolated));
    const auto smeared = sample_real(g, [&](const Vec3& x) { return K * smeared_yukawa(norm(x), s, lam); });
    CHECK(max_rel(v, smeared, 4 * s, 0.25 * g.box_length()) < 2e-3);

    // Outside the blob the smearing only rescales the tail by exp(s^2 / 2 lam^2).
    const double far = 6.0;
    const auto v_far = convolve_potential(rho, KernelSpec::yukawa(K, far, Boundary::isolated));
    const auto point = sample_real(g, [&](const Vec3& x) { return -K * std::exp(-norm(x) / far) / norm(x); });
    CHECK(max_rel(v_far, point, 4 * s, 0.25 * g.box_length()) < 1e-2);
}

TEST_CASE("yukawa with a huge screening length approaches coulomb") {
    const GridSpec g(32, 16.0);
    const auto rho = regularized_delta({0, 0, 0}, 1.0, 1.0, g);
    const auto c = convolve_potential(rho, KernelSpec::coulomb(1.0, Boundary::isolated));
    const auto y = convolve_potential(rho, KernelSpec::yukawa(1.0, 1e3 * g.box_length(), Boundary::isolated));
    CHECK(max_rel(y, c, 0.0, 0.25 * g.box_length()) < 1e-3);
}

TEST_CASE("periodic coulomb of a uniform density vanishes") {
    const GridSpec g(16, 10.0);
    const RealField rho(g, std::vector<double>(g.size(), 0.3));
    const auto v = convolve_potential(rho, KernelSpec::coulomb(1.0));
    for (double x : v.values) CHECK(std::abs(x) < 1e-14);
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(KernelSpec::yukawa(1.0, 0.0).validate(), Error);
    CHECK_THROWS_AS(KernelSpec::coulomb(-1.0).validate(), Error);
    CHECK_NOTHROW(KernelSpec::coulomb(0.0).validate());
}

TEST_CASE("poisson solve") {
    const GridSpec g(32, 20.0);
    const double k = 2.0 * kPi / g.box_length();
    const auto src = sample_real(g, [&](const Vec3& x) { return std::sin(k * x[0]) * std::cos(2 * k * x[2]); });
    const auto u = poisson_solve(src);
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) err = std::max(err, std::abs(u.values[n] + src.values[n] / (5 * k * k)));
    CHECK(err < 1e-12);

    // Residual oracle through the grid Laplacian.
    auto blob = regularized_delta({1, 2, -1}, 4 * kPi, 1.0, g);
    const auto phi = poisson_solve(blob);
    const auto lap = laplacian(to_complex(phi));
    const double mean = integrate(blob) / std::pow(g.box_length(), 3);
    double num = 0.0, den = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        const double s = blob.values[n] - mean;
        num += std::pow(lap.values[n].real() - s, 2);
        den += s * s;
    }
    CHECK(std::sqrt(num / den) < 1e-8);

    // Point-source tail -L / r.
    const GridSpec big(64, 64.0);
    const auto tail = poisson_solve(regularized_delta({0, 0, 0}, 4 * kPi * 0.5, 1.5, big));
    const double ref = tail(32 + 8, 32, 32) - tail(32 + 16, 32, 32);
    CHECK(ref == doctest::Approx(-0.5 / 8 + 0.5 / 16).epsilon(1e-2));

    // Linearity under source union.
    auto a = regularized_delta({-5, 0, 0}, 1.0, 1.5, big);
    const auto b = regularized_delta({5, 0, 0}, 2.0, 1.5, big);
    const auto ua = poisson_solve(a), ub = poisson_solve(b);
    for (std::size_t n = 0; n < a.values.size(); ++n) a.values[n] += b.values[n];
    const auto uab = poisson_solve(a);
    double lin = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        lin = std::max(lin, std::abs(uab.values[n] - ua.values[n] - ub.values[n]));
        scale = std::max(scale, std::abs(uab.values[n]));
    }
    CHECK(lin < 1e-13 * scale);
}

TEST_CASE("helmholtz green function") {
    CHECK(helmholtz_green(2.0, 0.0) == doctest::Approx(0.5));
    const double k0 = 3.0;
    CHECK(helmholtz_green(0.5 * kPi / k0, k0) == doctest::Approx(0.0).epsilon(1e-15));
    double worst = 0.0;
    const double h = 1e-3;
    for (double r = 0.1; r <= 10.0; r += 0.05) {
        const double gm = helmholtz_green(r - h, k0), g0 = helmholtz_green(r, k0), gp = helmholtz_green(r + h, k0);
        const double radial = (gp - 2 * g0 + gm) / (h * h) + (gp - gm) / (h * r);
        worst = std::max(worst, std::abs(radial + k0 * k0 * g0) / (k0 * k0 / r));
    }
    CHECK(worst < 1e-4);
}
