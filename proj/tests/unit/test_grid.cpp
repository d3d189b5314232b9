#include <doctest.h>

#include <random>

#include "sgs/grid.hpp"

using namespace sgs;

namespace {

double gaussian(const Vec3& x, double w) { return std::exp(-dot(x, x) / (2.0 * w * w)); }

// Eighth-order central difference weights for the first and second derivative.
constexpr double kD1[5] = {0.0, 4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
constexpr double kD2[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};

double shifted(const RealField& f, int i, int j, int k, int axis, int s) {
    (axis == 0 ? i : axis == 1 ? j : k) += s;
    return f(i, j, k);
}

}  // namespace

TEST_CASE("grid geometry") {
    const GridSpec g(16, 8.0);
    CHECK(g.spacing() == 0.5);
    CHECK(g.position(8, 8, 8) == Vec3{0.0, 0.0, 0.0});
    CHECK(g.position(g.index(3, 5, 7)) == g.position(3, 5, 7));
    const Vec3 d = g.min_image({3.9, 0.0, 0.0}, {-3.9, 0.0, 0.0});
    CHECK(d[0] == doctest::Approx(-0.2));
    const Vec3 w = g.wrap({4.5, -4.5, 12.25});
    CHECK(w[0] == doctest::Approx(-3.5));
    CHECK(w[1] == doctest::Approx(3.5));
    CHECK(w[2] == doctest::Approx(-3.75));
    CHECK(g.wavenumber(8) == doctest::Approx(-kPi / 0.5));

    CHECK_THROWS_AS(GridSpec(7, 1.0), Error);
    CHECK_THROWS_AS(GridSpec(4, 1.0), Error);
    CHECK_THROWS_AS(GridSpec(16, 0.0), Error);
}

TEST_CASE("spectral gradient of a grid plane wave is exact") {
    const GridSpec g(16, 10.0);
    const double dk = 2.0 * kPi / g.box_length();
    const Vec3 k{2 * dk, -1 * dk, 3 * dk};
    const auto psi = sample_complex(g, [&](const Vec3& x) { return std::polar(1.0, dot(k, x)); });
    const auto grad = spectral_gradient(psi);
    const auto lap = laplacian(psi);
    double err = 0.0;
    for (std::size_t n = 0; n < g.size(); ++n) {
        for (int a = 0; a < 3; ++a) err = std::max(err, std::abs(grad[a].values[n] - Complex(0, k[a]) * psi.values[n]));
        err = std::max(err, std::abs(lap.values[n] + dot(k, k) * psi.values[n]));
    }
    CHECK(err < 1e-12);
}

TEST_CASE("derivatives of a constant vanish") {
    const GridSpec g(8, 3.0);
    const ComplexField c(g, std::vector<Complex>(g.size(), Complex(2.5, -1.0)));
    const auto grad = spectral_gradient(c);
    const auto lap = laplacian(c);
    for (std::size_t n = 0; n < g.size(); ++n) {
        CHECK(std::abs(grad[0].values[n]) < 1e-14);
        CHECK(std::abs(grad[2].values[n]) < 1e-14);
        CHECK(std::abs(lap.values[n]) < 1e-14);
    }
}

TEST_CASE("spectral derivatives of a Gaussian agree with finite differences") {
    // Full width at half maximum 0.2 L, so the tails are periodic to ~1e-8.
    const GridSpec g(128, 10.0);
    const double w = 0.2 * g.box_length() / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const auto f = sample_real(g, [&](const Vec3& x) { return gaussian(x, w); });
    const auto grad = spectral_gradient(to_complex(f));
    const auto lap = laplacian(to_complex(f));
    double num = 0.0, den = 0.0, lnum = 0.0, lden = 0.0;
    const double h = g.spacing();
    for (int i = 40; i < 88; ++i) {
        for (int j = 40; j < 88; j += 7) {
            const int k = 64;
            double fd = 0.0, fdl = 0.0;
            for (int s = 1; s <= 4; ++s) fd += kD1[s] * (shifted(f, i, j, k, 0, s) - shifted(f, i, j, k, 0, -s)) / h;
            num = std::max(num, std::abs(grad[0](i, j, k).real() - fd));
            den = std::max(den, std::abs(fd));
            for (int a = 0; a < 3; ++a) {
                fdl += kD2[0] * f(i, j, k) / (h * h);
                for (int s = 1; s <= 4; ++s)
                    fdl += kD2[s] * (shifted(f, i, j, k, a, s) + shifted(f, i, j, k, a, -s)) / (h * h);
            }
            lnum = std::max(lnum, std::abs(lap(i, j, k).real() - fdl));
            lden = std::max(lden, std::abs(fdl));
        }
    }
    CHECK(num / den < 1e-6);
    CHECK(lnum / lden < 1e-6);
}

TEST_CASE("norms and inner products") {
    const GridSpec g(16, 6.0);
    auto f = sample_complex(g, [](const Vec3& x) { return Complex(std::exp(-dot(x, x)), 0.0); });
    const double raw = l2_norm_sq(f);
    for (auto& v : f.values) v /= std::sqrt(raw);
    CHECK(l2_norm_sq(f) == doctest::Approx(1.0).epsilon(1e-12));

    auto twice = f;
    for (auto& v : twice.values) v *= 2.0;
    CHECK(l2_norm_sq(twice) == doctest::Approx(4.0).epsilon(1e-12));

    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    ComplexField r(g);
    for (auto& v : r.values) v = Complex(normal(rng), normal(rng));
    long double direct = 0.0L;
    for (const auto& v : r.values) direct += static_cast<long double>(std::norm(v));
    direct *= g.cell_volume();
    CHECK(std::abs(l2_norm_sq(r) - static_cast<double>(direct)) / static_cast<double>(direct) < 1e-12);

    // Antilinear in the first argument.
    auto ir = r;
    for (auto& v : ir.values) v *= Complex(0.0, 1.0);
    const Complex ip = inner_product(ir, r);
    CHECK(std::abs(ip - Complex(0.0, -l2_norm_sq(r))) < 1e-9 * l2_norm_sq(r));
}

TEST_CASE("interpolation") {
    const GridSpec g(16, 8.0);
    const auto lin = sample_real(g, [](const Vec3& x) { return 0.3 * x[0] - 0.2 * x[1] + 0.1 * x[2] + 1.0; });
    CHECK(interpolate(lin, g.position(3, 4, 5)) == doctest::Approx(lin(3, 4, 5)));
    // Cell centre away from the periodic seam.
    const Vec3 c = g.position(5, 6, 7) + Vec3{0.25, 0.25, 0.25};
    CHECK(interpolate(lin, c) == doctest::Approx(0.3 * c[0] - 0.2 * c[1] + 0.1 * c[2] + 1.0).epsilon(1e-13));

    const double w = 1.0;
    const GridSpec fine(128, 6.4);  // spacing 0.05 w
    const auto gauss = sample_real(fine, [&](const Vec3& x) { return gaussian(x, w); });
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        const Vec3 x{u(rng), u(rng), u(rng)};
        worst = std::max(worst, std::abs(interpolate(gauss, x) - gaussian(x, w)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("barycentre and width of a Gaussian density") {
    const GridSpec g(64, 24.0);
    const Vec3 c{1.0, -0.5, 2.0};
    const double s = 1.3;
    const auto rho = sample_real(g, [&](const Vec3& x) { return gaussian(x - c, s); });
    const Vec3 b = barycentre(rho);
    for (int a = 0; a < 3; ++a) CHECK(b[a] == doctest::Approx(c[a]).epsilon(1e-9));
    CHECK(rms_width(rho) == doctest::Approx(std::sqrt(3.0) * s).epsilon(1e-9));
}

TEST_CASE("check_finite rejects NaN") {
    const GridSpec g(8, 1.0);
    RealField f(g);
    CHECK_NOTHROW(check_finite(f, "f"));
    f.values[5] = std::nan("");
    CHECK_THROWS_AS(check_finite(f, "f"), Error);
}
