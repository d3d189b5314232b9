#include "sgs/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/tools/roots.hpp>

namespace sgs {

Complex PacketSuperposition::value(const Vec3& x, double t) const {
    Complex sum = 0.0;
    for (const Term& term : terms) sum += term.coefficient * term.packet.value(x, t);
    return sum;
}

ComplexField PacketSuperposition::sample(const GridSpec& spec, double t) const {
    // Sum over the 27 nearest periodic images keeps the sampled field periodic.
    const double L = spec.box_length();
    return sample_complex(spec, [&](const Vec3& x) {
        Complex sum = 0.0;
        for (int a = -1; a <= 1; ++a)
            for (int b = -1; b <= 1; ++b)
                for (int c = -1; c <= 1; ++c) sum += value(x + L * Vec3{double(a), double(b), double(c)}, t);
        return sum;
    });
}

namespace {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Box-Muller pair; only the cosine branch is used to keep the stream simple.
double normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform(rng);
    const double u2 = uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace

std::vector<Vec3> sample_density(const PacketSuperposition& psi, double t, std::size_t count, std::uint64_t seed) {
    require(!psi.terms.empty(), "sample_density: empty superposition");
    std::vector<double> weights;
    double total = 0.0;
    for (const auto& term : psi.terms) {
        require(term.packet.width > 0.0, "sample_density: plane-wave terms are not normalisable");
        weights.push_back(std::norm(term.coefficient));
        total += weights.back();
    }
    require(total > 0.0, "sample_density: all coefficients vanish");
    const double n = static_cast<double>(psi.terms.size());

    std::mt19937_64 rng(seed);
    std::vector<Vec3> out;
    out.reserve(count);
    while (out.size() < count) {
        double pick = uniform(rng) * total;
        std::size_t j = 0;
        while (j + 1 < weights.size() && pick >= weights[j]) pick -= weights[j++];
        const FreePacket& f = psi.terms[j].packet;
        const double s2 = f.width * f.width;
        const double spread = f.width * std::sqrt(1.0 + std::pow(t / (2.0 * s2), 2));
        const Vec3 mean = f.centre + t * f.momentum;
        Vec3 x;
        for (int a = 0; a < 3; ++a) x[a] = mean[a] + spread * normal(rng);

        double envelope = 0.0;
        for (const auto& term : psi.terms) envelope += std::norm(term.coefficient * term.packet.value(x, t));
        const double target = std::norm(psi.value(x, t));
        if (uniform(rng) * n * envelope < target) out.push_back(x);
    }
    return out;
}

namespace {

/// CDF on [0, L) of the trigonometric interpolant of samples p_i at s_i = i h.
class SpectralCdf {
public:
    SpectralCdf(const std::vector<double>& p, double L) : n_(static_cast<int>(p.size())), L_(L) {
        coef_.assign(n_ / 2 + 1, Complex{});
        for (int m = 0; m <= n_ / 2; ++m) {
            Complex sum = 0.0;
            for (int i = 0; i < n_; ++i) sum += p[i] * std::polar(1.0, -2.0 * kPi * m * i / n_);
            coef_[m] = sum / static_cast<double>(n_);
        }
        total_ = raw(L_);
    }

    double operator()(double s) const { return raw(s) / total_; }

private:
    /// Integral of a_0 + sum_m 2 Re(c_m e^{i k_m s}) (Nyquist term counted once) from 0 to s.
    double raw(double s) const {
        double out = coef_[0].real() * s;
        for (int m = 1; m <= n_ / 2; ++m) {
            const double k = 2.0 * kPi * m / L_;
            const double weight = (m == n_ / 2) ? 1.0 : 2.0;
            out += weight * (coef_[m] * (std::polar(1.0, k * s) - 1.0) / Complex(0.0, k)).real();
        }
        return out;
    }

    int n_;
    double L_;
    std::vector<Complex> coef_;
    double total_ = 1.0;
};

}  // namespace

MarginalTest chi_square_marginal(std::span<const Vec3> positions, const ComplexField& psi, int axis, int bins) {
    require(axis >= 0 && axis < 3, "chi_square_marginal: axis must be 0, 1 or 2");
    require(bins >= 2, "chi_square_marginal: need at least two bins");
    require(!positions.empty(), "chi_square_marginal: no positions");
    const GridSpec& spec = psi.spec;
    const int n = spec.n();
    const double L = spec.box_length();
    const double x0 = spec.coordinate(0);

    std::vector<double> marginal(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const int idx[3] = {i, j, k};
                marginal[idx[axis]] += std::norm(psi(i, j, k));
            }
    const SpectralCdf cdf(marginal, L);

    // Bracket each quantile on a fine table, then refine.
    const int table = 32 * n;
    std::vector<double> grid_cdf(table + 1);
    for (int t = 0; t <= table; ++t) grid_cdf[t] = cdf(L * t / table);

    MarginalTest out;
    std::vector<double> edges_s(bins + 1, 0.0);
    edges_s[bins] = L;
    for (int b = 1; b < bins; ++b) {
        const double q = static_cast<double>(b) / bins;
        int t = static_cast<int>(std::upper_bound(grid_cdf.begin(), grid_cdf.end(), q) - grid_cdf.begin());
        t = std::clamp(t, 1, table);
        const auto f = [&](double s) { return cdf(s) - q; };
        std::uintmax_t iters = 100;
        const auto [lo, hi] = boost::math::tools::bisect(f, L * (t - 1) / table, L * t / table,
                                                         boost::math::tools::eps_tolerance<double>(50), iters);
        edges_s[b] = 0.5 * (lo + hi);
    }
    for (double e : edges_s) out.edges.push_back(e + x0);

    out.observed.assign(bins, 0.0);
    for (const Vec3& x : positions) {
        double s = std::fmod(x[axis] - x0, L);
        if (s < 0.0) s += L;
        const int b = static_cast<int>(std::upper_bound(edges_s.begin() + 1, edges_s.end() - 1, s) - edges_s.begin()) - 1;
        out.observed[b] += 1.0;
    }
    const double expected = static_cast<double>(positions.size()) / bins;
    out.expected.assign(bins, expected);
    for (int b = 0; b < bins; ++b) out.chi_square += std::pow(out.observed[b] - expected, 2) / expected;
    out.dof = bins - 1;
    const boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi_square));
    return out;
}

}  // namespace sgs
