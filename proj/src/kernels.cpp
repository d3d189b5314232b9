#include "sgs/kernels.hpp"

#include <cmath>
#include <string>

#include "sgs/fft.hpp"

namespace sgs {

const char* to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::coulomb: return "coulomb";
        case KernelKind::yukawa: return "yukawa";
        case KernelKind::helmholtz: return "helmholtz";
    }
    return "?";
}

const char* to_string(Boundary boundary) { return boundary == Boundary::periodic ? "periodic" : "isolated"; }

void KernelSpec::validate() const {
    require(std::isfinite(coupling) && coupling >= 0.0, "kernel: coupling K must be >= 0");
    switch (kind) {
        case KernelKind::coulomb: break;
        case KernelKind::yukawa:
            require(std::isfinite(screening_length) && screening_length > 0.0,
                    "kernel: yukawa requires screening_length > 0");
            break;
        case KernelKind::helmholtz:
            require(std::isfinite(wavenumber) && wavenumber >= 0.0, "kernel: helmholtz requires wavenumber >= 0");
            break;
    }
}

double kernel_multiplier(const KernelSpec& kernel, double k, double box_length) {
    const double k2 = k * k;
    if (kernel.boundary == Boundary::periodic) {
        if (kernel.kind == KernelKind::coulomb) return k2 == 0.0 ? 0.0 : 4.0 * kPi / k2;
        const double mu = 1.0 / kernel.screening_length;
        return 4.0 * kPi / (k2 + mu * mu);
    }
    // Kernel truncated at R = L/2: 4 pi \int_0^R r G(r) sin(kr)/k dr.
    const double R = 0.5 * box_length;
    if (kernel.kind == KernelKind::coulomb) {
        if (k == 0.0) return 2.0 * kPi * R * R;
        return 4.0 * kPi * (1.0 - std::cos(k * R)) / k2;
    }
    const double mu = 1.0 / kernel.screening_length;
    const double damp = std::exp(-mu * R);
    if (k == 0.0) return 4.0 * kPi / (mu * mu) * (1.0 - damp * (1.0 + mu * R));
    return 4.0 * kPi / (k2 + mu * mu) * (1.0 - damp * (std::cos(k * R) + mu / k * std::sin(k * R)));
}

RealField convolve_potential(const RealField& density, const KernelSpec& kernel) {
    kernel.validate();
    require(kernel.kind != KernelKind::helmholtz,
            "convolve_potential: helmholtz kernels are evaluated in closed form, not on the grid");
    const GridSpec& s = density.spec;
    s.validate();
    for (double v : density.values)
        if (v < -1e-12) fail(ErrorCode::InvalidArgument, "convolve_potential: negative density " + std::to_string(v));

    RealField out(s);
    if (kernel.coupling == 0.0) return out;

    const int n = s.n();
    std::vector<Complex> hat(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) hat[i] = density.values[i];
    fft::forward(hat, n);
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                const double kk = std::sqrt(kx * kx + ky * ky + kz * kz);
                hat[s.index(i, j, k)] *= -kernel.coupling * kernel_multiplier(kernel, kk, s.box_length());
            }
        }
    }
    fft::backward(hat, n);
    for (std::size_t i = 0; i < s.size(); ++i) out.values[i] = hat[i].real();
    return out;
}

RealField poisson_solve(const RealField& source) {
    const GridSpec& s = source.spec;
    s.validate();
    const int n = s.n();
    std::vector<Complex> hat(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) hat[i] = source.values[i];
    fft::forward(hat, n);
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                const double k2 = kx * kx + ky * ky + kz * kz;
                hat[s.index(i, j, k)] *= (k2 == 0.0) ? 0.0 : -1.0 / k2;
            }
        }
    }
    fft::backward(hat, n);
    RealField out(s);
    for (std::size_t i = 0; i < s.size(); ++i) out.values[i] = hat[i].real();
    return out;
}

double helmholtz_green(double r, double k0) {
    require(std::isfinite(r) && r > 0.0, "helmholtz_green: r must be > 0");
    require(std::isfinite(k0) && k0 >= 0.0, "helmholtz_green: k0 must be >= 0");
    return std::cos(k0 * r) / r;
}

RealField regularized_delta(const Vec3& center, double weight, double width, const GridSpec& spec) {
    spec.validate();
    require(std::isfinite(width) && width >= 1.5 * spec.spacing(),
            "regularized_delta: width must be >= 1.5 * spacing (" + std::to_string(1.5 * spec.spacing()) + ")");
    RealField out(spec);
    if (weight == 0.0) return out;
    const double norm = weight / std::pow(2.0 * kPi * width * width, 1.5);
    const double inv2s2 = 1.0 / (2.0 * width * width);
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
        const Vec3 d = spec.min_image(spec.position(idx), center);
        out.values[idx] = norm * std::exp(-dot(d, d) * inv2s2);
    }
    return out;
}

}  // namespace sgs
