#include "sgs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgs/fft.hpp"

namespace sgs {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
        case ErrorCode::WidthTooLarge: return "WidthTooLarge";
        case ErrorCode::NormDrift: return "NormDrift";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NodeProximity: return "NodeProximity";
        case ErrorCode::StepOutOfBand: return "StepOutOfBand";
        case ErrorCode::SourceOverlap: return "SourceOverlap";
        case ErrorCode::WindowTooNarrow: return "WindowTooNarrow";
        case ErrorCode::PerturbationTooLarge: return "PerturbationTooLarge";
        case ErrorCode::NoEquilibria: return "NoEquilibria";
        case ErrorCode::CollisionDetected: return "CollisionDetected";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

GridSpec::GridSpec(int n_per_axis, double box_length) : n_(n_per_axis), box_(box_length) { validate(); }

void GridSpec::validate() const {
    require(n_ >= 8, "grid: n_per_axis must be >= 8, got " + std::to_string(n_));
    require(n_ % 2 == 0, "grid: n_per_axis must be even, got " + std::to_string(n_));
    require(std::isfinite(box_) && box_ > 0.0, "grid: box_length must be positive");
}

Vec3 GridSpec::position(std::size_t flat) const noexcept {
    const std::size_t n = static_cast<std::size_t>(n_);
    const int k = static_cast<int>(flat % n);
    const int j = static_cast<int>((flat / n) % n);
    const int i = static_cast<int>(flat / (n * n));
    return position(i, j, k);
}

double GridSpec::wavenumber(int i) const noexcept {
    const int m = (i < n_ / 2) ? i : i - n_;
    return 2.0 * kPi * m / box_;
}

Vec3 GridSpec::min_image(const Vec3& a, const Vec3& b) const noexcept {
    Vec3 d = a - b;
    for (double& c : d) c -= box_ * std::round(c / box_);
    return d;
}

Vec3 GridSpec::wrap(const Vec3& x) const noexcept {
    Vec3 w = x;
    for (double& c : w) {
        c -= box_ * std::floor((c + 0.5 * box_) / box_);
        if (c >= 0.5 * box_) c -= box_;
    }
    return w;
}

RealField sample_real(const GridSpec& spec, const std::function<double(const Vec3&)>& f) {
    RealField out(spec);
    for (std::size_t idx = 0; idx < spec.size(); ++idx) out.values[idx] = f(spec.position(idx));
    return out;
}

ComplexField sample_complex(const GridSpec& spec, const std::function<Complex(const Vec3&)>& f) {
    ComplexField out(spec);
    for (std::size_t idx = 0; idx < spec.size(); ++idx) out.values[idx] = f(spec.position(idx));
    return out;
}

ComplexField to_complex(const RealField& f) {
    ComplexField out(f.spec);
    std::transform(f.values.begin(), f.values.end(), out.values.begin(), [](double v) { return Complex(v, 0.0); });
    return out;
}

RealField real_part(const ComplexField& f) {
    RealField out(f.spec);
    std::transform(f.values.begin(), f.values.end(), out.values.begin(), [](Complex v) { return v.real(); });
    return out;
}

RealField density(const ComplexField& psi) {
    RealField out(psi.spec);
    std::transform(psi.values.begin(), psi.values.end(), out.values.begin(), [](Complex v) { return std::norm(v); });
    return out;
}

RealField density(const RealField& phi) {
    RealField out(phi.spec);
    std::transform(phi.values.begin(), phi.values.end(), out.values.begin(), [](double v) { return v * v; });
    return out;
}

std::array<ComplexField, 3> spectral_gradient(const ComplexField& f) {
    f.spec.validate();
    const GridSpec& s = f.spec;
    const int n = s.n();
    std::vector<Complex> hat = f.values;
    fft::forward(hat, n);

    std::array<ComplexField, 3> grad{ComplexField(s), ComplexField(s), ComplexField(s)};
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                const std::size_t idx = s.index(i, j, k);
                const Complex v = hat[idx];
                grad[0].values[idx] = Complex(0.0, kx) * v;
                grad[1].values[idx] = Complex(0.0, ky) * v;
                grad[2].values[idx] = Complex(0.0, kz) * v;
            }
        }
    }
    for (auto& g : grad) fft::backward(g.values, n);
    return grad;
}

ComplexField laplacian(const ComplexField& f) {
    f.spec.validate();
    const GridSpec& s = f.spec;
    const int n = s.n();
    ComplexField out = f;
    fft::forward(out.values, n);
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                out.values[s.index(i, j, k)] *= -(kx * kx + ky * ky + kz * kz);
            }
        }
    }
    fft::backward(out.values, n);
    return out;
}

double l2_norm_sq(const ComplexField& f) {
    double sum = 0.0;
    for (const Complex& v : f.values) sum += std::norm(v);
    return sum * f.spec.cell_volume();
}

double l2_norm_sq(const RealField& f) {
    double sum = 0.0;
    for (double v : f.values) sum += v * v;
    return sum * f.spec.cell_volume();
}

double integrate(const RealField& f) {
    double sum = 0.0;
    for (double v : f.values) sum += v;
    return sum * f.spec.cell_volume();
}

double inner_product(const RealField& a, const RealField& b) {
    require(a.spec == b.spec, "inner_product: grid mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) sum += a.values[i] * b.values[i];
    return sum * a.spec.cell_volume();
}

Complex inner_product(const ComplexField& a, const ComplexField& b) {
    require(a.spec == b.spec, "inner_product: grid mismatch");
    Complex sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) sum += std::conj(a.values[i]) * b.values[i];
    return sum * a.spec.cell_volume();
}

namespace {

struct Stencil {
    std::array<int, 3> lo;
    std::array<int, 3> hi;
    std::array<double, 3> t;
};

Stencil locate(const GridSpec& s, const Vec3& x) {
    Stencil st{};
    const int n = s.n();
    for (int a = 0; a < 3; ++a) {
        const double u = (x[a] + 0.5 * s.box_length()) / s.spacing();
        const double fl = std::floor(u);
        double t = u - fl;
        long long i0 = static_cast<long long>(fl) % n;
        if (i0 < 0) i0 += n;
        st.lo[a] = static_cast<int>(i0);
        st.hi[a] = static_cast<int>((i0 + 1) % n);
        st.t[a] = t;
    }
    return st;
}

template <typename T>
T trilinear(const Field<T>& f, const Vec3& x) {
    const Stencil st = locate(f.spec, x);
    const auto& [i0, j0, k0] = st.lo;
    const auto& [i1, j1, k1] = st.hi;
    const auto& [tx, ty, tz] = st.t;
    const T c00 = f(i0, j0, k0) * (1 - tz) + f(i0, j0, k1) * tz;
    const T c01 = f(i0, j1, k0) * (1 - tz) + f(i0, j1, k1) * tz;
    const T c10 = f(i1, j0, k0) * (1 - tz) + f(i1, j0, k1) * tz;
    const T c11 = f(i1, j1, k0) * (1 - tz) + f(i1, j1, k1) * tz;
    const T c0 = c00 * (1 - ty) + c01 * ty;
    const T c1 = c10 * (1 - ty) + c11 * ty;
    return c0 * (1 - tx) + c1 * tx;
}

}  // namespace

Complex interpolate(const ComplexField& f, const Vec3& x) { return trilinear(f, x); }
double interpolate(const RealField& f, const Vec3& x) { return trilinear(f, x); }

Vec3 barycentre(const RealField& rho) {
    const GridSpec& s = rho.spec;
    const int n = s.n();
    // Circular mean per axis: robust to the packet straddling the periodic seam.
    std::array<Complex, 3> acc{};
    std::vector<Complex> phase(n);
    for (int i = 0; i < n; ++i) phase[i] = std::polar(1.0, 2.0 * kPi * i / n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const double w = rho(i, j, k);
                acc[0] += w * phase[i];
                acc[1] += w * phase[j];
                acc[2] += w * phase[k];
            }
    Vec3 c{};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(acc[a]) == 0.0) {
            c[a] = 0.0;
            continue;
        }
        const double angle = std::arg(acc[a]);  // in (-pi, pi]
        c[a] = s.coordinate(0) + angle / (2.0 * kPi) * s.box_length();
    }
    return s.wrap(c);
}

double rms_width(const RealField& rho, const Vec3& centre) {
    const GridSpec& s = rho.spec;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
        const double w = rho.values[idx];
        if (w == 0.0) continue;
        const Vec3 d = s.min_image(s.position(idx), centre);
        num += w * dot(d, d);
        den += w;
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

void check_finite(const ComplexField& f, const char* what) {
    for (const Complex& v : f.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) fail(ErrorCode::NonFinite, std::string(what) + " contains NaN/Inf");
}

void check_finite(const RealField& f, const char* what) {
    for (double v : f.values)
        if (!std::isfinite(v)) fail(ErrorCode::NonFinite, std::string(what) + " contains NaN/Inf");
}

}  // namespace sgs
