#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "sgs/common.hpp"

namespace sgs {

using Complex = std::complex<double>;

/**
 * Cubic periodic grid covering [-L/2, L/2) on each axis with n nodes per axis.
 *
 * Node (i, j, k) sits at (-L/2 + i h, -L/2 + j h, -L/2 + k h), h = L / n, and
 * is stored at flat index (i n + j) n + k. The box centre (0, 0, 0) is the node
 * (n/2, n/2, n/2).
 */
class GridSpec {
public:
    GridSpec(int n_per_axis, double box_length);

    int n() const noexcept { return n_; }
    double box_length() const noexcept { return box_; }
    double spacing() const noexcept { return box_ / n_; }
    double cell_volume() const noexcept { const double h = spacing(); return h * h * h; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_ * n_; }

    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }
    double coordinate(int i) const noexcept { return -0.5 * box_ + i * spacing(); }
    Vec3 position(int i, int j, int k) const noexcept { return {coordinate(i), coordinate(j), coordinate(k)}; }
    Vec3 position(std::size_t flat) const noexcept;

    /// Angular wavenumber of FFT bin i (Nyquist bin carries -pi/h).
    double wavenumber(int i) const noexcept;

    /// Shortest periodic displacement from b to a.
    Vec3 min_image(const Vec3& a, const Vec3& b) const noexcept;
    /// Maps a point into [-L/2, L/2)^3.
    Vec3 wrap(const Vec3& x) const noexcept;

    /// Throws InvalidArgument unless n >= 8, n even, box > 0.
    void validate() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int n_;
    double box_;
};

template <typename T>
struct Field {
    Field(const GridSpec& s) : spec(s), values(s.size(), T{}) {}
    Field(const GridSpec& s, std::vector<T> v) : spec(s), values(std::move(v)) {
        require(values.size() == spec.size(), "field storage does not match grid size");
    }

    GridSpec spec;
    std::vector<T> values;

    T& operator()(int i, int j, int k) { return values[spec.index(i, j, k)]; }
    const T& operator()(int i, int j, int k) const { return values[spec.index(i, j, k)]; }
};

using ComplexField = Field<Complex>;
using RealField = Field<double>;

/// Samples f at every node.
RealField sample_real(const GridSpec& spec, const std::function<double(const Vec3&)>& f);
ComplexField sample_complex(const GridSpec& spec, const std::function<Complex(const Vec3&)>& f);

ComplexField to_complex(const RealField& f);
RealField real_part(const ComplexField& f);
RealField density(const ComplexField& psi);
RealField density(const RealField& phi);

/// Cartesian partial derivatives by Fourier multiplication with i k.
std::array<ComplexField, 3> spectral_gradient(const ComplexField& f);
ComplexField laplacian(const ComplexField& f);

/// Riemann sum of |f|^2 h^3.
double l2_norm_sq(const ComplexField& f);
double l2_norm_sq(const RealField& f);
double integrate(const RealField& f);
double inner_product(const RealField& a, const RealField& b);
Complex inner_product(const ComplexField& a, const ComplexField& b);

/// Periodic trilinear interpolation.
Complex interpolate(const ComplexField& f, const Vec3& x);
double interpolate(const RealField& f, const Vec3& x);

/// Periodic centre of mass of a nonnegative density (per-axis circular mean).
Vec3 barycentre(const RealField& rho);
/// RMS radius of rho about `centre`, using minimum-image displacements.
double rms_width(const RealField& rho, const Vec3& centre);
inline double rms_width(const RealField& rho) { return rms_width(rho, barycentre(rho)); }

/// Throws NonFinite if any entry is NaN or infinite.
void check_finite(const ComplexField& f, const char* what);
void check_finite(const RealField& f, const char* what);

}  // namespace sgs
