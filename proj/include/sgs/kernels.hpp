#pragma once

#include "sgs/grid.hpp"

namespace sgs {

enum class KernelKind { coulomb, yukawa, helmholtz };

/// How the long-range kernel is treated in the periodic box.
///  periodic: plain Fourier multiplier; the Coulomb k=0 mode is zeroed
///            (uniform neutralising background).
///  isolated: kernel truncated at radius L/2 before transforming, which
///            reproduces the free-space convolution for densities confined
///            to a ball of radius L/4 around any point.
enum class Boundary { periodic, isolated };

struct KernelSpec {
    KernelKind kind = KernelKind::coulomb;
    double coupling = 1.0;          ///< K >= 0
    double screening_length = 0.0;  ///< lambda > 0, yukawa only
    double wavenumber = 0.0;        ///< k0 >= 0, helmholtz only
    Boundary boundary = Boundary::periodic;

    static KernelSpec coulomb(double K, Boundary b = Boundary::periodic) {
        return {KernelKind::coulomb, K, 0.0, 0.0, b};
    }
    static KernelSpec yukawa(double K, double lambda, Boundary b = Boundary::periodic) {
        return {KernelKind::yukawa, K, lambda, 0.0, b};
    }
    static KernelSpec helmholtz(double K, double k0) { return {KernelKind::helmholtz, K, 0.0, k0, Boundary::periodic}; }

    void validate() const;
};

const char* to_string(KernelKind kind);
const char* to_string(Boundary boundary);

/// Fourier transform of the (possibly truncated) kernel at |k|, excluding -K.
double kernel_multiplier(const KernelSpec& kernel, double k, double box_length);

/// V(x) = -K \int rho(x') G(x - x') d^3x' for G = 1/r or e^{-r/lambda}/r.
RealField convolve_potential(const RealField& density, const KernelSpec& kernel);

/// Solves lap(phi) = source in the zero-mean gauge (k=0 mode discarded).
RealField poisson_solve(const RealField& source);

/// cos(k0 r) / r, the outgoing-standing Green function of (k0^2 + lap).
double helmholtz_green(double r, double k0);

/// Normalised Gaussian blob of standard deviation `width` carrying `weight`.
/// Requires width >= 1.5 h.
RealField regularized_delta(const Vec3& center, double weight, double width, const GridSpec& spec);

}  // namespace sgs
