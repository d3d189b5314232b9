#pragma once

#include <vector>

#include "sgs/grid.hpp"

namespace sgs {

/// Delta-like soliton sources of the effective potential.
struct SourceModel {
    std::vector<Vec3> positions;
    std::vector<double> L_values;  ///< effective lengths, >= 0
    double sigma_s = 1.0;          ///< regularisation width of each delta
    double screening_length = 0.0; ///< extra separation floor when > 0

    /// Throws InvalidArgument on malformed input and SourceOverlap when two
    /// sources are closer than max(4 sigma_s, screening_length).
    void validate(const GridSpec& spec) const;
};

/// sum_i 4 pi L_i delta_sigma(x - x_i).
RealField build_source_field(const SourceModel& model, const GridSpec& spec);

/// phi_G / c^2 solving lap(phi) = build_source_field (zero-mean gauge).
/// Around each source the tail is -L_i / r.
RealField solve_effective_potential(const SourceModel& model, const GridSpec& spec);

struct KinkProfile {
    std::vector<double> offsets;  ///< s, signed distance from the barycentre
    std::vector<double> ratio;    ///< (d phi / d x_axis) / phi at barycentre + s e_axis
};

/// Samples grad(phi)/phi along `axis` (0, 1, 2) through the barycentre of
/// phi^2, at grid-spacing steps out to `extent_widths` rms widths.
KinkProfile kink_profile(const RealField& soliton, int axis, double extent_widths = 3.0);

struct ShellProfile {
    std::vector<double> radius;   ///< mean r of the grid points in each shell
    std::vector<double> phi_avg;  ///< mean phi over the shell
    std::vector<double> phi_fit;
};

struct GravityFitResult {
    std::vector<double> amplitudes;  ///< fitted L per source (phi ~ -L / r)
    std::vector<double> offsets;     ///< fitted constant per source
    std::vector<double> curvatures;  ///< fitted r^2 coefficient per source
    std::vector<ShellProfile> shells;
    double r_min = 0.0;
    double r_max = 0.0;
    double relative_residual = 0.0;  ///< worst source, |avg - fit|_2 / |avg - offset|_2
};

inline constexpr int kShellCount = 32;

/**
 * Fits phi around each source by A/r + C + D r^2 over 32 logarithmically
 * spaced shells in [r_min, r_max]. The constant absorbs the gauge and the
 * harmonic contribution of other sources and periodic images; the r^2 term
 * absorbs the uniform neutralising background of the periodic solve.
 * Shells reaching within 4 sigma_s of another source are dropped.
 *
 * Requires r_min >= 4 sigma_s and r_max <= L/4; throws WindowTooNarrow when
 * fewer than 5 shells survive for some source.
 */
GravityFitResult fit_newtonian(const RealField& phi, const SourceModel& model, double r_min, double r_max);

namespace si {
inline constexpr double G = 6.67430e-11;         ///< m^3 kg^-1 s^-2
inline constexpr double c = 299792458.0;         ///< m s^-1
inline constexpr double electron_mass = 9.1093837015e-31;  ///< kg
}  // namespace si

struct CalibrationResult {
    double mass = 0.0;  ///< kg
    double L = 0.0;     ///< m, G m / (2 c^2)
    double rest_energy_check = 0.0;  ///< (G m^2 / 2L) / (m c^2)
};

CalibrationResult calibrate_L(double mass);

/// -G m_A m_B / |x_A - x_B| for a two-source model.
double interaction_energy(const SourceModel& model, const std::vector<double>& masses,
                          double gravitational_constant = 1.0);

/// -c^2 (m_B A_A + m_A A_B) / |x_A - x_B| from fitted amplitudes A.
double interaction_energy_from_fit(const GravityFitResult& fit, const SourceModel& model,
                                   const std::vector<double>& masses, double c = 1.0);

/**
 * Perturbative transform with u = phi_G / c^2.
 *
 * Returns psi_hom * sum_{j=0..order} u^j, the truncated expansion of
 * psi_hom / (1 - u). Throws PerturbationTooLarge when max|u| >= 0.5.
 */
ComplexField apply_minimal_coupling(const ComplexField& psi_hom, const RealField& phi_G, int order, double c = 1.0);

/// (1 - u) psi_hom: the sourced pilot wave built from its homogeneous part.
ComplexField pilot_from_homogeneous(const ComplexField& psi_hom, const RealField& phi_G, double c = 1.0);

/// |grad u . grad psi|_2 / |(1 - u) lap(psi) / 2|_2, the size of the cross
/// term dropped by the static transform relative to the kinetic term kept.
double neglected_term_ratio(const ComplexField& psi_hom, const RealField& phi_G, double c = 1.0);

}  // namespace sgs
