#pragma once

#include <vector>

#include "sgs/common.hpp"
#include "sgs/guidance.hpp"

namespace sgs {

/// Forcing of the bath. f0 = 0 is accepted as the non-oscillating limit k0 = 0.
struct ForcingSpec {
    double f0 = 1.0;  ///< forcing frequency
    double v = 1.0;   ///< wave speed

    double lambda0() const { return v / f0; }
    double k0() const { return 2.0 * kPi * f0 / v; }
    double faraday_frequency() const { return 0.5 * f0; }
    double faraday_wavelength() const { return v / faraday_frequency(); }

    void validate() const;
};

struct DropletPair {
    double M_A = 1.0;
    double M_B = 1.0;
    double L_A = 1.0;
    double L_B = 1.0;

    void validate() const;
    double reduced_mass() const { return M_A * M_B / (M_A + M_B); }
};

struct PointSource {
    Vec3 position{};
    double L = 0.0;
};

/// -v^2 sum_i L_i cos(k0 r_i) / r_i.
double pseudo_potential(const Vec3& x, const std::vector<PointSource>& sources, const ForcingSpec& spec);

/// U(d) = -v^2 (M_B L_A + M_A L_B) cos(k0 d) / d.
double pair_interaction(double d, const DropletPair& pair, const ForcingSpec& spec);
/// Radial force -dU/dd; negative values pull the pair together.
double pair_force(double d, const DropletPair& pair, const ForcingSpec& spec);

struct Zone {
    double r_lo = 0.0;
    double r_hi = 0.0;
    bool attractive = true;
};

/// Radii in (0, r_max) where the radial force changes sign, i.e. the roots
/// of x sin x + cos x with x = k0 r, each bracketed between neighbouring
/// extrema and refined to machine precision.
std::vector<double> force_roots(const ForcingSpec& spec, double r_max);

/// Alternating attractive / repulsive intervals covering (0, r_max).
/// Requires r_max > lambda_F unless k0 = 0.
std::vector<Zone> classify_zones(const ForcingSpec& spec, double r_max);

struct OrbitResult {
    std::vector<double> equilibrium_radii;  ///< minima of U
    std::vector<int> n_index;               ///< nearest integer of 2 d / lambda_F
    std::vector<bool> stable;               ///< U'' > 0
    std::vector<double> residuals;          ///< d_n / lambda_F - (n/2 - eps)
    double epsilon = 0.0;
    double epsilon_ci = 0.0;  ///< 95% half-width
    double max_residual = 0.0;
};

/// Minima of U in (0, r_max) and a single global eps fit of d_n = (n/2 - eps) lambda_F.
/// Throws NoEquilibria when k0 = 0 or r_max < 5 lambda_F.
OrbitResult orbit_equilibria(const DropletPair& pair, const ForcingSpec& spec, double r_max);

/// Relative speed of a circular orbit of radius d, or 0 where the force repels.
double circular_speed(double d, const DropletPair& pair, const ForcingSpec& spec);

struct TwoBodyState {
    Vec3 x_A{}, x_B{};
    Vec3 v_A{}, v_B{};
};

struct OrbitRun {
    Trajectory trajectory;        ///< sampled every `record_stride` steps
    double energy_drift = 0.0;    ///< max |E - E0| / (|K0| + |U0|)
    double angular_momentum_drift = 0.0;  ///< max |L - L0| / |L0| (absolute when L0 = 0)
    double min_separation = 0.0;
    double max_separation = 0.0;
    bool separation_nondecreasing = true;  ///< checked at every step
};

struct OrbitOptions {
    int record_stride = 1;
    /// Collision threshold; <= 0 selects 1e-3 lambda_F (1e-3 of the initial separation when k0 = 0).
    double collision_radius = 0.0;
};

/// Velocity Verlet integration of the two-body problem with the central force
/// from pair_interaction. Throws CollisionDetected below the collision radius.
OrbitRun simulate_orbit(const DropletPair& pair, const ForcingSpec& spec, const TwoBodyState& init, double t_end,
                        double dt, const OrbitOptions& opts = {});

enum class Encounter { captured, scattered, undetermined };

const char* to_string(Encounter e);

struct EncounterResult {
    double impact_parameter = 0.0;
    Encounter outcome = Encounter::undetermined;
    double energy_drift = 0.0;
    double min_separation = 0.0;
    double max_separation = 0.0;
    double revolutions = 0.0;  ///< t_end / (2 pi b / speed)
};

/**
 * Starts the pair at separation b with relative velocity `speed`
 * perpendicular to the line of centres, centre of mass at rest, and runs
 * for `revolutions` nominal periods 2 pi b / speed.
 *
 * captured:  separation stays within [b - lambda_F/2, b + lambda_F/2].
 * scattered: separation never decreases and ends beyond b + lambda_F.
 */
EncounterResult classify_encounter(const DropletPair& pair, const ForcingSpec& spec, double b, double speed,
                                   double revolutions, double dt);

}  // namespace sgs
