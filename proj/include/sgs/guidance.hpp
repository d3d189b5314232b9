#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "sgs/evolution.hpp"
#include "sgs/grid.hpp"

namespace sgs {

/// Relative density below which a velocity is refused (|psi|^2 < eps max|psi|^2).
inline constexpr double kNodeFloor = 1e-10;

/// Time-stamped positions and velocities; indexed [particle][sample].
struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Vec3>> positions;
    std::vector<std::vector<Vec3>> velocities;

    std::size_t particle_count() const { return positions.size(); }
};

struct TrajectoryOptions {
    double v_max = 1e6;  ///< sanity cap on |v|; exceeding it raises NonFinite
};

/// psi and its spectral gradient on one snapshot, ready for point queries.
/// Queries use periodic tricubic Lagrange interpolation (4 nodes per axis),
/// which keeps velocities accurate where the phase turns by ~1 rad per cell.
class GuidanceField {
public:
    struct Sample {
        Complex psi;
        std::array<Complex, 3> grad;
    };

    explicit GuidanceField(const ComplexField& psi, Complex phase = 1.0);

    Sample sample(const Vec3& x) const;
    double max_density() const noexcept { return max_density_; }
    Vec3 velocity(const Vec3& x) const;

    const GridSpec& spec() const noexcept { return spec_; }

private:
    GridSpec spec_;
    std::vector<std::array<Complex, 4>> nodes_;  ///< (psi, d/dx, d/dy, d/dz) per node
    double max_density_ = 0.0;
};

/// v = Im(grad psi / psi); throws NodeProximity below the node floor.
Vec3 velocity_from(const GuidanceField::Sample& s, double max_density);

/// De Broglie-Bohm velocity of psi at x (hbar = m = 1).
Vec3 dbb_velocity(const ComplexField& psi, const Vec3& x);

/**
 * Integrates dx/dt = v(psi(t), x) with classical RK4, four steps per snapshot
 * interval. psi(t) is linear between snapshots after removing the global
 * phase rotation between neighbours (the velocity is phase invariant).
 *
 * Throws StepOutOfBand when neighbouring snapshots differ by more than 25% in
 * relative L2 norm after phase alignment.
 */
Trajectory integrate_trajectory(std::span<const StateSnapshot> pilot, const Vec3& x_init,
                                const TrajectoryOptions& opts = {});

/// Final positions of many independent trajectories, integrated in lockstep.
std::vector<Vec3> integrate_ensemble(std::span<const StateSnapshot> pilot, std::span<const Vec3> starts,
                                     const TrajectoryOptions& opts = {});

/// max |v| times the soliton width: small values mean the slow-guidance regime.
double slow_guidance_diagnostic(const Trajectory& trajectory, double soliton_width);

/// Freely evolving wave packet: a Gaussian of position spread `width` per axis
/// with mean momentum `momentum`, or a plane wave when width == 0.
struct FreePacket {
    Vec3 centre{};
    Vec3 momentum{};
    double width = 1.0;

    static FreePacket plane_wave(const Vec3& k) { return {Vec3{}, k, 0.0}; }
    static FreePacket gaussian(const Vec3& centre, double width, const Vec3& momentum = {}) {
        return {centre, momentum, width};
    }

    Complex value(const Vec3& x, double t) const;
    /// grad psi / psi.
    std::array<Complex, 3> log_gradient(const Vec3& x, double t) const;
};

/// Closed-form two-body pilot wave: a sum of products c_j f_j(x1) g_j(x2).
class TwoParticlePilot {
public:
    struct Term {
        Complex coefficient;
        FreePacket first;
        FreePacket second;
    };

    static TwoParticlePilot product(const FreePacket& a, const FreePacket& b);
    /// (a(x1) b(x2) + a(x2) b(x1)) / 2.
    static TwoParticlePilot symmetrized(const FreePacket& a, const FreePacket& b);

    void add_term(Complex c, const FreePacket& first, const FreePacket& second);
    const std::vector<Term>& terms() const noexcept { return terms_; }

    Complex value(const Vec3& x1, const Vec3& x2, double t) const;
    /// (v1, v2) = Im(grad_i Psi / Psi); NodeProximity below the node floor.
    std::pair<Vec3, Vec3> velocities(const Vec3& x1, const Vec3& x2, double t) const;

private:
    std::vector<Term> terms_;
};

/// RK4 in the 6D configuration space with analytic gradients.
Trajectory integrate_two_particle(const TwoParticlePilot& pilot, const Vec3& x1_init, const Vec3& x2_init,
                                  double t_end, double dt, const TrajectoryOptions& opts = {});

}  // namespace sgs
