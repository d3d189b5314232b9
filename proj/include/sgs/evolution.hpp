#pragma once

#include <span>
#include <variant>
#include <vector>

#include "sgs/grid.hpp"
#include "sgs/kernels.hpp"

namespace sgs {

/// V(x) = value.
struct UniformPotential {
    double value = 0.0;
};
/// V(x) = gradient . x (minimum-image x, so keep packets away from the seam).
struct LinearPotential {
    Vec3 gradient{};
};
/// V(x) = omega^2 |x - centre|^2 / 2.
struct HarmonicPotential {
    double omega = 1.0;
    Vec3 centre{};
};

using ExternalPotential = std::variant<std::monostate, RealField, UniformPotential, LinearPotential, HarmonicPotential>;

RealField sample_external(const ExternalPotential& potential, const GridSpec& spec);

enum class TimeDirection { forward, backward };

struct EvolutionConfig {
    double dt = 0.0;  ///< step magnitude, 0 < dt < h^2
    double t_end = 0.0;
    int snapshot_stride = 1;
    ExternalPotential external{};
    TimeDirection direction = TimeDirection::forward;

    int step_count() const;
    void validate(const GridSpec& spec) const;
};

struct StateSnapshot {
    double time = 0.0;
    ComplexField psi;
    double norm_sq = 0.0;
    double width = 0.0;
    Vec3 barycentre{};
};

StateSnapshot make_snapshot(double time, ComplexField psi);

/**
 * Strang split-step propagation of
 *
 *     i dpsi/dt = -lap(psi)/2 + (V_L + V_NL[|psi|^2]) psi.
 *
 * Each step applies e^{-i k^2 dt/4}, then e^{-i V dt} with V_NL evaluated once
 * from the current density, then e^{-i k^2 dt/4}; the trailing and leading
 * half steps of consecutive steps are fused. Snapshots are taken at t=0,
 * every `snapshot_stride` steps and at the final step.
 *
 * Throws NormDrift if the norm leaves a 1e-6 relative band and NonFinite on
 * overflow.
 */
std::vector<StateSnapshot> evolve_nls(const ComplexField& psi0, const KernelSpec& kernel, const EvolutionConfig& cfg);

/// evolve_nls with K = 0: the homogeneous linear pilot equation.
std::vector<StateSnapshot> evolve_linear_pilot(const ComplexField& psi0, const EvolutionConfig& cfg);

struct StabilityReport {
    double width_drift = 0.0;       ///< max_t |w(t) - w(0)| / w(0)
    double barycentre_drift = 0.0;  ///< max_t |x(t) - x(0)| / w(0)
    double norm_drift = 0.0;        ///< max_t |N(t) - N(0)| / N(0)
};

StabilityReport stability_report(std::span<const StateSnapshot> snapshots);

}  // namespace sgs
