#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sgs/grid.hpp"
#include "sgs/kernels.hpp"

namespace sgs {

struct EnergyTerms {
    double kinetic = 0.0;    ///< T = 1/2 \int |grad phi|^2
    double potential = 0.0;  ///< V = 1/2 \int phi^2 V_NL[phi^2]
    double total = 0.0;      ///< E = T + V
};

/// Choquard energy in units hbar = m = 1 (K absorbs G m^2).
EnergyTerms energy_functional(const RealField& phi, const KernelSpec& kernel);

struct SolverOptions {
    double tol = 1e-8;          ///< relative eigen-residual |H phi - E_g phi| / |H phi|
    int max_iterations = 20000;
    /// First step size; <= 0 selects h^2.
    double initial_step = 0.0;
    /// Step cap; <= 0 selects 1e3 h^2.
    double max_step = 0.0;
    /// Starting profile; defaults to a Gaussian with rms radius L/12 at the box centre.
    std::optional<RealField> initial_guess;
    bool record_history = false;
};

struct GroundStateResult {
    RealField phi;
    double eigenvalue = 0.0;  ///< E_g
    double kinetic = 0.0;
    double potential = 0.0;
    double total_energy = 0.0;
    double width = 0.0;  ///< rms radius about the barycentre
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> energy_history;  ///< accepted energies, when requested
};

/**
 * Minimises the Choquard energy at fixed L2 norm by a normalised gradient flow.
 *
 * Each step moves along the projected gradient r = H phi - E_g phi,
 * preconditioned by (1 + tau (-lap/2))^{-1}, then renormalises:
 *
 *     phi <- N^{1/2} normalize(phi - tau P_tau r)
 *
 * tau halves when a step would raise the energy (the step is rejected) and
 * grows by 1.1x otherwise, so accepted energies never rise by more than a
 * 1e-12 relative round-off band.
 *
 * Throws MaxIterationsExceeded when the residual stays above opts.tol and
 * WidthTooLarge when the converged rms radius exceeds L/8.
 */
GroundStateResult solve_choquard(const GridSpec& spec, const KernelSpec& kernel, double norm,
                                 const SolverOptions& opts = {});

struct ScalingRow {
    double norm = 0.0;
    double box_length = 0.0;
    double energy = 0.0;
    double eigenvalue = 0.0;
    double width = 0.0;
    double residual = 0.0;
};

struct ScalingSweep {
    std::vector<ScalingRow> rows;
    double energy_exponent = 0.0;  ///< a in E ~ -N^a
    double width_exponent = 0.0;   ///< b in width ~ N^b
};

/// Solves for each norm on a grid whose box is rescaled as L_ref N_ref / N
/// (the exact covariance of the Coulomb problem) and fits the power laws.
ScalingSweep scaling_sweep(const KernelSpec& kernel, std::span<const double> norms, const GridSpec& reference_grid,
                           double reference_norm, const SolverOptions& opts = {});

}  // namespace sgs
