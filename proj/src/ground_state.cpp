#include "sgs/ground_state.hpp"

#include <cmath>
#include <string>

#include "sgs/fft.hpp"

namespace sgs {
namespace {

struct State {
    RealField phi;
    RealField potential;  // V_NL[phi^2]
    RealField h_phi;      // H phi
    EnergyTerms energy;
    double eigenvalue = 0.0;
    double residual = 0.0;
};

RealField minus_half_laplacian(const RealField& phi) {
    ComplexField lap = laplacian(to_complex(phi));
    RealField out(phi.spec);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = -0.5 * lap.values[i].real();
    return out;
}

State evaluate(RealField phi, const KernelSpec& kernel) {
    const GridSpec spec = phi.spec;
    State st{std::move(phi), RealField(spec), RealField(spec), {}, 0.0, 0.0};
    st.potential = convolve_potential(density(st.phi), kernel);
    const RealField kin = minus_half_laplacian(st.phi);
    const std::size_t m = st.phi.values.size();
    double t_sum = 0.0, v_sum = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double p = st.phi.values[i];
        st.h_phi.values[i] = kin.values[i] + st.potential.values[i] * p;
        t_sum += p * kin.values[i];
        v_sum += p * p * st.potential.values[i];
        nn += p * p;
    }
    const double dv = st.phi.spec.cell_volume();
    st.energy.kinetic = t_sum * dv;
    st.energy.potential = 0.5 * v_sum * dv;
    st.energy.total = st.energy.kinetic + st.energy.potential;
    st.eigenvalue = (t_sum + v_sum) / nn;

    double r2 = 0.0, h2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = st.h_phi.values[i] - st.eigenvalue * st.phi.values[i];
        r2 += r * r;
        h2 += st.h_phi.values[i] * st.h_phi.values[i];
    }
    st.residual = h2 > 0.0 ? std::sqrt(r2 / h2) : 0.0;
    return st;
}

void normalize_to(RealField& phi, double norm) {
    const double current = l2_norm_sq(phi);
    require(current > 0.0, "solve_choquard: profile vanished");
    const double scale = std::sqrt(norm / current);
    for (double& v : phi.values) v *= scale;
}

RealField initial_profile(const GridSpec& spec, double norm) {
    // Density e^{-r^2/a^2} has rms radius a sqrt(3/2); target L/12.
    const double a = spec.box_length() / 12.0 / std::sqrt(1.5);
    RealField phi = sample_real(spec, [a](const Vec3& x) { return std::exp(-0.5 * dot(x, x) / (a * a)); });
    normalize_to(phi, norm);
    return phi;
}

// phi - tau (1 + tau k^2/2)^{-1} r, computed in Fourier space.
RealField preconditioned_step(const State& st, double tau) {
    const GridSpec& s = st.phi.spec;
    const int n = s.n();
    std::vector<Complex> r(s.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = st.h_phi.values[i] - st.eigenvalue * st.phi.values[i];
    fft::forward(r, n);
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                r[s.index(i, j, k)] /= 1.0 + 0.5 * tau * (kx * kx + ky * ky + kz * kz);
            }
        }
    }
    fft::backward(r, n);
    RealField next(s);
    for (std::size_t i = 0; i < r.size(); ++i) next.values[i] = st.phi.values[i] - tau * r[i].real();
    return next;
}

}  // namespace

EnergyTerms energy_functional(const RealField& phi, const KernelSpec& kernel) {
    check_finite(phi, "energy_functional: phi");
    EnergyTerms e;
    const RealField kin = minus_half_laplacian(phi);
    const RealField pot = convolve_potential(density(phi), kernel);
    double t_sum = 0.0, v_sum = 0.0;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double p = phi.values[i];
        t_sum += p * kin.values[i];
        v_sum += p * p * pot.values[i];
    }
    const double dv = phi.spec.cell_volume();
    e.kinetic = t_sum * dv;
    e.potential = 0.5 * v_sum * dv;
    e.total = e.kinetic + e.potential;
    return e;
}

GroundStateResult solve_choquard(const GridSpec& spec, const KernelSpec& kernel, double norm, const SolverOptions& opts) {
    spec.validate();
    kernel.validate();
    require(kernel.kind != KernelKind::helmholtz, "solve_choquard: helmholtz kernel has no Choquard ground state");
    require(std::isfinite(norm) && norm > 0.0, "solve_choquard: norm must be positive");
    require(opts.tol > 0.0 && opts.max_iterations > 0, "solve_choquard: invalid solver options");

    RealField phi0 = opts.initial_guess ? *opts.initial_guess : initial_profile(spec, norm);
    require(phi0.spec == spec, "solve_choquard: initial guess lives on a different grid");
    for (double& v : phi0.values) v = std::abs(v);
    normalize_to(phi0, norm);

    const double h2 = spec.spacing() * spec.spacing();
    double tau = opts.initial_step > 0.0 ? opts.initial_step : h2;
    const double tau_max = opts.max_step > 0.0 ? opts.max_step : 1e3 * h2;
    const double tau_min = 1e-12 * h2;

    State st = evaluate(std::move(phi0), kernel);
    GroundStateResult result{st.phi, 0.0, 0.0, 0.0, 0.0, 0.0, 0, 0.0, {}};
    if (opts.record_history) result.energy_history.push_back(st.energy.total);

    int iter = 0;
    while (st.residual >= opts.tol) {
        if (iter >= opts.max_iterations)
            fail(ErrorCode::MaxIterationsExceeded, "solve_choquard: residual " + std::to_string(st.residual) +
                                                       " after " + std::to_string(iter) + " iterations");
        ++iter;
        RealField trial = preconditioned_step(st, tau);
        normalize_to(trial, norm);
        State next = evaluate(std::move(trial), kernel);
        if (!std::isfinite(next.energy.total)) fail(ErrorCode::NonFinite, "solve_choquard: energy became non-finite");
        // Energy must not rise beyond round-off. Once energy changes sink into
        // the round-off band the residual decides, which stops step sizes that
        // merely oscillate around the minimiser.
        const double noise = 1e-12 * std::abs(st.energy.total);
        const double change = next.energy.total - st.energy.total;
        const bool uphill = change > noise;
        const bool stalled = change > -noise && next.residual > st.residual;
        if (uphill || stalled) {
            tau *= 0.5;
            if (tau < tau_min) fail(ErrorCode::MaxIterationsExceeded, "solve_choquard: step size underflow");
            continue;
        }
        st = std::move(next);
        tau = std::min(1.1 * tau, tau_max);
        if (opts.record_history) result.energy_history.push_back(st.energy.total);
    }

    result.phi = std::move(st.phi);
    result.eigenvalue = st.eigenvalue;
    result.kinetic = st.energy.kinetic;
    result.potential = st.energy.potential;
    result.total_energy = st.energy.total;
    result.iterations = iter;
    result.residual = st.residual;
    result.width = rms_width(density(result.phi));
    if (result.width > spec.box_length() / 8.0)
        fail(ErrorCode::WidthTooLarge, "solve_choquard: soliton rms width " + std::to_string(result.width) +
                                           " exceeds box/8 = " + std::to_string(spec.box_length() / 8.0));
    return result;
}

ScalingSweep scaling_sweep(const KernelSpec& kernel, std::span<const double> norms, const GridSpec& reference_grid,
                           double reference_norm, const SolverOptions& opts) {
    require(kernel.kind == KernelKind::coulomb, "scaling_sweep: exact covariance requires the coulomb kernel");
    require(norms.size() >= 2, "scaling_sweep: need at least two norms");
    require(reference_norm > 0.0, "scaling_sweep: reference norm must be positive");

    ScalingSweep sweep;
    for (double N : norms) {
        require(N > 0.0, "scaling_sweep: norms must be positive");
        const GridSpec grid(reference_grid.n(), reference_grid.box_length() * reference_norm / N);
        SolverOptions o = opts;
        o.initial_guess.reset();
        // Step sizes scale with h^2, i.e. as 1/N^2; the defaults already track h.
        const GroundStateResult gs = solve_choquard(grid, kernel, N, o);
        sweep.rows.push_back({N, grid.box_length(), gs.total_energy, gs.eigenvalue, gs.width, gs.residual});
    }

    // Least-squares slopes in log-log space.
    auto slope = [&](auto y_of) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(sweep.rows.size());
        for (const auto& row : sweep.rows) {
            const double x = std::log(row.norm);
            const double y = y_of(row);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        return (m * sxy - sx * sy) / (m * sxx - sx * sx);
    };
    sweep.energy_exponent = slope([](const ScalingRow& r) { return std::log(-r.energy); });
    sweep.width_exponent = slope([](const ScalingRow& r) { return std::log(r.width); });
    return sweep;
}

}  // namespace sgs
