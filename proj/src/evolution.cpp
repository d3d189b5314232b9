#include "sgs/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgs/fft.hpp"

namespace sgs {

RealField sample_external(const ExternalPotential& potential, const GridSpec& spec) {
    struct Visitor {
        const GridSpec& spec;
        RealField operator()(std::monostate) const { return RealField(spec); }
        RealField operator()(const RealField& f) const {
            require(f.spec == spec, "external potential lives on a different grid");
            check_finite(f, "external potential");
            return f;
        }
        RealField operator()(const UniformPotential& u) const {
            RealField out(spec);
            std::fill(out.values.begin(), out.values.end(), u.value);
            return out;
        }
        RealField operator()(const LinearPotential& l) const {
            const Vec3 origin{};
            return sample_real(spec, [&](const Vec3& x) { return dot(l.gradient, spec.min_image(x, origin)); });
        }
        RealField operator()(const HarmonicPotential& h) const {
            return sample_real(spec, [&](const Vec3& x) {
                const Vec3 d = spec.min_image(x, h.centre);
                return 0.5 * h.omega * h.omega * dot(d, d);
            });
        }
    };
    return std::visit(Visitor{spec}, potential);
}

int EvolutionConfig::step_count() const { return std::max(1, static_cast<int>(std::llround(t_end / dt))); }

void EvolutionConfig::validate(const GridSpec& spec) const {
    const double h2 = spec.spacing() * spec.spacing();
    require(std::isfinite(dt) && dt > 0.0, "evolution: dt must be positive");
    require(dt < h2, "evolution: dt = " + std::to_string(dt) + " must be < spacing^2 = " + std::to_string(h2));
    require(std::isfinite(t_end) && t_end >= dt, "evolution: t_end must be >= dt");
    require(snapshot_stride >= 1, "evolution: snapshot_stride must be >= 1");
}

StateSnapshot make_snapshot(double time, ComplexField psi) {
    StateSnapshot s{time, std::move(psi), 0.0, 0.0, {}};
    s.norm_sq = l2_norm_sq(s.psi);
    const RealField rho = density(s.psi);
    s.barycentre = barycentre(rho);
    s.width = rms_width(rho, s.barycentre);
    return s;
}

namespace {

/// e^{-i k^2 tau / 2} on the FFT grid.
std::vector<Complex> kinetic_propagator(const GridSpec& s, double tau) {
    const int n = s.n();
    std::vector<Complex> mult(s.size());
    for (int i = 0; i < n; ++i) {
        const double kx = s.wavenumber(i);
        for (int j = 0; j < n; ++j) {
            const double ky = s.wavenumber(j);
            for (int k = 0; k < n; ++k) {
                const double kz = s.wavenumber(k);
                mult[s.index(i, j, k)] = std::polar(1.0, -(kx * kx + ky * ky + kz * kz) * tau / 2.0);
            }
        }
    }
    return mult;
}

void apply_in_fourier(std::vector<Complex>& psi, const std::vector<Complex>& mult, int n) {
    fft::forward(psi, n);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= mult[i];
    fft::backward(psi, n);
}

}  // namespace

std::vector<StateSnapshot> evolve_nls(const ComplexField& psi0, const KernelSpec& kernel, const EvolutionConfig& cfg) {
    const GridSpec& s = psi0.spec;
    s.validate();
    kernel.validate();
    cfg.validate(s);
    check_finite(psi0, "evolve: initial state");
    require(kernel.kind != KernelKind::helmholtz, "evolve: helmholtz kernel is not a self-interaction");

    const double dt = cfg.direction == TimeDirection::forward ? cfg.dt : -cfg.dt;
    const int steps = cfg.step_count();
    const int n = s.n();
    const bool nonlinear = kernel.coupling > 0.0;
    const RealField external = sample_external(cfg.external, s);
    const std::vector<Complex> half_kick = kinetic_propagator(s, 0.5 * dt);
    const std::vector<Complex> full_kick = kinetic_propagator(s, dt);

    // Without self-interaction the potential step is the same every step.
    std::vector<Complex> linear_phase;
    const bool has_external = !std::holds_alternative<std::monostate>(cfg.external);
    if (!nonlinear && has_external) {
        linear_phase.resize(s.size());
        for (std::size_t i = 0; i < linear_phase.size(); ++i) linear_phase[i] = std::polar(1.0, -external.values[i] * dt);
    }

    ComplexField psi = psi0;
    const double norm0 = l2_norm_sq(psi);
    require(norm0 > 0.0, "evolve: initial state has zero norm");

    std::vector<StateSnapshot> out;
    out.push_back(make_snapshot(0.0, psi));

    // Adjacent kinetic half steps of consecutive Strang steps are fused; psi
    // then lags half a kinetic step and is completed only for snapshots.
    apply_in_fourier(psi.values, half_kick, n);
    for (int step = 1; step <= steps; ++step) {
        if (nonlinear) {
            const RealField v_nl = convolve_potential(density(psi), kernel);
            for (std::size_t i = 0; i < psi.values.size(); ++i)
                psi.values[i] *= std::polar(1.0, -(external.values[i] + v_nl.values[i]) * dt);
        } else if (has_external) {
            for (std::size_t i = 0; i < psi.values.size(); ++i) psi.values[i] *= linear_phase[i];
        }

        const double norm = l2_norm_sq(psi);
        if (!std::isfinite(norm)) fail(ErrorCode::NonFinite, "evolve: state overflowed at step " + std::to_string(step));
        const double drift = std::abs(norm - norm0) / norm0;
        if (drift > 1e-6)
            fail(ErrorCode::NormDrift, "evolve: relative norm drift " + std::to_string(drift) + " at step " +
                                           std::to_string(step) + "; reduce dt");
        if (step % cfg.snapshot_stride == 0 || step == steps) {
            ComplexField done = psi;
            apply_in_fourier(done.values, half_kick, n);
            out.push_back(make_snapshot(step * dt, std::move(done)));
        }
        if (step < steps) apply_in_fourier(psi.values, full_kick, n);
    }
    return out;
}

std::vector<StateSnapshot> evolve_linear_pilot(const ComplexField& psi0, const EvolutionConfig& cfg) {
    return evolve_nls(psi0, KernelSpec::coulomb(0.0), cfg);
}

StabilityReport stability_report(std::span<const StateSnapshot> snapshots) {
    require(snapshots.size() >= 2, "stability_report: need at least two snapshots");
    const StateSnapshot& first = snapshots.front();
    require(first.width > 0.0 && first.norm_sq > 0.0, "stability_report: degenerate first snapshot");
    StabilityReport r;
    for (const auto& snap : snapshots) {
        r.width_drift = std::max(r.width_drift, std::abs(snap.width - first.width) / first.width);
        const Vec3 d = first.psi.spec.min_image(snap.barycentre, first.barycentre);
        r.barycentre_drift = std::max(r.barycentre_drift, norm(d) / first.width);
        r.norm_drift = std::max(r.norm_drift, std::abs(snap.norm_sq - first.norm_sq) / first.norm_sq);
    }
    return r;
}

}  // namespace sgs
