#include "sgs/effective_gravity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sgs/guidance.hpp"
#include "sgs/kernels.hpp"

namespace sgs {

void SourceModel::validate(const GridSpec& spec) const {
    spec.validate();
    require(positions.size() == L_values.size(), "source model: positions and L_values differ in length");
    require(std::isfinite(sigma_s) && sigma_s > 0.0, "source model: sigma_s must be positive");
    require(sigma_s >= 1.5 * spec.spacing(),
            "source model: sigma_s must be >= 1.5 * spacing (" + std::to_string(1.5 * spec.spacing()) + ")");
    for (double L : L_values) require(std::isfinite(L) && L >= 0.0, "source model: L values must be >= 0");
    const double floor = std::max(4.0 * sigma_s, screening_length);
    for (std::size_t a = 0; a < positions.size(); ++a)
        for (std::size_t b = a + 1; b < positions.size(); ++b) {
            const double d = norm(spec.min_image(positions[a], positions[b]));
            if (d <= floor)
                fail(ErrorCode::SourceOverlap, "sources " + std::to_string(a) + " and " + std::to_string(b) +
                                                   " are " + std::to_string(d) + " apart; need > " +
                                                   std::to_string(floor));
        }
}

RealField build_source_field(const SourceModel& model, const GridSpec& spec) {
    model.validate(spec);
    RealField out(spec);
    for (std::size_t s = 0; s < model.positions.size(); ++s) {
        if (model.L_values[s] == 0.0) continue;
        const RealField blob = regularized_delta(model.positions[s], 4.0 * kPi * model.L_values[s], model.sigma_s, spec);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += blob.values[i];
    }
    return out;
}

RealField solve_effective_potential(const SourceModel& model, const GridSpec& spec) {
    return poisson_solve(build_source_field(model, spec));
}

KinkProfile kink_profile(const RealField& soliton, int axis, double extent_widths) {
    require(axis >= 0 && axis < 3, "kink_profile: axis must be 0, 1 or 2");
    require(extent_widths > 0.0, "kink_profile: extent must be positive");
    const GridSpec& spec = soliton.spec;
    spec.validate();
    check_finite(soliton, "kink_profile");

    const RealField rho = density(soliton);
    const Vec3 centre = barycentre(rho);
    const double width = rms_width(rho, centre);
    const auto grad = spectral_gradient(to_complex(soliton));
    const double max_rho = *std::max_element(rho.values.begin(), rho.values.end());

    const int steps = static_cast<int>(std::floor(extent_widths * width / spec.spacing()));
    require(steps >= 1 && steps < spec.n() / 2, "kink_profile: sampled segment must fit inside the box");
    KinkProfile out;
    for (int m = -steps; m <= steps; ++m) {
        const double s = m * spec.spacing();
        Vec3 x = centre;
        x[axis] += s;
        const double phi = interpolate(soliton, x);
        if (!(phi * phi >= kNodeFloor * max_rho) || phi <= 0.0)
            fail(ErrorCode::NodeProximity, "kink_profile: profile vanishes at offset " + std::to_string(s));
        out.offsets.push_back(s);
        out.ratio.push_back(interpolate(grad[axis], x).real() / phi);
    }
    return out;
}

GravityFitResult fit_newtonian(const RealField& phi, const SourceModel& model, double r_min, double r_max) {
    const GridSpec& spec = phi.spec;
    model.validate(spec);
    check_finite(phi, "fit_newtonian");
    require(!model.positions.empty(), "fit_newtonian: model has no sources");
    require(r_min >= 4.0 * model.sigma_s * (1.0 - 1e-12),
            "fit_newtonian: r_min must be >= 4 sigma_s = " + std::to_string(4.0 * model.sigma_s));
    require(r_max <= 0.25 * spec.box_length() * (1.0 + 1e-12),
            "fit_newtonian: r_max must be <= box/4 = " + std::to_string(0.25 * spec.box_length()));
    if (!(r_max > r_min)) fail(ErrorCode::WindowTooNarrow, "fit_newtonian: empty window");

    const double log_span = std::log(r_max / r_min);
    GravityFitResult out;
    out.r_min = r_min;
    out.r_max = r_max;

    for (std::size_t s = 0; s < model.positions.size(); ++s) {
        double reach = r_max;
        for (std::size_t o = 0; o < model.positions.size(); ++o)
            if (o != s) reach = std::min(reach, norm(spec.min_image(model.positions[o], model.positions[s])) -
                                                    4.0 * model.sigma_s);

        struct Acc {
            double count = 0, phi = 0, inv_r = 0, r2 = 0, r = 0;
        };
        std::vector<Acc> acc(kShellCount);
        for (std::size_t idx = 0; idx < spec.size(); ++idx) {
            const double r = norm(spec.min_image(spec.position(idx), model.positions[s]));
            if (r < r_min || r > r_max) continue;
            const int b = std::min(kShellCount - 1, static_cast<int>(kShellCount * std::log(r / r_min) / log_span));
            Acc& a = acc[b];
            a.count += 1;
            a.phi += phi.values[idx];
            a.inv_r += 1.0 / r;
            a.r2 += r * r;
            a.r += r;
        }

        std::vector<const Acc*> rows;
        for (int b = 0; b < kShellCount; ++b) {
            const double outer = r_min * std::exp(log_span * (b + 1) / kShellCount);
            if (acc[b].count > 0 && outer <= reach) rows.push_back(&acc[b]);
        }
        if (rows.size() < 5)
            fail(ErrorCode::WindowTooNarrow, "fit_newtonian: only " + std::to_string(rows.size()) +
                                                 " usable shells around source " + std::to_string(s));

        const auto m = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd A(m, 3);
        Eigen::VectorXd y(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const Acc& a = *rows[i];
            A(i, 0) = a.inv_r / a.count;
            A(i, 1) = 1.0;
            A(i, 2) = a.r2 / a.count;
            y(i) = a.phi / a.count;
        }
        const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
        const Eigen::VectorXd fit = A * coef;

        ShellProfile profile;
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            profile.radius.push_back(rows[i]->r / rows[i]->count);
            profile.phi_avg.push_back(y(i));
            profile.phi_fit.push_back(fit(i));
            num += (y(i) - fit(i)) * (y(i) - fit(i));
            den += (y(i) - coef(1)) * (y(i) - coef(1));
        }
        out.amplitudes.push_back(-coef(0));
        out.offsets.push_back(coef(1));
        out.curvatures.push_back(coef(2));
        out.shells.push_back(std::move(profile));
        out.relative_residual = std::max(out.relative_residual, den > 0.0 ? std::sqrt(num / den) : 0.0);
    }
    return out;
}

CalibrationResult calibrate_L(double mass) {
    require(std::isfinite(mass) && mass > 0.0, "calibrate_L: mass must be positive");
    CalibrationResult r;
    r.mass = mass;
    r.L = si::G * mass / (2.0 * si::c * si::c);
    r.rest_energy_check = (si::G * mass * mass / (2.0 * r.L)) / (mass * si::c * si::c);
    return r;
}

namespace {

double pair_separation(const SourceModel& model, const std::vector<double>& masses) {
    require(model.positions.size() == 2, "interaction energy: exactly two sources required");
    require(masses.size() == 2, "interaction energy: exactly two masses required");
    const double d = norm(model.positions[1] - model.positions[0]);
    if (d <= std::max(4.0 * model.sigma_s, model.screening_length))
        fail(ErrorCode::SourceOverlap, "interaction energy: sources overlap (separation " + std::to_string(d) + ")");
    return d;
}

}  // namespace

double interaction_energy(const SourceModel& model, const std::vector<double>& masses, double gravitational_constant) {
    const double d = pair_separation(model, masses);
    return -gravitational_constant * masses[0] * masses[1] / d;
}

double interaction_energy_from_fit(const GravityFitResult& fit, const SourceModel& model,
                                   const std::vector<double>& masses, double c) {
    const double d = pair_separation(model, masses);
    require(fit.amplitudes.size() == 2, "interaction energy: fit must cover both sources");
    return -c * c * (masses[1] * fit.amplitudes[0] + masses[0] * fit.amplitudes[1]) / d;
}

namespace {

RealField scaled_potential(const ComplexField& psi, const RealField& phi_G, double c) {
    require(psi.spec == phi_G.spec, "minimal coupling: grid mismatch");
    require(std::isfinite(c) && c > 0.0, "minimal coupling: c must be positive");
    check_finite(phi_G, "minimal coupling: phi_G");
    RealField u = phi_G;
    double peak = 0.0;
    for (double& v : u.values) {
        v /= c * c;
        peak = std::max(peak, std::abs(v));
    }
    if (peak >= 0.5)
        fail(ErrorCode::PerturbationTooLarge,
             "minimal coupling: max|phi_G|/c^2 = " + std::to_string(peak) + " is outside the perturbative regime");
    return u;
}

}  // namespace

ComplexField apply_minimal_coupling(const ComplexField& psi_hom, const RealField& phi_G, int order, double c) {
    require(order >= 0, "minimal coupling: order must be >= 0");
    const RealField u = scaled_potential(psi_hom, phi_G, c);
    ComplexField out = psi_hom;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        // Horner form of 1 + u + ... + u^order.
        double series = 1.0;
        for (int j = 0; j < order; ++j) series = 1.0 + u.values[i] * series;
        out.values[i] *= series;
    }
    return out;
}

ComplexField pilot_from_homogeneous(const ComplexField& psi_hom, const RealField& phi_G, double c) {
    const RealField u = scaled_potential(psi_hom, phi_G, c);
    ComplexField out = psi_hom;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= 1.0 - u.values[i];
    return out;
}

double neglected_term_ratio(const ComplexField& psi_hom, const RealField& phi_G, double c) {
    const RealField u = scaled_potential(psi_hom, phi_G, c);
    const auto grad_psi = spectral_gradient(psi_hom);
    const auto grad_u = spectral_gradient(to_complex(u));
    const ComplexField lap = laplacian(psi_hom);
    double cross = 0.0, kept = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        Complex dot_term = 0.0;
        for (int a = 0; a < 3; ++a) dot_term += grad_u[a].values[i].real() * grad_psi[a].values[i];
        cross += std::norm(dot_term);
        kept += std::norm(0.5 * (1.0 - u.values[i]) * lap.values[i]);
    }
    return kept > 0.0 ? std::sqrt(cross / kept) : 0.0;
}

}  // namespace sgs
