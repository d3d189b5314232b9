#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "schema.hpp"
#include "sgs/cli.hpp"
#include "sgs/droplets.hpp"
#include "sgs/effective_gravity.hpp"
#include "sgs/ensemble.hpp"
#include "sgs/evolution.hpp"
#include "sgs/ground_state.hpp"
#include "sgs/io.hpp"
#include "sgs/parallel.hpp"

namespace sgs::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Typed views of the configuration. Each constructor checks its invariants
// and names the offending key.

GridSpec grid_from(const Config& cfg) {
    const long long n = cfg.integer("grid.n");
    if (n < 8 || n % 2 != 0 || n > 1024) config_error("grid.n", "must be even and in [8, 1024]");
    const double box = cfg.real("grid.box");
    if (!(box > 0.0)) config_error("grid.box", "must be positive");
    return GridSpec(static_cast<int>(n), box);
}

KernelSpec kernel_from(const Config& cfg) {
    KernelSpec k;
    const std::string kind = cfg.text("kernel.kind");
    if (kind == "coulomb") k.kind = KernelKind::coulomb;
    else if (kind == "yukawa") k.kind = KernelKind::yukawa;
    else config_error("kernel.kind", "expected coulomb or yukawa, got '" + kind + "'");
    k.coupling = cfg.real("kernel.coupling");
    if (k.coupling < 0.0) config_error("kernel.coupling", "must be >= 0");
    k.screening_length = cfg.real("kernel.screening_length");
    if (k.kind == KernelKind::yukawa && !(k.screening_length > 0.0))
        config_error("kernel.screening_length", "must be positive for the yukawa kernel");
    const std::string boundary = cfg.text("kernel.boundary");
    if (boundary == "periodic") k.boundary = Boundary::periodic;
    else if (boundary == "isolated") k.boundary = Boundary::isolated;
    else config_error("kernel.boundary", "expected periodic or isolated, got '" + boundary + "'");
    return k;
}

struct SolverSetup {
    double norm = 1.0;
    SolverOptions opts;
    std::vector<double> scaling_norms;
};

SolverSetup solver_from(const Config& cfg) {
    SolverSetup s;
    s.norm = cfg.real("solver.norm");
    if (!(s.norm > 0.0)) config_error("solver.norm", "must be positive");
    s.opts.tol = cfg.real("solver.tol");
    if (!(s.opts.tol > 0.0)) config_error("solver.tol", "must be positive");
    const long long iters = cfg.integer("solver.max_iterations");
    if (iters < 1 || iters > 100000000) config_error("solver.max_iterations", "must be in [1, 1e8]");
    s.opts.max_iterations = static_cast<int>(iters);
    s.scaling_norms = cfg.list("solver.scaling_norms");
    for (double n : s.scaling_norms)
        if (!(n > 0.0)) config_error("solver.scaling_norms", "norms must be positive");
    if (s.scaling_norms.size() == 1) config_error("solver.scaling_norms", "need at least two norms for a fit");
    return s;
}

ExternalPotential potential_from(const Config& cfg) {
    const std::string kind = cfg.text("potential.kind");
    if (kind == "none") return std::monostate{};
    if (kind == "uniform") return UniformPotential{cfg.real("potential.value")};
    if (kind == "linear") return LinearPotential{cfg.vec3("potential.gradient")};
    if (kind == "harmonic") {
        const double omega = cfg.real("potential.omega");
        if (!(omega > 0.0)) config_error("potential.omega", "must be positive");
        return HarmonicPotential{omega, cfg.vec3("potential.centre")};
    }
    config_error("potential.kind", "expected none, uniform, linear or harmonic, got '" + kind + "'");
}

EvolutionConfig evolution_from(const Config& cfg, const GridSpec& spec, bool with_potential) {
    EvolutionConfig e;
    const double h2 = spec.spacing() * spec.spacing();
    e.dt = cfg.real("evolve.dt");
    if (!(e.dt > 0.0)) config_error("evolve.dt", "must be positive");
    if (!(e.dt < h2))
        config_error("evolve.dt", "must be < spacing^2 = " + io::format_double(h2) + " (got " + io::format_double(e.dt) + ")");
    e.t_end = cfg.real("evolve.t_end");
    if (!(e.t_end >= e.dt)) config_error("evolve.t_end", "must be >= evolve.dt");
    const long long stride = cfg.integer("evolve.stride");
    if (stride < 1) config_error("evolve.stride", "must be >= 1");
    e.snapshot_stride = static_cast<int>(stride);
    const std::string dir = cfg.text("evolve.direction");
    if (dir == "forward") e.direction = TimeDirection::forward;
    else if (dir == "backward") e.direction = TimeDirection::backward;
    else config_error("evolve.direction", "expected forward or backward");
    if (with_potential) e.external = potential_from(cfg);
    return e;
}

/// Checks that k is a grid wavenumber so the plane wave is periodic.
void require_grid_momentum(const std::string& key, const Vec3& k, const GridSpec& spec) {
    const double dk = 2.0 * kPi / spec.box_length();
    for (double c : k) {
        const double m = c / dk;
        if (std::abs(m - std::round(m)) > 1e-9) config_error(key, "components must be multiples of 2 pi / grid.box");
        if (std::abs(m) >= spec.n() / 2) config_error(key, "exceeds the grid Nyquist wavenumber");
    }
}

struct EvolveSetup {
    GridSpec spec;
    KernelSpec kernel;
    SolverSetup solver;
    EvolutionConfig evo;
    std::string initial;
    double periods = 0.0;
    double width = 1.0;
    Vec3 centre{};
    Vec3 momentum{};
    bool dump = false;
};

EvolveSetup evolve_from(const Config& cfg) {
    const GridSpec spec = grid_from(cfg);
    EvolveSetup s{spec, kernel_from(cfg), solver_from(cfg), evolution_from(cfg, spec, true), {}, 0.0, 1.0, {}, {}, false};
    if (cfg.flag("evolve.linear")) s.kernel = KernelSpec::coulomb(0.0);
    s.initial = cfg.text("evolve.initial");
    if (s.initial != "ground-state" && s.initial != "gaussian" && s.initial != "plane-wave")
        config_error("evolve.initial", "expected ground-state, gaussian or plane-wave");
    s.periods = cfg.real("evolve.periods");
    if (s.periods < 0.0) config_error("evolve.periods", "must be >= 0");
    if (s.periods > 0.0 && s.initial != "ground-state")
        config_error("evolve.periods", "only meaningful with evolve.initial = ground-state");
    s.width = cfg.real("evolve.width");
    if (s.initial == "gaussian" && !(s.width >= 1.5 * spec.spacing()))
        config_error("evolve.width", "must be >= 1.5 * spacing");
    s.centre = cfg.vec3("evolve.centre");
    s.momentum = cfg.vec3("evolve.momentum");
    if (s.initial == "plane-wave") require_grid_momentum("evolve.momentum", s.momentum, spec);
    s.dump = cfg.flag("evolve.dump_snapshots");
    return s;
}

struct DbbSetup {
    GridSpec spec;
    EvolutionConfig evo;
    std::string pilot;
    std::uint64_t seed = 0;
    std::size_t particles = 0;
    int bins = 20;
    int axis = 0;
    double separation = 6.0;
    double width = 1.0;
    double ratio = 0.7;
    Vec3 momentum{};
    std::size_t trajectories = 0;
};

DbbSetup dbb_from(const Config& cfg) {
    const GridSpec spec = grid_from(cfg);
    DbbSetup s{spec, evolution_from(cfg, spec, false), {}, 0, 0, 20, 0, 6.0, 1.0, 0.7, {}, 0};
    s.pilot = cfg.text("dbb.pilot");
    if (s.pilot != "two-gaussian" && s.pilot != "plane-wave")
        config_error("dbb.pilot", "expected two-gaussian or plane-wave");
    const long long particles = cfg.integer("dbb.particles");
    if (particles < 1 || particles > 100000000) config_error("dbb.particles", "must be in [1, 1e8]");
    s.particles = static_cast<std::size_t>(particles);
    const long long bins = cfg.integer("dbb.bins");
    if (bins < 2 || bins > 10000) config_error("dbb.bins", "must be in [2, 10000]");
    s.bins = static_cast<int>(bins);
    const long long axis = cfg.integer("dbb.axis");
    if (axis < 0 || axis > 2) config_error("dbb.axis", "must be 0, 1 or 2");
    s.axis = static_cast<int>(axis);
    s.separation = cfg.real("dbb.separation");
    if (!(s.separation > 0.0 && s.separation < 0.5 * spec.box_length()))
        config_error("dbb.separation", "must be in (0, grid.box / 2)");
    s.width = cfg.real("dbb.width");
    if (!(s.width >= 1.5 * spec.spacing())) config_error("dbb.width", "must be >= 1.5 * spacing");
    s.ratio = cfg.real("dbb.amplitude_ratio");
    if (s.ratio < 0.0) config_error("dbb.amplitude_ratio", "must be >= 0");
    s.momentum = cfg.vec3("dbb.momentum");
    if (s.pilot == "plane-wave") require_grid_momentum("dbb.momentum", s.momentum, spec);
    const long long traj = cfg.integer("dbb.trajectories");
    if (traj < 0 || traj > particles) config_error("dbb.trajectories", "must be in [0, dbb.particles]");
    s.trajectories = static_cast<std::size_t>(traj);
    if (s.pilot == "two-gaussian") {
        if (!cfg.has("seed")) config_error("seed", "required for ensemble sampling");
        const long long seed = cfg.integer("seed");
        if (seed < 0) config_error("seed", "must be >= 0");
        s.seed = static_cast<std::uint64_t>(seed);
    }
    return s;
}

struct GravitySetup {
    GridSpec spec;
    SourceModel model;
    double r_min = 0.0;
    double r_max = 0.0;
    std::vector<double> masses;
    double coupling_strength = 0.0;
    int coupling_order = 2;
    double calibrate_mass = 0.0;
};

GravitySetup gravity_from(const Config& cfg) {
    GravitySetup s{grid_from(cfg), {}, 0.0, 0.0, {}, 0.0, 2, 0.0};
    std::stringstream ss(cfg.text("gravity.sources"));
    std::string item;
    while (std::getline(ss, item, ';')) {
        std::vector<double> v;
        std::stringstream parts(item);
        std::string p;
        while (std::getline(parts, p, ',')) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(p, &used));
                if (p.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(p);
            } catch (const std::exception&) {
                config_error("gravity.sources", "malformed number '" + p + "'");
            }
        }
        if (v.size() != 4) config_error("gravity.sources", "each source is 'x,y,z,L' (sources separated by ';')");
        s.model.positions.push_back({v[0], v[1], v[2]});
        s.model.L_values.push_back(v[3]);
    }
    s.model.sigma_s = cfg.real("gravity.sigma");
    if (!(s.model.sigma_s >= 1.5 * s.spec.spacing())) config_error("gravity.sigma", "must be >= 1.5 * spacing");
    for (double L : s.model.L_values)
        if (L < 0.0) config_error("gravity.sources", "L values must be >= 0");
    try {
        s.model.validate(s.spec);
    } catch (const Error& e) {
        config_error("gravity.sources", e.what());
    }
    s.r_min = cfg.real("gravity.r_min");
    if (s.r_min == 0.0) s.r_min = 4.0 * s.model.sigma_s;
    s.r_max = cfg.real("gravity.r_max");
    if (s.r_max == 0.0) s.r_max = 0.25 * s.spec.box_length();
    if (s.r_min < 4.0 * s.model.sigma_s * (1.0 - 1e-12)) config_error("gravity.r_min", "must be >= 4 * gravity.sigma");
    if (s.r_max > 0.25 * s.spec.box_length() * (1.0 + 1e-12)) config_error("gravity.r_max", "must be <= grid.box / 4");
    if (!(s.r_max > s.r_min)) config_error("gravity.r_max", "must exceed gravity.r_min");
    s.masses = cfg.list("gravity.masses");
    if (!s.masses.empty()) {
        if (s.masses.size() != 2 || s.model.positions.size() != 2)
            config_error("gravity.masses", "interaction energy needs exactly two sources and two masses");
        for (double m : s.masses)
            if (!(m > 0.0)) config_error("gravity.masses", "masses must be positive");
    }
    s.coupling_strength = cfg.real("gravity.coupling_strength");
    if (s.coupling_strength < 0.0 || s.coupling_strength >= 0.5)
        config_error("gravity.coupling_strength", "must be in [0, 0.5)");
    const long long order = cfg.integer("gravity.coupling_order");
    if (order < 0 || order > 64) config_error("gravity.coupling_order", "must be in [0, 64]");
    s.coupling_order = static_cast<int>(order);
    s.calibrate_mass = cfg.real("gravity.calibrate_mass");
    if (s.calibrate_mass < 0.0) config_error("gravity.calibrate_mass", "must be >= 0");
    return s;
}

struct DropletSetup {
    std::string mode;
    ForcingSpec forcing;
    DropletPair pair;
    double r_max = 5.0;
    double speed = 0.1;
    double b_min = 0.3, b_max = 3.0;
    int b_count = 28;
    double revolutions = 20.0;
    double dt = 1e-3;
    double separation = 1.0;
    double t_end = 100.0;
    int record_stride = 100;
};

DropletSetup droplet_from(const Config& cfg) {
    DropletSetup s;
    s.mode = cfg.text("droplet.mode");
    if (s.mode != "zones" && s.mode != "equilibria" && s.mode != "sweep" && s.mode != "orbit")
        config_error("droplet.mode", "expected zones, equilibria, sweep or orbit");
    s.forcing = {cfg.real("droplet.f0"), cfg.real("droplet.v")};
    if (s.forcing.f0 < 0.0) config_error("droplet.f0", "must be >= 0");
    if (!(s.forcing.v > 0.0)) config_error("droplet.v", "must be positive");
    s.pair = {cfg.real("droplet.M_A"), cfg.real("droplet.M_B"), cfg.real("droplet.L_A"), cfg.real("droplet.L_B")};
    for (const char* key : {"droplet.M_A", "droplet.M_B", "droplet.L_A", "droplet.L_B"})
        if (!(cfg.real(key) > 0.0)) config_error(key, "must be positive");
    s.r_max = cfg.real("droplet.r_max");
    if (!(s.r_max > 0.0)) config_error("droplet.r_max", "must be positive");
    const bool oscillating = s.forcing.f0 > 0.0;
    if (s.mode == "zones" && oscillating && !(s.r_max > s.forcing.faraday_wavelength()))
        config_error("droplet.r_max", "must exceed lambda_F = " + io::format_double(s.forcing.faraday_wavelength()));
    if (s.mode == "equilibria") {
        if (!oscillating) config_error("droplet.f0", "equilibria need f0 > 0 (k0 = 0 has no finite minima)");
        if (s.r_max < 5.0 * s.forcing.faraday_wavelength()) config_error("droplet.r_max", "must be >= 5 lambda_F");
    }
    s.speed = cfg.real("droplet.speed");
    s.b_min = cfg.real("droplet.b_min");
    s.b_max = cfg.real("droplet.b_max");
    const long long count = cfg.integer("droplet.b_count");
    s.revolutions = cfg.real("droplet.revolutions");
    s.dt = cfg.real("droplet.dt");
    s.separation = cfg.real("droplet.separation");
    s.t_end = cfg.real("droplet.t_end");
    const long long stride = cfg.integer("droplet.record_stride");
    if (!(s.dt > 0.0)) config_error("droplet.dt", "must be positive");
    if (s.mode == "sweep") {
        if (!(s.speed > 0.0)) config_error("droplet.speed", "must be positive");
        if (!(s.b_min > 0.0)) config_error("droplet.b_min", "must be positive");
        if (!(s.b_max >= s.b_min)) config_error("droplet.b_max", "must be >= droplet.b_min");
        if (count < 1 || count > 100000) config_error("droplet.b_count", "must be in [1, 1e5]");
        if (!(s.revolutions > 0.0)) config_error("droplet.revolutions", "must be positive");
    }
    s.b_count = static_cast<int>(std::clamp<long long>(count, 1, 100000));
    if (s.mode == "orbit") {
        if (!(s.separation > 0.0)) config_error("droplet.separation", "must be positive");
        if (!(s.t_end >= s.dt)) config_error("droplet.t_end", "must be >= droplet.dt");
        if (stride < 1) config_error("droplet.record_stride", "must be >= 1");
    }
    s.record_stride = static_cast<int>(std::clamp<long long>(stride, 1, 1 << 30));
    return s;
}

// ---------------------------------------------------------------------------
// Output helpers

class Outputs {
public:
    explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

    fs::path path(const std::string& name) {
        names_.push_back(name);
        return dir_ / name;
    }
    void json(const std::string& name, const Json& j) { io::write_text(path(name), j.dump(2) + "\n"); }
    void text(const std::string& name, const std::string& t) { io::write_text(path(name), t); }

    const std::vector<std::string>& names() const { return names_; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

class Timer {
public:
    template <class F>
    auto stage(const std::string& name, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            Timer* self;
            const std::string& name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                self->timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } record{this, name, t0};
        return body();
    }
    Json json() const { return timings_; }

private:
    Json timings_ = Json::object();
};

std::string fmt(double v) { return io::format_double(v); }

ComplexField normalized(ComplexField psi, double norm) {
    const double n = l2_norm_sq(psi);
    require(n > 0.0, "initial state has zero norm");
    const double scale = std::sqrt(norm / n);
    for (Complex& v : psi.values) v *= scale;
    return psi;
}

// ---------------------------------------------------------------------------
// Experiments

Json ground_state_json(const GroundStateResult& r, double norm) {
    Json j;
    j["norm"] = norm;
    j["eigenvalue"] = r.eigenvalue;
    j["kinetic"] = r.kinetic;
    j["potential"] = r.potential;
    j["total_energy"] = r.total_energy;
    j["virial_ratio"] = std::abs(2.0 * r.kinetic + r.potential) / std::abs(r.potential);
    j["width"] = r.width;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    return j;
}

void run_ground_state(const Config& cfg, Outputs& out, Timer& timer) {
    const GridSpec spec = grid_from(cfg);
    const KernelSpec kernel = kernel_from(cfg);
    const SolverSetup solver = solver_from(cfg);
    const GroundStateResult r =
        timer.stage("solve", [&] { return solve_choquard(spec, kernel, solver.norm, solver.opts); });
    Json j = ground_state_json(r, solver.norm);
    io::write_grid(out.path("phi.sgs"), r.phi);
    if (!solver.scaling_norms.empty()) {
        ScalingSweep sweep;
        timer.stage("scaling", [&] { sweep = scaling_sweep(kernel, solver.scaling_norms, spec, solver.norm, solver.opts); });
        std::string csv = "norm,box_length,energy,eigenvalue,width,residual\n";
        for (const auto& row : sweep.rows)
            csv += fmt(row.norm) + "," + fmt(row.box_length) + "," + fmt(row.energy) + "," + fmt(row.eigenvalue) + "," +
                   fmt(row.width) + "," + fmt(row.residual) + "\n";
        out.text("scaling.csv", csv);
        j["scaling"] = {{"energy_exponent", sweep.energy_exponent}, {"width_exponent", sweep.width_exponent}};
    }
    out.json("ground_state.json", j);
}

void run_evolve(const Config& cfg, Outputs& out, Timer& timer) {
    EvolveSetup s = evolve_from(cfg);
    Json j;
    ComplexField psi0(s.spec);
    double eigenvalue = 0.0;
    if (s.initial == "ground-state") {
        const GroundStateResult g = timer.stage(
            "ground_state", [&] { return solve_choquard(s.spec, kernel_from(cfg), s.solver.norm, s.solver.opts); });
        eigenvalue = g.eigenvalue;
        j["ground_state"] = ground_state_json(g, s.solver.norm);
        psi0 = to_complex(g.phi);
        if (s.periods > 0.0) s.evo.t_end = s.periods * 2.0 * kPi / std::abs(eigenvalue);
    } else if (s.initial == "gaussian") {
        PacketSuperposition p{{{1.0, FreePacket::gaussian(s.centre, s.width, s.momentum)}}};
        psi0 = normalized(p.sample(s.spec, 0.0), s.solver.norm);
    } else {
        psi0 = normalized(sample_complex(s.spec, [&](const Vec3& x) { return std::polar(1.0, dot(s.momentum, x)); }),
                          s.solver.norm);
    }
    s.evo.validate(s.spec);

    std::vector<StateSnapshot> snaps;
    timer.stage("evolve", [&] { snaps = evolve_nls(psi0, s.kernel, s.evo); });

    std::string csv = "t,norm_sq,width,bx,by,bz\n";
    for (const auto& snap : snaps)
        csv += fmt(snap.time) + "," + fmt(snap.norm_sq) + "," + fmt(snap.width) + "," + fmt(snap.barycentre[0]) + "," +
               fmt(snap.barycentre[1]) + "," + fmt(snap.barycentre[2]) + "\n";
    out.text("snapshots.csv", csv);

    const StabilityReport rep = stability_report(snaps);
    j["steps"] = s.evo.step_count();
    j["dt"] = s.evo.dt;
    j["t_end"] = snaps.back().time;
    j["stability"] = {{"width_drift", rep.width_drift},
                      {"barycentre_drift", rep.barycentre_drift},
                      {"norm_drift", rep.norm_drift}};
    if (s.initial == "ground-state") {
        // Unwrapped overlap phase with the initial state; stationary states rotate as e^{-i E_g t}.
        double phase = 0.0, previous = 0.0;
        for (std::size_t i = 1; i < snaps.size(); ++i) {
            const double a = std::arg(inner_product(snaps.front().psi, snaps[i].psi));
            double d = a - previous;
            d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
            phase += d;
            previous = a;
        }
        j["phase_rate"] = -phase / snaps.back().time;
        j["eigenvalue"] = eigenvalue;
    }
    out.json("evolution.json", j);
    io::write_grid(out.path("psi_final.sgs"), snaps.back().psi);
    if (s.dump) {
        for (std::size_t i = 0; i < snaps.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "psi_%05zu.sgs", i);
            io::write_grid(out.path(name), snaps[i].psi);
        }
    }
}

void run_dbb(const Config& cfg, Outputs& out, Timer& timer) {
    const DbbSetup s = dbb_from(cfg);
    Json j;
    j["pilot"] = s.pilot;
    if (s.pilot == "plane-wave") {
        const ComplexField psi0 = normalized(
            sample_complex(s.spec, [&](const Vec3& x) { return std::polar(1.0, dot(s.momentum, x)); }), 1.0);
        std::vector<StateSnapshot> snaps;
        timer.stage("evolve", [&] { snaps = evolve_linear_pilot(psi0, s.evo); });
        double worst = 0.0;
        const std::size_t count = std::max<std::size_t>(1, s.trajectories);
        timer.stage("trajectories", [&] {
            for (std::size_t p = 0; p < count; ++p) {
                const double f = (p + 0.5) / count - 0.5;
                const Vec3 start = (0.8 * s.spec.box_length() * f) * Vec3{1.0, 0.7, 0.3};
                const Trajectory t = integrate_trajectory(snaps, start);
                for (std::size_t i = 0; i < t.times.size(); ++i)
                    worst = std::max(worst, norm(t.positions[0][i] - start - t.times[i] * s.momentum));
                if (p < s.trajectories) io::write_trajectory_csv(out.path("trajectory_" + std::to_string(p) + ".csv"), t, 0);
            }
        });
        j["uniform_motion_error"] = worst;
        out.json("equivariance.json", j);
        return;
    }

    PacketSuperposition pilot;
    pilot.terms.push_back({1.0, FreePacket::gaussian({-0.5 * s.separation, 0.0, 0.0}, s.width)});
    pilot.terms.push_back({s.ratio, FreePacket::gaussian({0.5 * s.separation, 0.0, 0.0}, s.width)});
    const ComplexField psi0 = normalized(pilot.sample(s.spec, 0.0), 1.0);

    std::vector<StateSnapshot> snaps;
    timer.stage("evolve", [&] { snaps = evolve_linear_pilot(psi0, s.evo); });
    std::vector<Vec3> starts;
    timer.stage("sample", [&] { starts = sample_density(pilot, 0.0, s.particles, s.seed); });
    std::vector<Vec3> finals;
    timer.stage("ensemble", [&] { finals = integrate_ensemble(snaps, starts); });
    timer.stage("trajectories", [&] {
        for (std::size_t p = 0; p < s.trajectories; ++p)
            io::write_trajectory_csv(out.path("trajectory_" + std::to_string(p) + ".csv"),
                                     integrate_trajectory(snaps, starts[p]), 0);
    });

    const MarginalTest initial = chi_square_marginal(starts, snaps.front().psi, s.axis, s.bins);
    const MarginalTest test = chi_square_marginal(finals, snaps.back().psi, s.axis, s.bins);
    std::string csv = "lo,hi,observed,expected\n";
    for (int b = 0; b < s.bins; ++b)
        csv += fmt(test.edges[b]) + "," + fmt(test.edges[b + 1]) + "," + fmt(test.observed[b]) + "," +
               fmt(test.expected[b]) + "\n";
    out.text("histogram.csv", csv);
    std::string pos = "x,y,z\n";
    for (const Vec3& x : finals) pos += fmt(x[0]) + "," + fmt(x[1]) + "," + fmt(x[2]) + "\n";
    out.text("final_positions.csv", pos);

    j["seed"] = s.seed;
    j["particles"] = s.particles;
    j["axis"] = s.axis;
    j["bins"] = s.bins;
    j["t_end"] = snaps.back().time;
    j["initial"] = {{"chi_square", initial.chi_square}, {"p_value", initial.p_value}};
    j["final"] = {{"chi_square", test.chi_square}, {"dof", test.dof}, {"p_value", test.p_value}};
    out.json("equivariance.json", j);
}

void run_gravity(const Config& cfg, Outputs& out, Timer& timer) {
    const GravitySetup s = gravity_from(cfg);
    const RealField phi = timer.stage("poisson", [&] { return solve_effective_potential(s.model, s.spec); });
    io::write_grid(out.path("phi_G.sgs"), phi);

    Json j;
    j["sigma"] = s.model.sigma_s;
    j["L_values"] = s.model.L_values;
    const bool any_source = std::any_of(s.model.L_values.begin(), s.model.L_values.end(), [](double L) { return L > 0; });
    if (any_source) {
        const GravityFitResult fit = timer.stage("fit", [&] { return fit_newtonian(phi, s.model, s.r_min, s.r_max); });
        Json rel = Json::array();
        for (std::size_t i = 0; i < fit.amplitudes.size(); ++i)
            rel.push_back(s.model.L_values[i] > 0 ? std::abs(fit.amplitudes[i] / s.model.L_values[i] - 1.0) : 0.0);
        j["fit"] = {{"r_min", fit.r_min},
                    {"r_max", fit.r_max},
                    {"amplitudes", fit.amplitudes},
                    {"relative_errors", rel},
                    {"offsets", fit.offsets},
                    {"curvatures", fit.curvatures},
                    {"relative_residual", fit.relative_residual}};
        for (std::size_t i = 0; i < fit.shells.size(); ++i) {
            std::string csv = "r,phi_avg,phi_fit\n";
            const auto& sh = fit.shells[i];
            for (std::size_t k = 0; k < sh.radius.size(); ++k)
                csv += fmt(sh.radius[k]) + "," + fmt(sh.phi_avg[k]) + "," + fmt(sh.phi_fit[k]) + "\n";
            out.text("shells_" + std::to_string(i) + ".csv", csv);
        }
        if (!s.masses.empty()) {
            const double g_eff = s.model.L_values[0] / s.masses[0] + s.model.L_values[1] / s.masses[1];
            j["interaction_energy"] = {{"newton", interaction_energy(s.model, s.masses, g_eff)},
                                       {"from_fit", interaction_energy_from_fit(fit, s.model, s.masses)},
                                       {"gravitational_constant", g_eff}};
        }
    }
    if (s.coupling_strength > 0.0 && any_source) {
        double peak = 0.0;
        for (double v : phi.values) peak = std::max(peak, std::abs(v));
        RealField u = phi;
        for (double& v : u.values) v *= s.coupling_strength / peak;
        const Vec3 k{2.0 * kPi / s.spec.box_length(), 0.0, 0.0};
        const ComplexField psi_hom = sample_complex(s.spec, [&](const Vec3& x) { return std::polar(1.0, dot(k, x)); });
        const ComplexField series = apply_minimal_coupling(psi_hom, u, s.coupling_order);
        double abs_err = 0.0, rel_err = 0.0;
        for (std::size_t i = 0; i < u.values.size(); ++i) {
            const Complex exact = psi_hom.values[i] / (1.0 - u.values[i]);
            abs_err = std::max(abs_err, std::abs(series.values[i] - exact));
            rel_err = std::max(rel_err, std::abs(series.values[i] - exact) / std::abs(exact));
        }
        j["minimal_coupling"] = {{"max_abs_u", s.coupling_strength},
                                 {"order", s.coupling_order},
                                 {"max_abs_error", abs_err},
                                 {"max_rel_error", rel_err},
                                 {"neglected_term_ratio", neglected_term_ratio(psi_hom, u)}};
    }
    if (s.calibrate_mass > 0.0) {
        const CalibrationResult c = calibrate_L(s.calibrate_mass);
        j["calibration"] = {{"mass_kg", c.mass},
                            {"L_m", c.L},
                            {"rest_energy_check", c.rest_energy_check},
                            {"quoted_soliton_size_m", 1e-55}};
    }
    out.json("gravity.json", j);
}

void run_droplet(const Config& cfg, Outputs& out, Timer& timer) {
    const DropletSetup s = droplet_from(cfg);
    const ForcingSpec& f = s.forcing;
    Json j;
    j["k0"] = f.k0();
    j["lambda_F"] = f.f0 > 0.0 ? Json(f.faraday_wavelength()) : Json(nullptr);
    if (s.mode == "zones") {
        Json zones = Json::array();
        for (const Zone& z : classify_zones(f, s.r_max))
            zones.push_back({{"r_lo", z.r_lo}, {"r_hi", z.r_hi}, {"attractive", z.attractive}});
        j["force_roots"] = force_roots(f, s.r_max);
        Json zeros = Json::array();
        if (f.k0() > 0.0)
            for (int n = 0; (0.5 * kPi + n * kPi) / f.k0() < s.r_max; ++n) zeros.push_back((0.5 * kPi + n * kPi) / f.k0());
        j["interaction_zeros"] = zeros;
        j["zones"] = zones;
        out.json("zones.json", j);
    } else if (s.mode == "equilibria") {
        const OrbitResult r = orbit_equilibria(s.pair, f, s.r_max);
        j["radii"] = r.equilibrium_radii;
        j["n"] = r.n_index;
        j["stable"] = r.stable;
        j["residuals"] = r.residuals;
        j["epsilon"] = r.epsilon;
        j["epsilon_ci95"] = r.epsilon_ci;
        j["max_residual"] = r.max_residual;
        out.json("equilibria.json", j);
    } else if (s.mode == "sweep") {
        std::vector<EncounterResult> results(s.b_count);
        timer.stage("sweep", [&] {
            parallel_for(results.size(), [&](std::size_t i) {
                const double b = s.b_count == 1 ? s.b_min : s.b_min + (s.b_max - s.b_min) * i / (s.b_count - 1);
                results[i] = classify_encounter(s.pair, f, b, s.speed, s.revolutions, s.dt);
            });
        });
        std::string csv = "b,outcome,min_separation,max_separation,energy_drift\n";
        int captured = 0, scattered = 0;
        double drift = 0.0;
        for (const auto& r : results) {
            csv += fmt(r.impact_parameter) + "," + to_string(r.outcome) + "," + fmt(r.min_separation) + "," +
                   fmt(r.max_separation) + "," + fmt(r.energy_drift) + "\n";
            captured += r.outcome == Encounter::captured;
            scattered += r.outcome == Encounter::scattered;
            drift = std::max(drift, r.energy_drift);
        }
        out.text("sweep.csv", csv);
        j["speed"] = s.speed;
        j["captured"] = captured;
        j["scattered"] = scattered;
        j["max_energy_drift"] = drift;
        out.json("sweep.json", j);
    } else {
        const double m = s.pair.M_A + s.pair.M_B;
        const double speed = s.speed > 0.0 ? s.speed : circular_speed(s.separation, s.pair, f);
        TwoBodyState init;
        init.x_A = {-s.pair.M_B / m * s.separation, 0.0, 0.0};
        init.x_B = {s.pair.M_A / m * s.separation, 0.0, 0.0};
        init.v_A = {0.0, -s.pair.M_B / m * speed, 0.0};
        init.v_B = {0.0, s.pair.M_A / m * speed, 0.0};
        OrbitRun run;
        timer.stage("orbit", [&] { run = simulate_orbit(s.pair, f, init, s.t_end, s.dt, {s.record_stride, 0.0}); });
        io::write_trajectory_csv(out.path("trajectory_A.csv"), run.trajectory, 0);
        io::write_trajectory_csv(out.path("trajectory_B.csv"), run.trajectory, 1);
        j["relative_speed"] = speed;
        j["energy_drift"] = run.energy_drift;
        j["angular_momentum_drift"] = run.angular_momentum_drift;
        j["min_separation"] = run.min_separation;
        j["max_separation"] = run.max_separation;
        out.json("orbit.json", j);
    }
}

bool is_empty_dir(const fs::path& p) { return fs::is_directory(p) && fs::directory_iterator(p) == fs::directory_iterator(); }

}  // namespace

void validate(const Config& cfg) {
    const std::string& kind = cfg.experiment();
    if (kind == "ground-state") {
        grid_from(cfg);
        kernel_from(cfg);
        solver_from(cfg);
    } else if (kind == "evolve") {
        evolve_from(cfg);
    } else if (kind == "dbb-ensemble") {
        dbb_from(cfg);
    } else if (kind == "effective-gravity") {
        gravity_from(cfg);
    } else {
        droplet_from(cfg);
    }
    if (cfg.text("output.dir").empty()) config_error("output.dir", "required");
}

RunReport run(const Config& cfg, const fs::path& out_arg, bool overwrite) {
    validate(cfg);
    const fs::path target = out_arg.empty() ? fs::path(cfg.text("output.dir")) : out_arg;
    std::error_code ec;
    if (fs::exists(target, ec) && !is_empty_dir(target) && !overwrite)
        fail(ErrorCode::IoError, "output directory " + target.string() + " exists and is not empty");
    const fs::path parent = fs::absolute(target).parent_path();
    fs::create_directories(parent, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + parent.string() + ": " + ec.message());

    std::random_device entropy;
    fs::path scratch;
    for (int attempt = 0; attempt < 16 && scratch.empty(); ++attempt) {
        const fs::path candidate = parent / ("." + fs::absolute(target).filename().string() + ".partial-" +
                                             io::hex64((static_cast<std::uint64_t>(entropy()) << 32) | entropy()));
        if (fs::create_directory(candidate, ec)) scratch = candidate;
    }
    if (scratch.empty()) fail(ErrorCode::IoError, "cannot create a scratch directory in " + parent.string());

    try {
        Outputs out(scratch);
        Timer timer;
        const auto t0 = std::chrono::steady_clock::now();
        const std::string& kind = cfg.experiment();
        if (kind == "ground-state") run_ground_state(cfg, out, timer);
        else if (kind == "evolve") run_evolve(cfg, out, timer);
        else if (kind == "dbb-ensemble") run_dbb(cfg, out, timer);
        else if (kind == "effective-gravity") run_gravity(cfg, out, timer);
        else run_droplet(cfg, out, timer);
        const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        RunReport report;
        Json products = Json::array();
        for (const auto& name : out.names()) {
            Product p{name, fs::file_size(scratch / name), io::fnv1a_file(scratch / name)};
            products.push_back({{"path", p.path}, {"bytes", p.bytes}, {"fnv1a64", io::hex64(p.checksum)}});
            report.products.push_back(p);
        }
        Json manifest;
        manifest["tool"] = "sgs";
        manifest["version"] = kVersion;
        manifest["experiment"] = kind;
        manifest["config"] = cfg.resolved();
        manifest["threads"] = thread_count();
        Json timings = timer.json();
        timings["total"] = total;
        manifest["timings_s"] = timings;
        manifest["outputs"] = products;
        io::write_text(scratch / "manifest.json", manifest.dump(2) + "\n");

        if (fs::exists(target)) fs::remove_all(target);
        fs::rename(scratch, target);
        report.output_dir = target;
        return report;
    } catch (...) {
        fs::remove_all(scratch, ec);
        throw;
    }
}

}  // namespace sgs::cli
