#include "spnp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "spnp/assembly.hpp"
#include "spnp/parallel.hpp"
#include "spnp/quadrature.hpp"

namespace spnp {

namespace fs = std::filesystem;

FieldErrors ErrorAccumulator::relative() const {
    double r[3];
    for (int c = 0; c < 3; ++c) r[c] = ref2[c] > 0.0 ? std::sqrt(err2[c] / ref2[c]) : std::sqrt(err2[c]);
    return {r[0], r[1], r[2]};
}

ErrorAccumulator snapshot_errors(const MicroProblem& micro, const MicroState& ms, const MacroProblem& macro,
                                 const MacroState& Ms) {
    const PerforatedMesh& mesh = micro.mesh();
    const DofMap& fd = micro.fluid_dofs();
    const QuadratureRule q = QuadratureRule::triangle7();
    ErrorAccumulator acc;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        if (mesh.phases[t] != Phase::fluid) continue;
        const auto& tr = mesh.triangles[t];
        const P1Element el = p1_element(mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const Vec2 st = q.points[k];
            const double N[3] = {1.0 - st[0] - st[1], st[0], st[1]};
            const Vec2 x = el.map(st);
            double u[3] = {0.0, 0.0, 0.0};
            for (int i = 0; i < 3; ++i) {
                const int d = fd.of_vertex[tr[i]];
                u[0] += N[i] * ms.conc_plus[d];
                u[1] += N[i] * ms.conc_minus[d];
                u[2] += N[i] * ms.potential[tr[i]];
            }
            const double m[3] = {macro.interpolate(Ms.conc_plus, x), macro.interpolate(Ms.conc_minus, x),
                                 macro.interpolate(Ms.potential, x)};
            const double w = 2.0 * el.area * q.weights[k];
            for (int c = 0; c < 3; ++c) {
                acc.err2[c] += w * (u[c] - m[c]) * (u[c] - m[c]);
                acc.ref2[c] += w * m[c] * m[c];
            }
        }
    }
    return acc;
}

namespace {

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

SweepRow sweep_row(const ExperimentConfig& cfg, const PerforatedMesh& mesh, const MacroProblem& macro,
                   const MacroResult& macro_result, int omega_index) {
    SweepRow row;
    row.eps = mesh.epsilon;
    row.omega_index = omega_index;
    row.omega = cfg.omega_sample(omega_index);
    row.equilibrium_residual = macro_result.max_equilibrium_residual;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const MicroProblem micro(mesh, cfg.pnp, cfg.fields, row.omega);
        const MicroResult r = micro.run(cfg.initial_plus, cfg.initial_minus);
        if (r.snapshots.size() != macro_result.snapshots.size())
            throw ConfigError("micro and macro snapshot counts differ");
        ErrorAccumulator st;
        std::vector<ErrorAccumulator> snaps;
        for (std::size_t i = 0; i < r.snapshots.size(); ++i)
            snaps.push_back(snapshot_errors(micro, r.snapshots[i], macro, macro_result.snapshots[i]));
        for (std::size_t i = 1; i < snaps.size(); ++i) {
            const double dt = r.snapshots[i].t - r.snapshots[i - 1].t;
            for (int c = 0; c < 3; ++c) {
                st.err2[c] += 0.5 * dt * (snaps[i - 1].err2[c] + snaps[i].err2[c]);
                st.ref2[c] += 0.5 * dt * (snaps[i - 1].ref2[c] + snaps[i].ref2[c]);
            }
        }
        if (snaps.size() == 1) st = snaps[0];
        row.final_time = snaps.back().relative();
        row.space_time = st.relative();
        row.mass_drift_max = r.max_mass_drift;
        row.pi_drift_max = r.max_pi_drift;
        row.identity_residual_max = r.max_identity_residual;
        const PnpParams& p = cfg.pnp;
        const auto& led = r.ledger.rows;
        const double target = p.F_const * (p.z_plus * led.front().mass_plus - p.z_minus * led.front().mass_minus);
        for (const auto& l : led)
            row.micro_equilibrium_residual = std::max(row.micro_equilibrium_residual, std::abs(l.pi_eps - target));
        row.ok_runs = 1;
    } catch (const std::exception& e) {
        row.status = "failed: " + sanitize(e.what());
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

TemplateCell template_cell(const ExperimentConfig& cfg) { return build_template_cell(cfg.geometry); }

EffectiveCoefficients run_effective(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    return compute_effective(template_cell(cfg), cfg.fields, cfg.omega_grid_K, {0.0, 0.0}, threads);
}

SweepReport run_sweep(const ExperimentConfig& cfg, int threads) {
    cfg.validate();
    SweepReport rep;
    const TemplateCell cell = template_cell(cfg);
    rep.effective = compute_effective(cell, cfg.fields, cfg.omega_grid_K, {0.0, 0.0}, threads);
    const MacroProblem macro(cfg.macro_N, rep.effective, cfg.pnp, cfg.fields.gamma);
    const MacroResult macro_result = macro.run(cfg.initial_plus, cfg.initial_minus);

    const std::vector<int>& ns = cfg.eps_reciprocals;
    std::vector<PerforatedMesh> meshes;
    for (int n : ns) meshes.push_back(tile_domain(cell, n));
    const int M = cfg.n_omega_samples;
    const int total = static_cast<int>(ns.size()) * M;
    std::vector<SweepRow> runs(total);
    parallel_for(total, threads, [&](int i) { runs[i] = sweep_row(cfg, meshes[i / M], macro, macro_result, i % M); });

    for (std::size_t e = 0; e < ns.size(); ++e) {
        SweepRow mean;
        mean.eps = 1.0 / ns[e];
        mean.equilibrium_residual = macro_result.max_equilibrium_residual;
        std::vector<FieldErrors> ok;
        for (int k = 0; k < M; ++k) {
            const SweepRow& r = runs[e * M + k];
            rep.rows.push_back(r);
            mean.wall_time += r.wall_time;
            if (r.status != "ok") continue;
            ok.push_back(r.final_time);
            mean.space_time.conc_plus += r.space_time.conc_plus;
            mean.space_time.conc_minus += r.space_time.conc_minus;
            mean.space_time.potential += r.space_time.potential;
            mean.mass_drift_max = std::max(mean.mass_drift_max, r.mass_drift_max);
            mean.pi_drift_max = std::max(mean.pi_drift_max, r.pi_drift_max);
            mean.identity_residual_max = std::max(mean.identity_residual_max, r.identity_residual_max);
            mean.micro_equilibrium_residual = std::max(mean.micro_equilibrium_residual, r.micro_equilibrium_residual);
        }
        const int n = static_cast<int>(ok.size());
        mean.ok_runs = n;
        if (n == 0) {
            mean.status = "failed: no successful runs";
        } else {
            if (n < M) mean.status = "partial " + std::to_string(n) + "/" + std::to_string(M);
            double* sum[3] = {&mean.final_time.conc_plus, &mean.final_time.conc_minus, &mean.final_time.potential};
            double* se[3] = {&mean.stderr_final.conc_plus, &mean.stderr_final.conc_minus, &mean.stderr_final.potential};
            double* stm[3] = {&mean.space_time.conc_plus, &mean.space_time.conc_minus, &mean.space_time.potential};
            for (int c = 0; c < 3; ++c) {
                auto get = [c](const FieldErrors& f) { return c == 0 ? f.conc_plus : c == 1 ? f.conc_minus : f.potential; };
                double s = 0.0;
                for (const auto& f : ok) s += get(f);
                const double m = s / n;
                double v = 0.0;
                for (const auto& f : ok) v += (get(f) - m) * (get(f) - m);
                *sum[c] = m;
                *se[c] = n > 1 ? std::sqrt(v / (n - 1) / n) : 0.0;
                *stm[c] /= n;
            }
        }
        rep.rows.push_back(mean);
    }
    return rep;
}

void SweepReport::write_csv(std::ostream& os, bool with_timing) const {
    os << "eps,omega_index,omega1,omega2,err_conc_plus,err_conc_minus,err_potential,st_err_conc_plus,"
          "st_err_conc_minus,st_err_potential,stderr_conc_plus,stderr_conc_minus,stderr_potential,mass_drift_max,"
          "pi_drift_max,identity_residual_max,equilibrium_residual,micro_equilibrium_residual,status";
    if (with_timing) os << ",wall_time";
    os << '\n';
    for (const auto& r : rows) {
        const bool mean = r.omega_index < 0;
        os << fmt(r.eps) << ',' << (mean ? std::string("mean") : std::to_string(r.omega_index)) << ','
           << (mean ? std::string() : fmt(r.omega[0])) << ',' << (mean ? std::string() : fmt(r.omega[1])) << ','
           << fmt(r.final_time.conc_plus) << ',' << fmt(r.final_time.conc_minus) << ',' << fmt(r.final_time.potential)
           << ',' << fmt(r.space_time.conc_plus) << ',' << fmt(r.space_time.conc_minus) << ','
           << fmt(r.space_time.potential) << ',' << fmt(r.stderr_final.conc_plus) << ','
           << fmt(r.stderr_final.conc_minus) << ',' << fmt(r.stderr_final.potential) << ',' << fmt(r.mass_drift_max)
           << ',' << fmt(r.pi_drift_max) << ',' << fmt(r.identity_residual_max) << ','
           << fmt(r.equilibrium_residual) << ',' << fmt(r.micro_equilibrium_residual) << ',' << r.status;
        if (with_timing) os << ',' << fmt(r.wall_time);
        os << '\n';
    }
}

void SweepReport::write_timing_csv(std::ostream& os) const {
    os << "eps,omega_index,wall_time\n";
    for (const auto& r : rows)
        os << fmt(r.eps) << ',' << (r.omega_index < 0 ? std::string("total") : std::to_string(r.omega_index)) << ','
           << fmt(r.wall_time) << '\n';
}

const SweepRow* SweepReport::mean_row(double eps) const {
    for (const auto& r : rows)
        if (r.omega_index < 0 && std::abs(r.eps - eps) < 1e-12) return &r;
    return nullptr;
}

void write_plotdata(std::ostream& os, const SweepReport& report, PlotQuantity q) {
    os << "# eps\tmean_err\tstderr\n";
    for (const auto& r : report.rows) {
        if (r.omega_index >= 0 || r.ok_runs == 0) continue;
        const double m = q == PlotQuantity::conc_plus    ? r.final_time.conc_plus
                         : q == PlotQuantity::conc_minus ? r.final_time.conc_minus
                                                         : r.final_time.potential;
        const double s = q == PlotQuantity::conc_plus    ? r.stderr_final.conc_plus
                         : q == PlotQuantity::conc_minus ? r.stderr_final.conc_minus
                                                         : r.stderr_final.potential;
        os << fmt(r.eps) << '\t' << fmt(m) << '\t' << fmt(s) << '\n';
    }
}

TwoScaleResult run_twoscale(const ExperimentConfig& cfg) {
    cfg.validate();
    TwoScaleOptions opt;
    opt.M = cfg.twoscale_M;
    opt.seed = cfg.seed;
    opt.points_per_period = cfg.twoscale_points_per_period;
    opt.inclusion_radius = cfg.geometry.inclusion_radius;
    opt.n_interface_segments = cfg.geometry.n_interface_segments;
    opt.target_edge_length = cfg.geometry.target_edge_length;
    TwoScaleResult res;
    const auto suite = integrand_suite();
    for (OscillationOp op : {OscillationOp::volume, OscillationOp::surface})
        for (const auto& a : suite) res.reports.push_back(convergence_table(op, a, cfg.twoscale_eps_list(), opt));
    return res;
}

// ---------------------------------------------------------------------------

namespace {

std::string open_out(const ExperimentConfig& cfg, const std::string& name, std::ofstream& out) {
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / name).string();
    out.open(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return path;
}

template <class Writer>
void emit(const ExperimentConfig& cfg, const std::string& name, std::vector<std::string>& files, Writer&& w) {
    std::ofstream out;
    files.push_back(open_out(cfg, name, out));
    w(out);
}

void write_config_used(const ExperimentConfig& cfg, std::vector<std::string>& files) {
    emit(cfg, "config_used.json", files, [&](std::ostream& os) { os << to_json(cfg).dump(2) << '\n'; });
}

}  // namespace

std::vector<std::string> write_mesh_outputs(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::string> files;
    const TemplateCell cell = template_cell(cfg);
    emit(cfg, "template_mesh.txt", files, [&](std::ostream& os) { write_mesh(os, cell); });
    const int n = cfg.micro_eps_reciprocal;
    const PerforatedMesh mesh = tile_domain(cell, n);
    emit(cfg, "mesh_eps_" + std::to_string(n) + ".txt", files, [&](std::ostream& os) { write_mesh(os, mesh); });
    nlohmann::json j;
    j["template"] = {{"vertices", cell.vertices.size()},
                     {"triangles", cell.triangles.size()},
                     {"fluid_area", cell.fluid_area()},
                     {"solid_area", cell.solid_area()},
                     {"interface_length", cell.interface_length()},
                     {"min_angle_degrees", cell.min_angle_degrees()},
                     {"max_edge_length", cell.max_edge_length()}};
    j["tiled"] = {{"eps", mesh.epsilon},
                  {"vertices", mesh.vertices.size()},
                  {"triangles", mesh.triangles.size()},
                  {"fluid_area", mesh.fluid_area()},
                  {"solid_area", mesh.solid_area()},
                  {"interface_length", mesh.interface_length()}};
    emit(cfg, "mesh_summary.json", files, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return files;
}

std::vector<std::string> write_twoscale_outputs(const ExperimentConfig& cfg) {
    std::vector<std::string> files;
    const TwoScaleResult res = run_twoscale(cfg);
    for (const auto& r : res.reports)
        emit(cfg, "twoscale_" + r.op + "_" + r.integrand + ".csv", files, [&](std::ostream& os) { r.write_csv(os); });
    return files;
}

std::vector<std::string> write_micro_outputs(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::string> files;
    const TemplateCell cell = template_cell(cfg);
    const PerforatedMesh mesh = tile_domain(cell, cfg.micro_eps_reciprocal);
    const Vec2 omega = cfg.omega_sample(cfg.micro_omega_index);
    const MicroProblem micro(mesh, cfg.pnp, cfg.fields, omega);
    MicroResult r;
    try {
        r = micro.run(cfg.initial_plus, cfg.initial_minus);
    } catch (const MicroRunError& e) {
        emit(cfg, "micro_ledger.csv", files, [&](std::ostream& os) { e.partial_ledger().write_csv(os); });
        throw;
    }
    emit(cfg, "micro_ledger.csv", files, [&](std::ostream& os) { r.ledger.write_csv(os); });
    for (std::size_t i = 0; i < r.snapshots.size(); ++i)
        emit(cfg, "micro_snapshot_" + std::to_string(i) + ".csv", files,
             [&](std::ostream& os) { write_snapshot_csv(os, micro, r.snapshots[i]); });
    nlohmann::json j = {{"eps", mesh.epsilon},
                        {"omega", {omega[0], omega[1]}},
                        {"dt_cfl_min", r.dt_cfl_min},
                        {"negativity_flag", r.negativity_flag},
                        {"max_mass_drift", r.max_mass_drift},
                        {"max_pi_drift", r.max_pi_drift},
                        {"max_identity_residual", r.max_identity_residual}};
    emit(cfg, "micro_summary.json", files, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    write_config_used(cfg, files);
    return files;
}

std::vector<std::string> write_effective_outputs(const ExperimentConfig& cfg, int threads) {
    std::vector<std::string> files;
    const EffectiveCoefficients eff = run_effective(cfg, threads);
    emit(cfg, "effective.json", files, [&](std::ostream& os) { write_effective_json(os, eff); });
    return files;
}

std::vector<std::string> write_macro_outputs(const ExperimentConfig& cfg, int threads) {
    std::vector<std::string> files;
    const EffectiveCoefficients eff = run_effective(cfg, threads);
    const MacroProblem macro(cfg.macro_N, eff, cfg.pnp, cfg.fields.gamma);
    const MacroResult r = macro.run(cfg.initial_plus, cfg.initial_minus);
    emit(cfg, "effective.json", files, [&](std::ostream& os) { write_effective_json(os, eff); });
    const int n_steps = static_cast<int>(r.pi_macro.size()) - 1;
    emit(cfg, "macro_ledger.csv", files, [&](std::ostream& os) {
        os << "t,mass_plus,mass_minus,pi_macro\n";
        for (int k = 0; k <= n_steps; ++k) {
            const double t = n_steps > 0 ? cfg.pnp.t_final * k / n_steps : 0.0;
            os << fmt(t) << ',' << fmt(r.mass_plus[k]) << ',' << fmt(r.mass_minus[k]) << ',' << fmt(r.pi_macro[k]) << '\n';
        }
    });
    for (std::size_t i = 0; i < r.snapshots.size(); ++i)
        emit(cfg, "macro_snapshot_" + std::to_string(i) + ".csv", files, [&](std::ostream& os) {
            const MacroState& s = r.snapshots[i];
            os << "vertex_id,x,y,conc_plus,conc_minus,potential\n";
            for (std::size_t v = 0; v < macro.vertices().size(); ++v)
                os << v << ',' << fmt(macro.vertices()[v][0]) << ',' << fmt(macro.vertices()[v][1]) << ','
                   << fmt(s.conc_plus[v]) << ',' << fmt(s.conc_minus[v]) << ',' << fmt(s.potential[v]) << '\n';
        });
    nlohmann::json j = {{"max_mass_drift", r.max_mass_drift}, {"max_equilibrium_residual", r.max_equilibrium_residual}};
    emit(cfg, "macro_summary.json", files, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    return files;
}

std::vector<std::string> write_sweep_outputs(const ExperimentConfig& cfg, int threads, bool deterministic) {
    std::vector<std::string> files;
    const SweepReport rep = run_sweep(cfg, threads);
    emit(cfg, "sweep.csv", files, [&](std::ostream& os) { rep.write_csv(os, !deterministic); });
    emit(cfg, "sweep_timing.csv", files, [&](std::ostream& os) { rep.write_timing_csv(os); });
    emit(cfg, "effective.json", files, [&](std::ostream& os) { write_effective_json(os, rep.effective); });
    const std::pair<PlotQuantity, const char*> plots[] = {{PlotQuantity::conc_plus, "plot_conc_plus.dat"},
                                                          {PlotQuantity::conc_minus, "plot_conc_minus.dat"},
                                                          {PlotQuantity::potential, "plot_potential.dat"}};
    for (const auto& [q, name] : plots) emit(cfg, name, files, [&](std::ostream& os) { write_plotdata(os, rep, q); });
    write_config_used(cfg, files);
    return files;
}

}  // namespace spnp
