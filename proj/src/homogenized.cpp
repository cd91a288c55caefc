#include "spnp/homogenized.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "json.hpp"
#include "spnp/assembly.hpp"
#include "spnp/parallel.hpp"
#include "spnp/quadrature.hpp"

namespace spnp {

namespace {

constexpr double kCellTol = 1e-12;

/// Periodic dofs on the vertices touched by `tris`.
DofMap periodic_dofs(const TemplateCell& cell, const std::vector<int>& tris) {
    int nclass = 0;
    const std::vector<int> cls = cell.periodic_classes(&nclass);
    std::vector<int> class_dof(nclass, -1);
    std::vector<char> used(nclass, 0);
    for (int t : tris)
        for (int v : cell.triangles[t]) used[cls[v]] = 1;
    DofMap d;
    for (int c = 0; c < nclass; ++c)
        if (used[c]) class_dof[c] = d.count++;
    d.of_vertex.resize(cell.vertices.size());
    for (std::size_t v = 0; v < cell.vertices.size(); ++v) d.of_vertex[v] = class_dof[cls[v]];
    return d;
}

/// Flushes cancellation noise to exact zero and projects out the constant.
void clean_rhs(Vector& rhs, const Vector& magnitude) {
    double s = 0.0;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        if (std::abs(rhs[i]) <= 1e-13 * magnitude[i]) rhs[i] = 0.0;
        s += rhs[i];
    }
    for (double& v : rhs) v -= s / static_cast<double>(rhs.size());
}

struct PeriodicSolve {
    std::array<Vector, 2> vertex_values;
    double residual = 0.0;
};

/// Solves sum_T a_T grad u . grad phi_i = -sum_T a_T g_T^k . grad phi_i (k = 0, 1),
/// periodic, zero mean over the region.
PeriodicSolve periodic_scalar_solve(const TemplateCell& cell, const std::vector<int>& tris,
                                    const std::vector<double>& a, const std::array<std::vector<Vec2>, 2>& g) {
    const DofMap dofs = periodic_dofs(cell, tris);
    std::vector<P1Element> el;
    el.reserve(tris.size());
    for (int t : tris) {
        const auto& tri = cell.triangles[t];
        el.push_back(p1_element(cell.vertices[tri[0]], cell.vertices[tri[1]], cell.vertices[tri[2]]));
    }
    TripletBuilder kb(dofs.count);
    std::array<Vector, 2> rhs{Vector(dofs.count, 0.0), Vector(dofs.count, 0.0)};
    std::array<Vector, 2> magnitude = rhs;
    for (std::size_t e = 0; e < tris.size(); ++e) {
        const auto& tri = cell.triangles[tris[e]];
        const double at = a[tris[e]];
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.of_vertex[tri[i]];
            for (int j = 0; j < 3; ++j)
                kb.add(di, dofs.of_vertex[tri[j]], at * dot(el[e].grad[i], el[e].grad[j]));
            for (int k = 0; k < 2; ++k) {
                const double c = at * dot(g[k][tris[e]], el[e].grad[i]);
                rhs[k][di] -= c;
                magnitude[k][di] += std::abs(c);
            }
        }
    }
    const SparseMatrix K = kb.build();
    SolverOptions opt;
    opt.tol = kCellTol;
    opt.max_iter = 100000;
    opt.deflate_constant = true;
    PeriodicSolve out;
    double region_area = 0.0;
    for (const auto& e : el) region_area += e.area;
    for (int k = 0; k < 2; ++k) {
        clean_rhs(rhs[k], magnitude[k]);
        const SolveResult r = cg_solve(K, rhs[k], opt);
        out.residual = std::max(out.residual, r.residual);
        // zero mean over the region (P1 integral)
        double mean = 0.0;
        for (std::size_t e = 0; e < tris.size(); ++e)
            for (int v : cell.triangles[tris[e]]) mean += el[e].area / 3.0 * r.x[dofs.of_vertex[v]];
        mean /= region_area;
        out.vertex_values[k].assign(cell.vertices.size(), 0.0);
        for (std::size_t v = 0; v < cell.vertices.size(); ++v)
            if (dofs.of_vertex[v] >= 0) out.vertex_values[k][v] = r.x[dofs.of_vertex[v]] - mean;
    }
    return out;
}

Vec2 tri_gradient(const TemplateCell& cell, int t, const Vector& u) {
    const auto& tri = cell.triangles[t];
    const P1Element e = p1_element(cell.vertices[tri[0]], cell.vertices[tri[1]], cell.vertices[tri[2]]);
    Vec2 g{0.0, 0.0};
    for (int i = 0; i < 3; ++i) g = g + u[tri[i]] * e.grad[i];
    return g;
}

std::vector<int> phase_triangles(const TemplateCell& cell, Phase ph) {
    std::vector<int> out;
    for (std::size_t t = 0; t < cell.triangles.size(); ++t)
        if (cell.phases[t] == ph) out.push_back(static_cast<int>(t));
    return out;
}

std::array<std::vector<Vec2>, 2> unit_directions(std::size_t n) {
    return {std::vector<Vec2>(n, Vec2{1.0, 0.0}), std::vector<Vec2>(n, Vec2{0.0, 1.0})};
}

Mat2 energy_tensor(const std::vector<int>& tris, const std::vector<double>& a,
                   const std::array<std::vector<Vec2>, 2>& left, const std::array<std::vector<Vec2>, 2>& right) {
    Mat2 m = zero_mat2();
    for (int t : tris)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) m[j][k] += a[t] * dot(left[j][t], right[k][t]);
    return m;
}

}  // namespace

CellProblemSolution solve_species_cell(const TemplateCell& cell) {
    const std::vector<int> fluid = phase_triangles(cell, Phase::fluid);
    std::vector<double> a(cell.triangles.size(), 0.0);
    for (int t : fluid) a[t] = cell.triangle_area(t);
    const auto dirs = unit_directions(cell.triangles.size());
    const PeriodicSolve ps = periodic_scalar_solve(cell, fluid, a, dirs);
    CellProblemSolution sol;
    sol.kind = "species-y";
    sol.corrector = ps.vertex_values;
    sol.residual = ps.residual;
    std::array<std::vector<Vec2>, 2> full = dirs;
    for (int k = 0; k < 2; ++k)
        for (int t : fluid) full[k][t] = dirs[k][t] + tri_gradient(cell, t, ps.vertex_values[k]);
    sol.tensor = energy_tensor(fluid, a, full, full);
    return sol;
}

CellProblemSolution solve_full_cell(const TemplateCell& cell, const std::vector<double>& coef_integrals,
                                    const std::string& kind) {
    const std::vector<int> all = all_indices(cell.triangles.size());
    const auto dirs = unit_directions(cell.triangles.size());
    const PeriodicSolve ps = periodic_scalar_solve(cell, all, coef_integrals, dirs);
    CellProblemSolution sol;
    sol.kind = kind;
    sol.corrector = ps.vertex_values;
    sol.residual = ps.residual;
    std::array<std::vector<Vec2>, 2> full = dirs;
    for (int k = 0; k < 2; ++k)
        for (int t : all) full[k][t] = dirs[k][t] + tri_gradient(cell, t, ps.vertex_values[k]);
    sol.tensor = energy_tensor(all, coef_integrals, full, full);
    return sol;
}

CellProblemSolution solve_torus_cell(const std::vector<Mat2>& nodal, int K, const std::string& kind) {
    if (K < 2) throw ConfigError("torus grid needs K >= 2");
    if (static_cast<int>(nodal.size()) != K * K) throw ConfigError("torus coefficient size mismatch");
    const double h = 1.0 / K;
    auto node = [K](int a, int b) { return ((b % K + K) % K) * K + ((a % K + K) % K); };
    // reference gradients on the two triangles of a square: lower (00,10,11), upper (00,11,01)
    struct Tri {
        std::array<int, 3> n;
        std::array<Vec2, 3> grad;
    };
    std::vector<Tri> tris;
    tris.reserve(2 * K * K);
    const P1Element lower = p1_element({0, 0}, {h, 0}, {h, h});
    const P1Element upper = p1_element({0, 0}, {h, h}, {0, h});
    const double area = 0.5 * h * h;
    for (int b = 0; b < K; ++b)
        for (int a = 0; a < K; ++a) {
            tris.push_back({{node(a, b), node(a + 1, b), node(a + 1, b + 1)}, lower.grad});
            tris.push_back({{node(a, b), node(a + 1, b + 1), node(a, b + 1)}, upper.grad});
        }
    std::vector<Mat2> coef(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        Mat2 m = zero_mat2();
        for (int v : tris[t].n)
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) m[r][c] += nodal[v][r][c] / 3.0;
        coef[t] = m;
    }
    const int n = K * K;
    TripletBuilder kb(n);
    std::array<Vector, 2> rhs{Vector(n, 0.0), Vector(n, 0.0)};
    std::array<Vector, 2> magnitude{Vector(n, 0.0), Vector(n, 0.0)};
    const std::array<Vec2, 2> e = {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    for (std::size_t t = 0; t < tris.size(); ++t) {
        const auto& tr = tris[t];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) kb.add(tr.n[i], tr.n[j], area * dot(mat_vec(coef[t], tr.grad[j]), tr.grad[i]));
            for (int k = 0; k < 2; ++k) {
                const double c = area * dot(mat_vec(coef[t], e[k]), tr.grad[i]);
                rhs[k][tr.n[i]] -= c;
                magnitude[k][tr.n[i]] += std::abs(c);
            }
        }
    }
    const SparseMatrix Km = kb.build();
    SolverOptions opt;
    opt.tol = kCellTol;
    opt.max_iter = 100000;
    opt.deflate_constant = true;
    CellProblemSolution sol;
    sol.kind = kind;
    for (int k = 0; k < 2; ++k) {
        clean_rhs(rhs[k], magnitude[k]);
        const SolveResult r = cg_solve(Km, rhs[k], opt);
        sol.residual = std::max(sol.residual, r.residual);
        sol.corrector[k] = r.x;
        double mean = 0.0;
        for (double v : sol.corrector[k]) mean += v;
        mean /= n;
        for (double& v : sol.corrector[k]) v -= mean;
    }
    Mat2 m = zero_mat2();
    for (std::size_t t = 0; t < tris.size(); ++t) {
        std::array<Vec2, 2> full;
        for (int k = 0; k < 2; ++k) {
            Vec2 g{0.0, 0.0};
            for (int i = 0; i < 3; ++i) g = g + sol.corrector[k][tris[t].n[i]] * tris[t].grad[i];
            full[k] = e[k] + g;
        }
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) m[j][k] += area * dot(mat_vec(coef[t], full[k]), full[j]);
    }
    sol.tensor = m;
    return sol;
}

namespace {

std::vector<double> phase_integrals(const TemplateCell& cell, const std::function<double(Phase, const Vec2&)>& f) {
    const QuadratureRule q = QuadratureRule::triangle7();
    std::vector<double> out(cell.triangles.size());
    for (std::size_t t = 0; t < cell.triangles.size(); ++t) {
        const auto& tri = cell.triangles[t];
        const P1Element e = p1_element(cell.vertices[tri[0]], cell.vertices[tri[1]], cell.vertices[tri[2]]);
        double s = 0.0;
        for (std::size_t k = 0; k < q.points.size(); ++k) s += q.weights[k] * f(cell.phases[t], e.map(q.points[k]));
        out[t] = 2.0 * e.area * s;
    }
    return out;
}

}  // namespace

std::vector<double> dielectric_integrals(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                         const TemplateCell& cell, const Vec2& omega) {
    return phase_integrals(cell, [&](Phase ph, const Vec2& y) {
        return (ph == Phase::fluid ? rho_f : rho_s).value(omega, y);
    });
}

std::vector<double> dielectric_mean_integrals(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                              const TemplateCell& cell) {
    return phase_integrals(cell, [&](Phase ph, const Vec2& y) {
        return (ph == Phase::fluid ? rho_f : rho_s).omega_mean(y);
    });
}

DielectricResult solve_dielectric_cells(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                        const TemplateCell& cell, int K, const Vec2& offset, int threads) {
    rho_f.validate();
    rho_s.validate();
    const int fmax = std::max(rho_f.max_omega_frequency(), rho_s.max_omega_frequency());
    const bool random = rho_f.has_omega_modes() || rho_s.has_omega_modes();
    if (K < 2 || (random && K < 4 * fmax))
        throw ConfigError("omega grid K = " + std::to_string(K) + " too coarse; need K >= " +
                          std::to_string(std::max(2, 4 * fmax)));
    DielectricResult res;
    res.K = K;
    res.offset = offset;
    res.theta_star.resize(static_cast<std::size_t>(K) * K);

    // The omega-dependent part of each phase is a constant per omega, so the
    // per-triangle integrals split into a y-part and |T| times that constant.
    const std::vector<double> ypart = dielectric_mean_integrals(rho_f, rho_s, cell);
    std::vector<double> areas(cell.triangles.size());
    for (std::size_t t = 0; t < areas.size(); ++t) areas[t] = cell.triangle_area(static_cast<int>(t));

    auto omega_shift = [&](const CoefficientField& f, const Vec2& om) {
        return f.value(om, {0.0, 0.0}) - f.omega_mean({0.0, 0.0});
    };
    if (!random) {
        const CellProblemSolution s = solve_full_cell(cell, ypart, "dielectric-y");
        std::fill(res.theta_star.begin(), res.theta_star.end(), s.tensor);
        res.stage1_residual = s.residual;
        res.stage1_solves = 1;
        res.theta_eff = s.tensor;
        return res;
    }
    std::vector<double> residuals(static_cast<std::size_t>(K) * K, 0.0);
    parallel_for(K * K, threads, [&](int node) {
        const int al = node % K, b = node / K;
        const Vec2 om = shift(offset, {static_cast<double>(al) / K, static_cast<double>(b) / K});
        const double sf = omega_shift(rho_f, om), ss = omega_shift(rho_s, om);
        std::vector<double> a(ypart.size());
        for (std::size_t t = 0; t < a.size(); ++t)
            a[t] = ypart[t] + areas[t] * (cell.phases[t] == Phase::fluid ? sf : ss);
        const CellProblemSolution s = solve_full_cell(cell, a, "dielectric-y");
        res.theta_star[node] = s.tensor;
        residuals[node] = s.residual;
    });
    for (double r : residuals) res.stage1_residual = std::max(res.stage1_residual, r);
    res.stage1_solves = K * K;
    const CellProblemSolution s2 = solve_torus_cell(res.theta_star, K, "dielectric-omega");
    res.stage2_residual = s2.residual;
    res.theta_eff = s2.tensor;
    return res;
}

CellProblemSolution solve_drift_cell(const TemplateCell& cell, const CellProblemSolution& species,
                                     const CellProblemSolution& dielectric_y) {
    const std::vector<int> fluid = phase_triangles(cell, Phase::fluid);
    std::vector<double> a(cell.triangles.size(), 0.0);
    for (int t : fluid) a[t] = cell.triangle_area(t);
    auto dirs = unit_directions(cell.triangles.size());
    std::array<std::vector<Vec2>, 2> drive = dirs;
    for (int k = 0; k < 2; ++k)
        for (int t : fluid) drive[k][t] = dirs[k][t] + tri_gradient(cell, t, dielectric_y.corrector[k]);
    const PeriodicSolve ps = periodic_scalar_solve(cell, fluid, a, drive);
    CellProblemSolution sol;
    sol.kind = "drift-y";
    sol.corrector = ps.vertex_values;
    sol.residual = ps.residual;
    std::array<std::vector<Vec2>, 2> left = dirs, right = dirs;
    for (int k = 0; k < 2; ++k)
        for (int t : fluid) {
            left[k][t] = dirs[k][t] + tri_gradient(cell, t, species.corrector[k]);
            right[k][t] = drive[k][t] + tri_gradient(cell, t, ps.vertex_values[k]);
        }
    sol.tensor = energy_tensor(fluid, a, left, right);
    return sol;
}

namespace {

double torus_corrector_norm(const CellProblemSolution& s, int K) {
    double m = 0.0;
    for (int k = 0; k < 2; ++k) {
        double acc = 0.0;
        for (double v : s.corrector[k]) acc += v * v;
        m = std::max(m, std::sqrt(acc / (static_cast<double>(K) * K)));
    }
    return m;
}

}  // namespace

double omega_stage_species(const Mat2& A, int K) {
    const std::vector<Mat2> nodal(static_cast<std::size_t>(K) * K, A);
    return torus_corrector_norm(solve_torus_cell(nodal, K, "species-omega"), K);
}

double omega_stage_species_injected(const std::vector<Mat2>& nodal_coefficient, int K) {
    return torus_corrector_norm(solve_torus_cell(nodal_coefficient, K, "species-omega"), K);
}

double surface_factor(const CoefficientField& eta, const TemplateCell& cell) {
    const QuadratureRule q = QuadratureRule::edge_gauss(8);
    double s = 0.0;
    for (const auto& e : cell.interface_edges) {
        const Vec2 &p0 = cell.vertices[e[0]], &p1 = cell.vertices[e[1]];
        const double len = norm(p1 - p0);
        for (std::size_t k = 0; k < q.points.size(); ++k) s += len * q.weights[k] * eta.omega_mean(p0 + q.points[k][0] * (p1 - p0));
    }
    return s;
}

EffectiveCoefficients compute_effective(const TemplateCell& cell, const MediumFields& fields, int K,
                                        const Vec2& omega_offset, int threads) {
    fields.validate();
    EffectiveCoefficients eff;
    eff.theta = cell.fluid_area();
    eff.template_vertices = static_cast<int>(cell.vertices.size());
    eff.template_triangles = static_cast<int>(cell.triangles.size());
    eff.K = K;
    eff.omega_offset = omega_offset;

    const CellProblemSolution species = solve_species_cell(cell);
    eff.A_hom = species.tensor;
    eff.species_residual = species.residual;

    const DielectricResult diel = solve_dielectric_cells(fields.rho_f, fields.rho_s, cell, K, omega_offset, threads);
    eff.theta_eff = diel.theta_eff;
    eff.dielectric_residual = std::max(diel.stage1_residual, diel.stage2_residual);

    const CellProblemSolution w =
        solve_full_cell(cell, dielectric_mean_integrals(fields.rho_f, fields.rho_s, cell), "dielectric-y");
    const CellProblemSolution drift = solve_drift_cell(cell, species, w);
    eff.B_hom = drift.tensor;
    eff.drift_residual = std::max(w.residual, drift.residual);

    eff.s_bar = surface_factor(fields.eta, cell);
    return eff;
}

void write_effective_json(std::ostream& os, const EffectiveCoefficients& eff) {
    auto mat = [](const Mat2& m) { return nlohmann::json::array({{m[0][0], m[0][1]}, {m[1][0], m[1][1]}}); };
    nlohmann::json j;
    j["theta"] = eff.theta;
    j["A_hom"] = mat(eff.A_hom);
    j["B_hom"] = mat(eff.B_hom);
    j["theta_eff"] = mat(eff.theta_eff);
    j["s_bar"] = eff.s_bar;
    j["provenance"] = {{"template_vertices", eff.template_vertices},
                       {"template_triangles", eff.template_triangles},
                       {"omega_grid_K", eff.K},
                       {"omega_offset", {eff.omega_offset[0], eff.omega_offset[1]}},
                       {"species_residual", eff.species_residual},
                       {"dielectric_residual", eff.dielectric_residual},
                       {"drift_residual", eff.drift_residual}};
    os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

MacroProblem::MacroProblem(int N, const EffectiveCoefficients& eff, const PnpParams& params,
                           const GammaFunction& gamma)
    : N_(N), eff_(eff) {
    if (N < 1) throw ConfigError("macro grid N must be >= 1");
    const int np = N + 1;
    vertices_.resize(static_cast<std::size_t>(np) * np);
    for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) vertices_[j * np + i] = {static_cast<double>(i) / N, static_cast<double>(j) / N};
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const int v00 = j * np + i, v10 = v00 + 1, v01 = v00 + np, v11 = v01 + 1;
            triangles_.push_back({v00, v10, v11});
            triangles_.push_back({v00, v11, v01});
        }
    const int nv = static_cast<int>(vertices_.size());
    engine_.params = params;
    engine_.gamma = gamma;
    engine_.n_pot = nv;
    engine_.n_conc = nv;
    engine_.charge_scale = eff.theta;
    engine_.diffusion_tensor = eff.A_hom;
    engine_.drift_tensor = eff.B_hom;
    engine_.species_mass.assign(nv, 0.0);
    const QuadratureRule q3 = QuadratureRule::triangle3();
    for (const auto& tri : triangles_) {
        const P1Element e = p1_element(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
        PnpElement el;
        for (int i = 0; i < 3; ++i) {
            el.conc[i] = tri[i];
            el.pot[i] = tri[i];
            el.grad[i] = e.grad[i];
            engine_.species_mass[tri[i]] += eff.theta * e.area / 3.0;
        }
        el.area = e.area;
        engine_.elements.push_back(el);
        if (eff.s_bar != 0.0) {
            for (std::size_t k = 0; k < q3.points.size(); ++k) {
                const Vec2 st = q3.points[k];
                ReactionPoint rp;
                rp.dof = tri;
                rp.shape = {1.0 - st[0] - st[1], st[0], st[1]};
                rp.weight = eff.s_bar * 2.0 * e.area * q3.weights[k];
                engine_.reaction.push_back(rp);
            }
        }
    }
    const Mat2 te = eff.theta_eff;
    engine_.potential_stiffness = assemble_stiffness_tensor(
        vertices_, triangles_, all_indices(triangles_.size()), DofMap::identity(nv),
        [te](const Vec2&) { return te; }, QuadratureRule::triangle3());
    engine_.finalize();
}

MacroState MacroProblem::initial_condition(const InitialProfile& plus, const InitialProfile& minus) const {
    plus.validate();
    minus.validate();
    MacroState s;
    const int nv = static_cast<int>(vertices_.size());
    s.conc_plus.resize(nv);
    s.conc_minus.resize(nv);
    for (int v = 0; v < nv; ++v) {
        s.conc_plus[v] = plus(vertices_[v]);
        s.conc_minus[v] = minus(vertices_[v]);
    }
    s.potential.assign(nv, 0.0);
    s.potential = engine_.solve_potential(s.conc_plus, s.conc_minus, s.potential);
    return s;
}

MacroResult MacroProblem::run(const InitialProfile& plus, const InitialProfile& minus) const {
    const PnpParams& p = engine_.params;
    MacroResult res;
    MacroState s = initial_condition(plus, minus);
    const int n_steps = p.t_final > 0 ? static_cast<int>(std::ceil(p.t_final / p.dt - 1e-9)) : 0;
    const double dt = n_steps > 0 ? p.t_final / n_steps : 0.0;
    const std::vector<int> outputs = output_steps(n_steps, p.n_outputs);
    const double m0p = plain_mass(s.conc_plus), m0m = plain_mass(s.conc_minus);
    const double target = p.F_const * eff_.theta * (p.z_minus * m0m - p.z_plus * m0p);
    const double w0p = engine_.mass(s.conc_plus), w0m = engine_.mass(s.conc_minus);
    auto record = [&]() {
        const double pi = pi_macro(s);
        const double wp = engine_.mass(s.conc_plus), wm = engine_.mass(s.conc_minus);
        res.pi_macro.push_back(pi);
        res.mass_plus.push_back(wp);
        res.mass_minus.push_back(wm);
        res.max_mass_drift = std::max({res.max_mass_drift, std::abs(wp - w0p) / std::max(w0p, 1.0),
                                       std::abs(wm - w0m) / std::max(w0m, 1.0)});
        res.max_equilibrium_residual = std::max(res.max_equilibrium_residual, std::abs(pi - target));
    };
    record();
    res.snapshots.push_back(s);
    std::size_t next_out = 1;
    for (int k = 1; k <= n_steps; ++k) {
        const GummelStats st = engine_.step(s.conc_plus, s.conc_minus, s.potential, dt);
        if (!st.converged)
            throw ConvergenceError("macro step " + std::to_string(k) + ": Gummel iteration did not converge",
                                   st.change, st.iterations);
        s.t = k * dt;
        record();
        if (next_out < outputs.size() && outputs[next_out] == k) {
            res.snapshots.push_back(s);
            ++next_out;
        }
    }
    return res;
}

double MacroProblem::interpolate(const Vector& nodal, const Vec2& x) const {
    const double sx = std::clamp(x[0], 0.0, 1.0) * N_, sy = std::clamp(x[1], 0.0, 1.0) * N_;
    const int i = std::min(static_cast<int>(sx), N_ - 1), j = std::min(static_cast<int>(sy), N_ - 1);
    const double a = sx - i, b = sy - j;
    const int np = N_ + 1;
    const double u00 = nodal[j * np + i], u10 = nodal[j * np + i + 1], u01 = nodal[(j + 1) * np + i],
                 u11 = nodal[(j + 1) * np + i + 1];
    if (a >= b) return u00 + a * (u10 - u00) + b * (u11 - u10);
    return u00 + b * (u01 - u00) + a * (u11 - u01);
}

}  // namespace spnp
