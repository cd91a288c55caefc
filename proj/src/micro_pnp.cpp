#include "spnp/micro_pnp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

namespace spnp {

void MediumFields::validate() const {
    rho_f.validate();
    rho_s.validate();
    eta.validate();
    gamma.validate();
}

double InitialProfile::operator()(const Vec2& x) const {
    switch (kind) {
        case Kind::constant: return base;
        case Kind::gaussian: {
            const Vec2 d = x - center;
            return base + amplitude * std::exp(-dot(d, d) / (2.0 * width * width));
        }
        case Kind::cosine: return base + amplitude * std::cos(kPi * k[0] * x[0]) * std::cos(kPi * k[1] * x[1]);
    }
    return base;
}

void InitialProfile::validate() const {
    double lo = base;
    if (kind == Kind::gaussian) lo = std::min(base, base + amplitude);
    if (kind == Kind::cosine) lo = base - std::abs(amplitude);
    if (lo < 0.0) throw ConfigError("initial concentration must be nonnegative");
    if (kind == Kind::gaussian && !(width > 0.0)) throw ConfigError("gaussian width must be positive");
}

InitialProfile InitialProfile::constant(double v) {
    InitialProfile p;
    p.base = v;
    return p;
}

void ConservationLedger::write_csv(std::ostream& os) const {
    os << "t,mass_plus,mass_minus,pi_eps,min_conc,gummel_iters\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.t, r.mass_plus, r.mass_minus, r.pi_eps,
                      r.min_conc, r.gummel_iters);
        os << buf;
    }
}

std::vector<int> output_steps(int n_steps, int n_outputs) {
    std::set<int> s;
    for (int k = 0; k <= n_outputs; ++k)
        s.insert(static_cast<int>(std::llround(static_cast<double>(k) * n_steps / n_outputs)));
    return {s.begin(), s.end()};
}

MicroProblem::MicroProblem(const PerforatedMesh& mesh, const PnpParams& params, const MediumFields& fields,
                           const Vec2& omega)
    : mesh_(&mesh), omega_(omega) {
    fields.validate();
    const double eps = mesh.epsilon;
    const auto& V = mesh.vertices;
    const auto& T = mesh.triangles;
    const int nv = static_cast<int>(V.size());

    std::vector<int> fluid_tris, solid_tris;
    for (int t = 0; t < static_cast<int>(T.size()); ++t)
        (mesh.phases[t] == Phase::fluid ? fluid_tris : solid_tris).push_back(t);
    fluid_ = DofMap::restricted(nv, T, fluid_tris);
    fluid_vertex_.assign(fluid_.count, -1);
    for (int v = 0; v < nv; ++v)
        if (fluid_.of_vertex[v] >= 0) fluid_vertex_[fluid_.of_vertex[v]] = v;

    engine_.params = params;
    engine_.gamma = fields.gamma;
    engine_.n_pot = nv;
    engine_.n_conc = fluid_.count;
    engine_.charge_scale = 1.0;

    // species elements and lumped mass on the fluid region
    engine_.species_mass.assign(fluid_.count, 0.0);
    engine_.elements.reserve(fluid_tris.size());
    for (int t : fluid_tris) {
        const auto& tri = T[t];
        const P1Element e = p1_element(V[tri[0]], V[tri[1]], V[tri[2]]);
        PnpElement el;
        for (int i = 0; i < 3; ++i) {
            el.conc[i] = fluid_.of_vertex[tri[i]];
            el.pot[i] = tri[i];
            el.grad[i] = e.grad[i];
            engine_.species_mass[el.conc[i]] += e.area / 3.0;
        }
        el.area = e.area;
        engine_.elements.push_back(el);
    }

    // dielectric stiffness with the phase-wise oscillating coefficient
    const QuadratureRule q7 = QuadratureRule::triangle7();
    const DofMap all = DofMap::identity(nv);
    auto coef = [&](const CoefficientField& f) {
        return [&f, this, eps](const Vec2& x) { return eval_field_eps(f, omega_, x, eps); };
    };
    const SparseMatrix af = assemble_stiffness(V, T, fluid_tris, all, coef(fields.rho_f), q7);
    if (solid_tris.empty()) {
        engine_.potential_stiffness = af;
    } else {
        const SparseMatrix as = assemble_stiffness(V, T, solid_tris, all, coef(fields.rho_s), q7);
        engine_.potential_stiffness = add(af, 1.0, as, 1.0);
    }

    // interface reaction points: eps * eta^eps, Gauss-4 per facet
    const QuadratureRule g4 = QuadratureRule::edge_gauss(4);
    engine_.reaction.reserve(mesh.interface_edges.size() * g4.points.size());
    for (const auto& e : mesh.interface_edges) {
        const Vec2 &p0 = V[e[0]], &p1 = V[e[1]];
        const double len = norm(p1 - p0);
        if (len == 0.0) throw MeshError("zero-length interface facet");
        for (std::size_t k = 0; k < g4.points.size(); ++k) {
            const double s = g4.points[k][0];
            const Vec2 x = p0 + s * (p1 - p0);
            ReactionPoint rp;
            rp.dof = {e[0], e[1], -1};
            rp.shape = {1.0 - s, s, 0.0};
            rp.weight = eps * len * g4.weights[k] * eval_field_eps(fields.eta, omega_, x, eps);
            engine_.reaction.push_back(rp);
        }
    }
    engine_.finalize();
}

MicroState MicroProblem::initial_condition(const InitialProfile& plus, const InitialProfile& minus) const {
    plus.validate();
    minus.validate();
    MicroState s;
    s.omega = omega_;
    s.conc_plus.resize(fluid_.count);
    s.conc_minus.resize(fluid_.count);
    for (int d = 0; d < fluid_.count; ++d) {
        const Vec2& x = mesh_->vertices[fluid_vertex_[d]];
        s.conc_plus[d] = plus(x);
        s.conc_minus[d] = minus(x);
        if (s.conc_plus[d] < 0.0 || s.conc_minus[d] < 0.0)
            throw ConfigError("initial concentration must be nonnegative");
    }
    s.potential.assign(engine_.n_pot, 0.0);
    solve_poisson(s);
    return s;
}

void MicroProblem::solve_poisson(MicroState& s) const {
    s.potential = engine_.solve_potential(s.conc_plus, s.conc_minus, s.potential);
}

GummelStats MicroProblem::step(MicroState& s, double dt) const {
    GummelStats st = engine_.step(s.conc_plus, s.conc_minus, s.potential, dt);
    s.t += dt;
    return st;
}

namespace {

double min_conc(const MicroState& s) {
    double m = std::numeric_limits<double>::infinity();
    for (double v : s.conc_plus) m = std::min(m, v);
    for (double v : s.conc_minus) m = std::min(m, v);
    return s.conc_plus.empty() ? 0.0 : m;
}

}  // namespace

MicroResult MicroProblem::run(const InitialProfile& plus, const InitialProfile& minus) const {
    const PnpParams& p = engine_.params;
    MicroResult res;
    MicroState s = initial_condition(plus, minus);
    const int n_steps = p.t_final > 0 ? static_cast<int>(std::ceil(p.t_final / p.dt - 1e-9)) : 0;
    const double dt = n_steps > 0 ? p.t_final / n_steps : 0.0;
    const std::vector<int> outputs = output_steps(n_steps, p.n_outputs);

    const double m0p = mass(s.conc_plus), m0m = mass(s.conc_minus);
    const double pi0 = pi_eps(s);
    auto record = [&](int iters) {
        const double mp = mass(s.conc_plus), mm = mass(s.conc_minus), pi = pi_eps(s);
        const double mc = min_conc(s);
        res.ledger.rows.push_back({s.t, mp, mm, pi, mc, iters});
        res.max_mass_drift = std::max({res.max_mass_drift, std::abs(mp - m0p) / std::max(m0p, 1.0),
                                       std::abs(mm - m0m) / std::max(m0m, 1.0)});
        res.max_pi_drift = std::max(res.max_pi_drift, std::abs(pi - pi0) / (1.0 + std::abs(pi0)));
        if (mc < -1e-8) res.negativity_flag = true;
    };
    auto snapshot = [&]() {
        res.snapshots.push_back(s);
        res.max_identity_residual = std::max(res.max_identity_residual, std::abs(charge(s) - pi_eps(s)));
    };

    record(0);
    snapshot();
    res.dt_cfl_min = engine_.dt_cfl(s.potential);
    std::size_t next_out = 1;
    for (int k = 1; k <= n_steps; ++k) {
        GummelStats st;
        try {
            st = step(s, dt);
        } catch (const ConvergenceError& e) {
            throw MicroRunError(std::string("step ") + std::to_string(k) + ": " + e.what(), res.ledger);
        }
        if (!st.converged) {
            record(st.iterations);
            char buf[160];
            std::snprintf(buf, sizeof buf, "step %d: Gummel iteration did not converge (change %.3e after %d iterations)",
                          k, st.change, st.iterations);
            throw MicroRunError(buf, res.ledger);
        }
        s.t = k * dt;
        record(st.iterations);
        res.dt_cfl_min = std::min(res.dt_cfl_min, engine_.dt_cfl(s.potential));
        if (next_out < outputs.size() && outputs[next_out] == k) {
            snapshot();
            ++next_out;
        }
    }
    return res;
}

void write_snapshot_csv(std::ostream& os, const MicroProblem& problem, const MicroState& s) {
    os << "vertex_id,x,y,conc_plus,conc_minus,potential\n";
    char buf[256];
    const auto& V = problem.mesh().vertices;
    const auto& verts = problem.fluid_vertices();
    for (std::size_t d = 0; d < verts.size(); ++d) {
        const int v = verts[d];
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", v, V[v][0], V[v][1], s.conc_plus[d],
                      s.conc_minus[d], s.potential[v]);
        os << buf;
    }
}

}  // namespace spnp
