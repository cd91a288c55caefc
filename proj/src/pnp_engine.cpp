#include "spnp/pnp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spnp {

void PnpParams::validate() const {
    if (!(D_plus > 0 && D_minus > 0)) throw ConfigError("pnp: diffusion coefficients must be positive");
    if (!(z_plus > 0 && z_minus > 0)) throw ConfigError("pnp: valences must be positive");
    if (!(c >= 0)) throw ConfigError("pnp: drift constant must be nonnegative");
    if (!(F_const > 0)) throw ConfigError("pnp: F must be positive");
    if (!(t_final >= 0)) throw ConfigError("pnp: t_final must be nonnegative");
    if (!(dt > 0) || (t_final > 0 && dt > t_final * (1 + 1e-12))) throw ConfigError("pnp: need 0 < dt <= t_final");
    if (gummel_max < 1 || !(gummel_tol > 0) || !(linear_tol > 0)) throw ConfigError("pnp: invalid Gummel/solver tolerances");
    if (n_outputs < 1) throw ConfigError("pnp: n_outputs must be >= 1");
}

void PnpEngine::finalize() {
    params.validate();
    gamma.validate();
    std::vector<std::array<int, 3>> dofs(elements.size());
    for (std::size_t e = 0; e < elements.size(); ++e) dofs[e] = elements[e].conc;
    species_pattern_ = PatternAssembler(n_conc, dofs);
    species_stiffness_ = species_pattern_.zero_matrix();
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto& el = elements[e];
        double ke[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) ke[i][j] = el.area * dot(mat_vec(diffusion_tensor, el.grad[j]), el.grad[i]);
        species_pattern_.add(species_stiffness_, static_cast<int>(e), ke);
    }
    if (gamma.is_linear()) {
        TripletBuilder b(n_pot);
        for (const auto& q : reaction)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (q.dof[i] >= 0 && q.dof[j] >= 0)
                        b.add(q.dof[i], q.dof[j], gamma.alpha * q.weight * q.shape[i] * q.shape[j]);
        potential_linear_ = add(potential_stiffness, 1.0, b.build(), 1.0);
    }
}

Vector PnpEngine::charge_rhs(const Vector& up, const Vector& um) const {
    Vector b(n_pot, 0.0);
    const double s = params.F_const * charge_scale;
    for (const auto& el : elements) {
        double q[3];
        for (int i = 0; i < 3; ++i) q[i] = params.z_plus * up[el.conc[i]] - params.z_minus * um[el.conc[i]];
        const double sum = q[0] + q[1] + q[2];
        for (int i = 0; i < 3; ++i) b[el.pot[i]] += s * el.area / 12.0 * (sum + q[i]);
    }
    return b;
}

double PnpEngine::charge_integral(const Vector& up, const Vector& um) const {
    double total = 0.0;
    for (const auto& el : elements) {
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) sum += params.z_plus * up[el.conc[i]] - params.z_minus * um[el.conc[i]];
        total += el.area / 3.0 * sum;
    }
    return params.F_const * charge_scale * total;
}

double PnpEngine::reaction_integral(const Vector& phi) const {
    double s = 0.0;
    for (const auto& q : reaction) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i)
            if (q.dof[i] >= 0) v += q.shape[i] * phi[q.dof[i]];
        s += q.weight * gamma(v);
    }
    return s;
}

double PnpEngine::mass(const Vector& u) const {
    double s = 0.0;
    for (int i = 0; i < n_conc; ++i) s += species_mass[i] * u[i];
    return s;
}

double PnpEngine::max_gradient(const Vector& phi) const {
    double g = 0.0;
    for (const auto& el : elements) {
        Vec2 gr{0.0, 0.0};
        for (int i = 0; i < 3; ++i) gr = gr + phi[el.pot[i]] * el.grad[i];
        g = std::max(g, norm(gr));
    }
    return g;
}

double PnpEngine::dt_cfl(const Vector& phi) const {
    double r = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_conc; ++i) {
        const double kii = species_stiffness_.val[species_pattern_.diagonal_position(i)];
        if (kii > 0) r = std::min(r, species_mass[i] / kii);
    }
    const double z = std::max(params.z_plus, params.z_minus);
    return r / (1.0 + params.c * z * max_gradient(phi));
}

SparseMatrix PnpEngine::drift_matrix(const Vector& phi) const {
    SparseMatrix kd = species_pattern_.zero_matrix();
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto& el = elements[e];
        Vec2 g{0.0, 0.0};
        for (int i = 0; i < 3; ++i) g = g + phi[el.pot[i]] * el.grad[i];
        const Vec2 bg = mat_vec(drift_tensor, g);
        double ke[3][3];
        double v[3];
        for (int i = 0; i < 3; ++i) v[i] = dot(bg, el.grad[i]) * el.area / 3.0;
        if (params.edge_upwind) {
            for (auto& row : ke)
                for (double& x : row) x = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int k = i + 1; k < 3; ++k) {
                    // net flux i -> k carried by the upwind value
                    const double f = (v[i] - v[k]) / 3.0;
                    const int up = f > 0.0 ? i : k;
                    ke[i][up] += f;
                    ke[k][up] -= f;
                }
        } else {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) ke[i][j] = v[i];
        }
        species_pattern_.add(kd, static_cast<int>(e), ke);
    }
    return kd;
}

Vector PnpEngine::solve_species(const Vector& u_old, const Vector& u_guess, const SparseMatrix& drift, double D,
                                double z, double dt) const {
    SparseMatrix a = species_stiffness_;
    const double cz = params.disable_drift ? 0.0 : params.c * z;
    a.axpby_same_pattern(D, D * cz, drift);
    for (int i = 0; i < n_conc; ++i) a.val[species_pattern_.diagonal_position(i)] += species_mass[i] / dt;
    Vector b(n_conc);
    for (int i = 0; i < n_conc; ++i) b[i] = species_mass[i] / dt * u_old[i];
    SolverOptions opt;
    opt.tol = params.linear_tol;
    opt.max_iter = 20000;
    return bicgstab_solve(a, b, opt, &u_guess).x;
}

Vector PnpEngine::newton_potential(const Vector& b, const Vector& guess) const {
    Vector phi = guess;
    const double bnorm = norm2(b);
    auto residual = [&](const Vector& x) {
        Vector r = potential_stiffness * x;
        for (const auto& q : reaction) {
            double v = 0.0;
            for (int i = 0; i < 3; ++i)
                if (q.dof[i] >= 0) v += q.shape[i] * x[q.dof[i]];
            const double g = q.weight * gamma(v);
            for (int i = 0; i < 3; ++i)
                if (q.dof[i] >= 0) r[q.dof[i]] += g * q.shape[i];
        }
        for (int i = 0; i < n_pot; ++i) r[i] -= b[i];
        return r;
    };
    const double target = 1e-10 * std::max(bnorm, 1e-300);
    Vector r = residual(phi);
    double rn = norm2(r);
    for (int it = 0; it < 25; ++it) {
        if (rn <= target || rn == 0.0) return phi;
        TripletBuilder jb(n_pot);
        for (const auto& q : reaction) {
            double v = 0.0;
            for (int i = 0; i < 3; ++i)
                if (q.dof[i] >= 0) v += q.shape[i] * phi[q.dof[i]];
            const double gp = q.weight * gamma.derivative(v);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (q.dof[i] >= 0 && q.dof[j] >= 0) jb.add(q.dof[i], q.dof[j], gp * q.shape[i] * q.shape[j]);
        }
        const SparseMatrix jac = add(potential_stiffness, 1.0, jb.build(), 1.0);
        Vector minus_r(n_pot);
        for (int i = 0; i < n_pot; ++i) minus_r[i] = -r[i];
        SolverOptions opt;
        opt.tol = std::min(params.linear_tol, 1e-2 * target / std::max(rn, 1e-300));
        opt.tol = std::max(opt.tol, 1e-15);
        opt.max_iter = 20000;
        const Vector delta = cg_solve(jac, minus_r, opt).x;
        double lambda = 1.0;
        Vector trial(n_pot);
        double tn = 0.0;
        for (int ls = 0; ls < 30; ++ls) {
            for (int i = 0; i < n_pot; ++i) trial[i] = phi[i] + lambda * delta[i];
            r = residual(trial);
            tn = norm2(r);
            if (tn <= (1.0 - 1e-4 * lambda) * rn) break;
            lambda *= 0.5;
        }
        phi = trial;
        rn = tn;
    }
    if (rn <= target) return phi;
    throw ConvergenceError("Newton iteration for the potential did not converge", rn / std::max(bnorm, 1e-300), 25);
}

Vector PnpEngine::solve_potential(const Vector& up, const Vector& um, const Vector& guess) const {
    const Vector b = charge_rhs(up, um);
    if (!gamma.is_linear()) return newton_potential(b, guess);
    SolverOptions opt;
    opt.tol = params.linear_tol;
    opt.max_iter = 50000;
    opt.deflate_constant = singular_potential();
    return cg_solve(potential_linear_, b, opt, &guess).x;
}

GummelStats PnpEngine::step(Vector& up, Vector& um, Vector& phi, double dt) const {
    GummelStats st;
    const Vector up_old = up, um_old = um;
    for (int k = 1; k <= params.gummel_max; ++k) {
        const SparseMatrix kd = params.disable_drift ? species_pattern_.zero_matrix() : drift_matrix(phi);
        Vector up_new = solve_species(up_old, up, kd, params.D_plus, params.z_plus, dt);
        Vector um_new = solve_species(um_old, um, kd, params.D_minus, params.z_minus, dt);
        double change = 0.0;
        for (int i = 0; i < n_conc; ++i)
            change = std::max({change, std::abs(up_new[i] - up[i]), std::abs(um_new[i] - um[i])});
        const double scale = std::max({1.0, norm_inf(up_new), norm_inf(um_new)});
        up = std::move(up_new);
        um = std::move(um_new);
        phi = solve_potential(up, um, phi);
        st.iterations = k;
        st.change = change / scale;
        if (st.change <= params.gummel_tol) {
            st.converged = true;
            return st;
        }
    }
    return st;
}

}  // namespace spnp
