#pragma once

#include <array>
#include <vector>

#include "spnp/assembly.hpp"
#include "spnp/random_medium.hpp"
#include "spnp/sparse.hpp"
#include "spnp/types.hpp"

namespace spnp {

struct PnpParams {
    double D_plus = 1.0, D_minus = 1.0;
    double z_plus = 1.0, z_minus = 1.0;
    double c = 1.0;        // drift constant F/(R Theta)
    double F_const = 1.0;  // charge scaling
    double dt = 0.005;
    double t_final = 0.05;
    int gummel_max = 20;
    double gummel_tol = 1e-9;
    double linear_tol = 1e-11;
    int n_outputs = 10;
    bool disable_drift = false;
    bool edge_upwind = false;  // upwinded edge fluxes for the drift term

    void validate() const;
};

/// Element of the species (fluid) region: concentration dofs, potential dofs and
/// P1 gradient data.
struct PnpElement {
    std::array<int, 3> conc;
    std::array<int, 3> pot;
    std::array<Vec2, 3> grad;
    double area;
};

/// Quadrature point of the zeroth-order potential term sum w gamma(u_h) phi_i.
struct ReactionPoint {
    std::array<int, 3> dof;  // -1 padded
    std::array<double, 3> shape;
    double weight;
};

struct GummelStats {
    int iterations = 0;
    double change = 0.0;
    bool converged = false;
};

/// Shared discretization of a Poisson-Nernst-Planck system:
///   species: m_i du/dt + D K u + D c z Kd(phi) u = 0   (lumped mass m, drift via B)
///   potential: A phi + sum_q w gamma(phi_h) psi = F s int (z+ u+ - z- u-) psi
/// The micro solver uses it with unit tensors on the perforated mesh, the macro
/// solver with effective tensors on the unperforated one.
class PnpEngine {
public:
    PnpParams params;
    GammaFunction gamma;
    int n_pot = 0;
    int n_conc = 0;
    std::vector<PnpElement> elements;
    Mat2 diffusion_tensor = identity_mat2();
    Mat2 drift_tensor = identity_mat2();
    Vector species_mass;            // lumped, already weighted
    SparseMatrix potential_stiffness;
    std::vector<ReactionPoint> reaction;
    double charge_scale = 1.0;      // multiplies F in the potential right-hand side

    /// Builds the species pattern, stiffness and the linear potential operator.
    void finalize();

    /// Potential for given concentrations (warm start from `guess`).
    Vector solve_potential(const Vector& up, const Vector& um, const Vector& guess) const;
    /// Backward Euler step with Gummel coupling; updates u+, u-, phi in place.
    GummelStats step(Vector& up, Vector& um, Vector& phi, double dt) const;

    /// sum_q w gamma(phi_h(q)).
    double reaction_integral(const Vector& phi) const;
    /// F s int (z+ u+ - z- u-) (exact for the P1 interpolant).
    double charge_integral(const Vector& up, const Vector& um) const;
    /// sum m_i u_i.
    double mass(const Vector& u) const;
    /// Stable step estimate: min_i m_i / K_ii / (1 + c z max|grad phi|).
    double dt_cfl(const Vector& phi) const;
    /// Largest |grad phi| over the species elements.
    double max_gradient(const Vector& phi) const;
    bool singular_potential() const { return reaction.empty(); }

private:
    PatternAssembler species_pattern_;
    SparseMatrix species_stiffness_;
    SparseMatrix potential_linear_;  // A + alpha S when gamma is linear
    Vector charge_rhs(const Vector& up, const Vector& um) const;
    Vector solve_species(const Vector& u_old, const Vector& u_guess, const SparseMatrix& drift, double D, double z,
                         double dt) const;
    SparseMatrix drift_matrix(const Vector& phi) const;
    Vector newton_potential(const Vector& b, const Vector& guess) const;
};

}  // namespace spnp
