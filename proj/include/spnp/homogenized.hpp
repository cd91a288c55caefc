#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spnp/geometry.hpp"
#include "spnp/micro_pnp.hpp"
#include "spnp/pnp_engine.hpp"
#include "spnp/random_medium.hpp"

namespace spnp {

/// Direction-wise periodic correctors and the tensor they produce.
struct CellProblemSolution {
    std::string kind;                 // species-y, dielectric-y, dielectric-omega, drift-y
    std::array<Vector, 2> corrector;  // vertex values (template cell or torus grid), mean zero
    Mat2 tensor = zero_mat2();
    double residual = 0.0;            // max relative residual of the two solves
};

/// chi^k on the fluid part with periodic conditions, no-flux on the interface;
/// tensor = A_hom.
CellProblemSolution solve_species_cell(const TemplateCell& cell);

/// Full-cell periodic problem for the given per-triangle coefficient integrals
/// a_T = int_T a (scalar coefficient).
CellProblemSolution solve_full_cell(const TemplateCell& cell, const std::vector<double>& coef_integrals,
                                    const std::string& kind);

/// Periodic problem on the K x K torus grid (P1 on split squares) with a tensor
/// coefficient given at the grid nodes (index b*K + a for node (a/K, b/K)).
CellProblemSolution solve_torus_cell(const std::vector<Mat2>& nodal_coefficient, int K, const std::string& kind);

/// Per-triangle integrals of theta(omega, .) = rho_f chi_f + rho_s chi_s.
std::vector<double> dielectric_integrals(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                         const TemplateCell& cell, const Vec2& omega);
/// Same with the omega-mean of the fields.
std::vector<double> dielectric_mean_integrals(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                              const TemplateCell& cell);

struct DielectricResult {
    int K = 0;
    Vec2 offset{0.0, 0.0};
    std::vector<Mat2> theta_star;  // stage 1 tensor at grid node b*K + a, omega = offset + (a, b)/K
    Mat2 theta_eff = zero_mat2();
    double stage1_residual = 0.0;
    double stage2_residual = 0.0;
    int stage1_solves = 0;
};

/// Reiterated dielectric homogenization: y-stage per omega node, then omega-stage.
/// Refuses K < 4 * (largest omega frequency of rho_f, rho_s).
DielectricResult solve_dielectric_cells(const CoefficientField& rho_f, const CoefficientField& rho_s,
                                        const TemplateCell& cell, int K, const Vec2& offset = {0.0, 0.0},
                                        int threads = 1);

/// eta^k solves div(chi_f (e_k + grad w^k + grad eta^k)) = 0 on the fluid part;
/// B_hom[j][k] = int_{Y_f} (e_j + grad chi^j).(e_k + grad w^k + grad eta^k).
CellProblemSolution solve_drift_cell(const TemplateCell& cell, const CellProblemSolution& species,
                                     const CellProblemSolution& dielectric_y);

/// L2 norm of the omega-level species corrector for the constant tensor A on the
/// K x K torus (vanishes for an omega-independent coefficient).
double omega_stage_species(const Mat2& A, int K);
/// Same problem with an injected omega-dependent coefficient (non-vacuity check).
double omega_stage_species_injected(const std::vector<Mat2>& nodal_coefficient, int K);

/// int_Lambda int_Gamma eta(omega, y) dS(y) dmu over the template interface.
double surface_factor(const CoefficientField& eta, const TemplateCell& cell);

struct EffectiveCoefficients {
    double theta = 1.0;
    Mat2 A_hom = identity_mat2();
    Mat2 B_hom = identity_mat2();
    Mat2 theta_eff = identity_mat2();
    double s_bar = 0.0;
    // provenance
    int template_vertices = 0;
    int template_triangles = 0;
    int K = 0;
    Vec2 omega_offset{0.0, 0.0};
    double species_residual = 0.0;
    double dielectric_residual = 0.0;
    double drift_residual = 0.0;
};

EffectiveCoefficients compute_effective(const TemplateCell& cell, const MediumFields& fields, int K,
                                        const Vec2& omega_offset = {0.0, 0.0}, int threads = 1);

void write_effective_json(std::ostream& os, const EffectiveCoefficients& eff);

struct MacroState {
    double t = 0.0;
    Vector conc_plus, conc_minus, potential;  // macro grid vertices
};

struct MacroResult {
    std::vector<MacroState> snapshots;
    std::vector<double> pi_macro;          // per step, -s_bar int gamma(potential)
    std::vector<double> mass_plus, mass_minus;  // per step, int theta * conc
    double max_mass_drift = 0.0;
    double max_equilibrium_residual = 0.0;  // |pi_macro - F theta (z- M-0 - z+ M+0)|
};

/// Homogenized PNP on the unperforated unit square, structured N x N grid.
class MacroProblem {
public:
    MacroProblem(int N, const EffectiveCoefficients& eff, const PnpParams& params, const GammaFunction& gamma);

    MacroState initial_condition(const InitialProfile& plus, const InitialProfile& minus) const;
    MacroResult run(const InitialProfile& plus, const InitialProfile& minus) const;
    /// P1 interpolation of nodal values at x in the closed unit square.
    double interpolate(const Vector& nodal, const Vec2& x) const;
    double pi_macro(const MacroState& s) const { return -engine_.reaction_integral(s.potential); }
    /// int conc dx (unweighted).
    double plain_mass(const Vector& conc) const { return engine_.mass(conc) / eff_.theta; }
    const std::vector<Vec2>& vertices() const { return vertices_; }
    const PnpEngine& engine() const { return engine_; }
    int N() const { return N_; }

private:
    int N_;
    EffectiveCoefficients eff_;
    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    PnpEngine engine_;
};

}  // namespace spnp
