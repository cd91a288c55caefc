#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "spnp/assembly.hpp"
#include "spnp/geometry.hpp"
#include "spnp/pnp_engine.hpp"
#include "spnp/random_medium.hpp"

namespace spnp {

struct MediumFields {
    CoefficientField rho_f = CoefficientField::constant("rho_f", 1.0);
    CoefficientField rho_s = CoefficientField::constant("rho_s", 1.0);
    CoefficientField eta = CoefficientField::constant("eta", 1.0);
    GammaFunction gamma;

    void validate() const;
};

/// Initial concentration profile on the macro domain.
///   constant: base
///   gaussian: base + amplitude exp(-|x - center|^2 / (2 width^2))
///   cosine:   base + amplitude cos(pi k1 x1) cos(pi k2 x2)
struct InitialProfile {
    enum class Kind { constant, gaussian, cosine };
    Kind kind = Kind::constant;
    double base = 1.0;
    double amplitude = 0.0;
    Vec2 center{0.5, 0.5};
    double width = 0.1;
    std::array<int, 2> k{1, 1};

    double operator()(const Vec2& x) const;
    /// Throws ConfigError when the profile can be negative.
    void validate() const;
    static InitialProfile constant(double v);
};

struct MicroState {
    double t = 0.0;
    Vector conc_plus;   // fluid dofs
    Vector conc_minus;  // fluid dofs
    Vector potential;   // all mesh vertices
    Vec2 omega{0.0, 0.0};
};

struct LedgerRow {
    double t;
    double mass_plus;
    double mass_minus;
    double pi_eps;  // eps int_Gamma eta gamma(potential) dS
    double min_conc;
    int gummel_iters;
};

struct ConservationLedger {
    std::vector<LedgerRow> rows;
    void write_csv(std::ostream& os) const;
};

struct MicroResult {
    std::vector<MicroState> snapshots;
    ConservationLedger ledger;
    double dt_cfl_min = 0.0;
    bool negativity_flag = false;
    /// max over output times of |F int charge - pi_eps|.
    double max_identity_residual = 0.0;
    double max_mass_drift = 0.0;  // relative, max over species
    double max_pi_drift = 0.0;    // |pi(t) - pi(0)| / (1 + |pi(0)|)
};

/// Step failure; carries the ledger up to the failing step.
class MicroRunError : public std::runtime_error {
public:
    MicroRunError(const std::string& what, ConservationLedger partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const ConservationLedger& partial_ledger() const { return partial_; }

private:
    ConservationLedger partial_;
};

/// Fine-scale problem for one omega sample on a perforated mesh.
class MicroProblem {
public:
    MicroProblem(const PerforatedMesh& mesh, const PnpParams& params, const MediumFields& fields, const Vec2& omega);

    /// Interpolates the profiles at fluid vertices and solves for the consistent potential.
    MicroState initial_condition(const InitialProfile& plus, const InitialProfile& minus) const;
    void solve_poisson(MicroState& s) const;
    GummelStats step(MicroState& s, double dt) const;
    MicroResult run(const InitialProfile& plus, const InitialProfile& minus) const;

    double mass(const Vector& conc) const { return engine_.mass(conc); }
    double pi_eps(const MicroState& s) const { return engine_.reaction_integral(s.potential); }
    double charge(const MicroState& s) const { return engine_.charge_integral(s.conc_plus, s.conc_minus); }

    const PerforatedMesh& mesh() const { return *mesh_; }
    const DofMap& fluid_dofs() const { return fluid_; }
    const std::vector<int>& fluid_vertices() const { return fluid_vertex_; }
    const PnpEngine& engine() const { return engine_; }

private:
    const PerforatedMesh* mesh_;
    DofMap fluid_;
    std::vector<int> fluid_vertex_;  // dof -> vertex
    PnpEngine engine_;
    Vec2 omega_;
};

/// Output step indices for n_steps steps and n_outputs equal intervals (always includes 0).
std::vector<int> output_steps(int n_steps, int n_outputs);

/// CSV `vertex_id,x,y,conc_plus,conc_minus,potential` over fluid vertices.
void write_snapshot_csv(std::ostream& os, const MicroProblem& problem, const MicroState& s);

}  // namespace spnp
