#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spnp/config.hpp"
#include "spnp/homogenized.hpp"
#include "spnp/twoscale.hpp"

namespace spnp {

/// Relative L2 errors of micro fields against the interpolated macro solution
/// over the fluid triangles, normalized by the macro norm on the same region
/// (absolute when that norm vanishes).
struct FieldErrors {
    double conc_plus = 0.0, conc_minus = 0.0, potential = 0.0;
};

struct ErrorAccumulator {
    double err2[3] = {0.0, 0.0, 0.0};
    double ref2[3] = {0.0, 0.0, 0.0};
    FieldErrors relative() const;
};

/// Squared error and reference norms at one snapshot (7-point rule per triangle).
ErrorAccumulator snapshot_errors(const MicroProblem& micro, const MicroState& ms, const MacroProblem& macro,
                                 const MacroState& Ms);

struct SweepRow {
    double eps = 0.0;
    int omega_index = -1;  // -1: mean over the omega ensemble
    Vec2 omega{0.0, 0.0};
    FieldErrors final_time;
    FieldErrors space_time;
    FieldErrors stderr_final;  // mean rows only
    double mass_drift_max = 0.0;
    double pi_drift_max = 0.0;
    double identity_residual_max = 0.0;
    double equilibrium_residual = 0.0;        // macro
    double micro_equilibrium_residual = 0.0;  // max_t |pi_eps(t) - F (z+ M+0 - z- M-0)|
    double wall_time = 0.0;
    std::string status = "ok";
    int ok_runs = 0;  // mean rows: number of successful runs averaged
};

struct SweepReport {
    std::vector<SweepRow> rows;  // per eps: omega rows in index order, then the mean row
    EffectiveCoefficients effective;

    /// Deterministic CSV; wall_time is included only when `with_timing`.
    void write_csv(std::ostream& os, bool with_timing = false) const;
    void write_timing_csv(std::ostream& os) const;
    const SweepRow* mean_row(double eps) const;
};

/// Micro run for one (eps, omega) plus its error row against a precomputed macro run.
SweepRow sweep_row(const ExperimentConfig& cfg, const PerforatedMesh& mesh, const MacroProblem& macro,
                   const MacroResult& macro_result, int omega_index);

SweepReport run_sweep(const ExperimentConfig& cfg, int threads = 1);

enum class PlotQuantity { conc_plus, conc_minus, potential };

/// Tab-separated `eps  mean_err  stderr` for one quantity, one line per eps with a mean row.
void write_plotdata(std::ostream& os, const SweepReport& report, PlotQuantity q);

struct TwoScaleResult {
    std::vector<OscillationReport> reports;  // volume then surface, suite order
};

TwoScaleResult run_twoscale(const ExperimentConfig& cfg);

/// Template cell from the configured geometry.
TemplateCell template_cell(const ExperimentConfig& cfg);
EffectiveCoefficients run_effective(const ExperimentConfig& cfg, int threads = 1);

/// Writes every artifact of the named subcommand below cfg.output_dir; returns
/// the list of files written.
std::vector<std::string> write_mesh_outputs(const ExperimentConfig& cfg);
std::vector<std::string> write_twoscale_outputs(const ExperimentConfig& cfg);
std::vector<std::string> write_micro_outputs(const ExperimentConfig& cfg);
std::vector<std::string> write_effective_outputs(const ExperimentConfig& cfg, int threads = 1);
std::vector<std::string> write_macro_outputs(const ExperimentConfig& cfg, int threads = 1);
std::vector<std::string> write_sweep_outputs(const ExperimentConfig& cfg, int threads = 1, bool deterministic = true);

}  // namespace spnp
