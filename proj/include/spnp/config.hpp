#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "spnp/geometry.hpp"
#include "spnp/micro_pnp.hpp"
#include "spnp/pnp_engine.hpp"

namespace spnp {

/// Full experiment configuration; every field has a default so an empty JSON
/// object is a valid config.
struct ExperimentConfig {
    UnitCellSpec geometry;
    MediumFields fields;
    PnpParams pnp;
    InitialProfile initial_plus;
    InitialProfile initial_minus;
    std::vector<int> eps_reciprocals{2, 3, 4, 5};  // eps = 1/n, n increasing
    int n_omega_samples = 8;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    int macro_N = 64;
    int omega_grid_K = 32;

    std::vector<int> twoscale_eps_reciprocals{2, 4, 8, 16};
    int twoscale_M = 64;
    int twoscale_points_per_period = 8;

    int micro_eps_reciprocal = 4;
    int micro_omega_index = 0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
    std::vector<double> eps_list() const;
    std::vector<double> twoscale_eps_list() const;
    /// Omega sample k of the sweep ensemble.
    Vec2 omega_sample(int k) const;
};

/// Default medium: oscillating rho_f, rho_s and eta with moderate amplitudes.
ExperimentConfig default_config();

/// Parses a config document on top of default_config(). Unknown keys are
/// rejected with ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

CoefficientField parse_field(const nlohmann::json& j, const std::string& name);
nlohmann::json to_json(const CoefficientField& f);

}  // namespace spnp
