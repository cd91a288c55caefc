#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spnp/types.hpp"

namespace spnp {

class PerforatedMesh;

/// One sample of the probability space: a point of the 2-torus, acted on by
/// T(y)omega = omega + y mod 1.
struct TorusShift {
    Vec2 omega{0.0, 0.0};
    std::uint64_t rng_seed = 0;
};

/// SplitMix64 finalizer; used to derive independent per-sample seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform sample on [0,1)^2, deterministic in the seed.
TorusShift sample_omega(std::uint64_t seed);

/// Sample k uses seed splitmix64(seed + k).
std::vector<Vec2> sample_omegas(std::uint64_t seed, int count);

/// Componentwise (omega + y) mod 1, in [0,1)^2.
Vec2 shift(const Vec2& omega, const Vec2& y);

/// Fractional part in [0,1).
double frac(double v);

struct Mode {
    std::array<int, 2> k{0, 0};
    double amplitude = 0.0;
};

/// value(omega, y) = base + sum_y a cos(2 pi k.y) + sum_w b cos(2 pi m.omega).
struct CoefficientField {
    std::string name;
    double base = 1.0;
    double floor = 0.5;
    std::vector<Mode> y_modes;
    std::vector<Mode> w_modes;

    /// Throws ConfigError unless base - sum |amplitudes| >= floor > 0.
    void validate() const;
    double value(const Vec2& omega, const Vec2& y) const;
    /// Mean over omega (the y-dependent part plus base).
    double omega_mean(const Vec2& y) const;
    /// Mean over y (the omega-dependent part plus base).
    double y_mean(const Vec2& omega) const;
    double mean() const { return base; }
    bool has_omega_modes() const;
    bool has_y_modes() const;
    int max_y_frequency() const;
    int max_omega_frequency() const;
    /// Lower bound guaranteed by the amplitudes.
    double certified_min() const;
    static CoefficientField constant(std::string name, double value);
};

/// field(T(x/eps)omega, x/eps^2 mod 1).
double eval_field_eps(const CoefficientField& field, const Vec2& omega, const Vec2& x, double eps);

/// The two arguments (T(x/eps)omega, x/eps^2 mod 1) for eps = 1/n.
std::array<Vec2, 2> fast_arguments(const Vec2& omega, const Vec2& x, double eps);

/// Dielectric coefficient: rho_f or rho_s by the phase of x in the mesh.
double eval_theta_eps(const CoefficientField& rho_f, const CoefficientField& rho_s, const PerforatedMesh& mesh,
                      const Vec2& omega, const Vec2& x, double eps);

/// Interface nonlinearity. linear: gamma(r) = alpha r. saturated:
/// gamma(r) = alpha r + (L - alpha) s tanh(r / s).
struct GammaFunction {
    enum class Kind { linear, saturated };
    Kind kind = Kind::linear;
    double alpha = 1.0;
    double lipschitz = 1.0;
    double saturation = 1.0;

    void validate() const;
    double operator()(double r) const;
    double derivative(double r) const;
    bool is_linear() const { return kind == Kind::linear || lipschitz == alpha; }
};

}  // namespace spnp
