#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "spnp/random_medium.hpp"
#include "spnp/types.hpp"

namespace spnp {

class PerforatedMesh;

/// Polynomial in x on the macro domain: sum c x1^a x2^b.
struct Polynomial {
    struct Term {
        double c;
        int a, b;
    };
    std::vector<Term> terms;

    double operator()(const Vec2& x) const;
    static Polynomial constant(double c);
    static Polynomial x1();
    Polynomial operator*(const Polynomial& o) const;
};

/// Trigonometric polynomial on the 2-torus: base + sum a cos(2 pi k.p).
struct TrigPoly {
    double base = 1.0;
    std::vector<Mode> modes;

    double operator()(const Vec2& p) const;
    double lower_bound() const;
    int max_frequency() const;
    /// Exact product (cos a cos b = (cos(a+b) + cos(a-b))/2).
    TrigPoly operator*(const TrigPoly& o) const;
    static TrigPoly constant(double c);
};

/// Separable test integrand a(x, omega, y) = f(x) g(omega) h(y), raised to |.|^p.
struct TestIntegrand {
    std::string name;
    Polynomial f = Polynomial::constant(1.0);
    TrigPoly g = TrigPoly::constant(1.0);
    TrigPoly h = TrigPoly::constant(1.0);
    int p = 1;

    bool omega_dependent() const;
    /// |a|^p at (x, omega, y).
    double value(const Vec2& x, const Vec2& omega, const Vec2& y) const;
    /// Pointwise product of two integrands (p must be 1 for both).
    TestIntegrand operator*(const TestIntegrand& o) const;
};

/// Exact factor integrals of |f|^p over the unit square, |g|^p over the torus,
/// |h|^p over Y.
double integral_x(const TestIntegrand& a);
double integral_omega(const TestIntegrand& a);
double integral_y(const TestIntegrand& a);
/// int over the template interface of |h|^p (polygon edges, 8-point Gauss per edge).
double integral_gamma_h(const TestIntegrand& a, const PerforatedMesh& mesh);

/// Limit of int_Omega int_Lambda |a(x, T(x/eps)omega, x/eps^2)|^p.
double volume_reference(const TestIntegrand& a);
/// Limit of eps int_{Gamma_eps} int_Lambda |a|^p: the fast variable x/eps^2 is
/// equidistributed in Y along the eps-scaled interface, so the limit is
/// (int f)(int g)|Gamma|(int_Y h).
double surface_reference(const TestIntegrand& a, double interface_length);

/// Omega sample design for the oscillation integrals: a randomly shifted m x m
/// product lattice when M = m^2 (m >= 2), otherwise M iid uniform samples.
std::vector<Vec2> omega_design(int M, std::uint64_t seed);

struct OscillationEstimate {
    double value = 0.0;
    double mc_stderr = 0.0;
    int M = 1;
};

/// Midpoint composite rule with spacing eps^2/m over the unit square. Refuses
/// spacing > eps^2/8 with a ConfigError naming the required resolution.
OscillationEstimate volume_oscillation(const TestIntegrand& a, double eps, int M, std::uint64_t seed,
                                       double spacing);

/// eps * int over the interface facets (8-point Gauss per facet) averaged over omega.
OscillationEstimate surface_oscillation(const TestIntegrand& a, const PerforatedMesh& mesh, double eps, int M,
                                        std::uint64_t seed);

struct OscillationRow {
    double eps;
    int M;
    double value;
    double reference;
    double rel_error;
    double mc_stderr;
    bool refused = false;  // resolution gate failed; value and errors are NaN
    std::string message;
};

/// Errors below this level are quadrature noise and never count as growth.
inline constexpr double kErrorNoiseFloor = 1e-10;

struct OscillationReport {
    std::string op;
    std::string integrand;
    std::vector<OscillationRow> rows;  // decreasing eps
    /// Some error grew by more than a factor 2 from one eps to the next.
    bool non_monotone_flag = false;
    /// Number of eps steps where the error increased (refused rows skipped).
    int inversions() const;
    void write_csv(std::ostream& os) const;
};

struct TwoScaleOptions {
    int M = 64;
    std::uint64_t seed = 1;
    int points_per_period = 8;  // volume quadrature: spacing eps^2 / points_per_period
    double inclusion_radius = 0.25;
    int n_interface_segments = 64;
    double target_edge_length = 1.0 / 32.0;
};

enum class OscillationOp { volume, surface };

/// Per-eps estimates against the limit reference. eps list strictly decreasing, each 1/n.
OscillationReport convergence_table(OscillationOp op, const TestIntegrand& a, const std::vector<double>& eps_list,
                                    const TwoScaleOptions& opt);

/// The bundled separable suite: constant, f(x), h(y), f g, f g h, and the p = 2
/// variant of f g h.
std::vector<TestIntegrand> integrand_suite();

}  // namespace spnp
