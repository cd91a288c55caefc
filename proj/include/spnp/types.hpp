#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spnp {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<std::array<double, 2>, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Phase : std::uint8_t { fluid = 0, solid = 1 };

inline const char* to_string(Phase p) { return p == Phase::fluid ? "fluid" : "solid"; }

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2 operator*(double s, const Vec2& a) { return {s * a[0], s * a[1]}; }
inline double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double cross(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }
inline double norm(const Vec2& a) { return std::hypot(a[0], a[1]); }

inline Mat2 zero_mat2() { return {{{0.0, 0.0}, {0.0, 0.0}}}; }
inline Mat2 identity_mat2() { return {{{1.0, 0.0}, {0.0, 1.0}}}; }
inline Mat2 scaled_identity(double c) { return {{{c, 0.0}, {0.0, c}}}; }

inline Vec2 mat_vec(const Mat2& m, const Vec2& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

/// Eigenvalues of the symmetric part of a 2x2 tensor, ascending.
inline std::array<double, 2> sym_eigenvalues(const Mat2& m) {
    const double a = m[0][0], d = m[1][1], b = 0.5 * (m[0][1] + m[1][0]);
    const double mean = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    return {mean - rad, mean + rad};
}

/// Geometry/mesh construction failure.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Point outside the admissible domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid configuration or precondition violation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solve or nonlinear iteration did not converge.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + " after " +
                             std::to_string(iterations) + " iterations)"),
          residual_(residual),
          iterations_(iterations) {}
    double residual() const { return residual_; }
    int iterations() const { return iterations_; }

private:
    double residual_;
    int iterations_;
};

}  // namespace spnp
