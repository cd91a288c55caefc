#include "spnp/random_medium.hpp"

#include <cmath>
#include <random>

#include "spnp/geometry.hpp"

namespace spnp {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

TorusShift sample_omega(std::uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed));
    TorusShift s;
    s.rng_seed = seed;
    s.omega[0] = unit_double(rng);
    s.omega[1] = unit_double(rng);
    return s;
}

std::vector<Vec2> sample_omegas(std::uint64_t seed, int count) {
    std::vector<Vec2> out(count);
    for (int k = 0; k < count; ++k) out[k] = sample_omega(splitmix64(seed + static_cast<std::uint64_t>(k))).omega;
    return out;
}

double frac(double v) {
    double f = v - std::floor(v);
    return f >= 1.0 ? 0.0 : f;
}

Vec2 shift(const Vec2& omega, const Vec2& y) { return {frac(omega[0] + y[0]), frac(omega[1] + y[1])}; }

void CoefficientField::validate() const {
    if (!(floor > 0.0)) throw ConfigError("field " + name + ": floor must be positive");
    if (certified_min() < floor)
        throw ConfigError("field " + name + ": base - sum|amplitudes| = " + std::to_string(certified_min()) +
                          " is below the floor " + std::to_string(floor));
}

namespace {

double mode_sum(const std::vector<Mode>& modes, const Vec2& p) {
    double s = 0.0;
    for (const auto& m : modes) s += m.amplitude * std::cos(kTwoPi * (m.k[0] * p[0] + m.k[1] * p[1]));
    return s;
}

int max_freq(const std::vector<Mode>& modes) {
    int f = 0;
    for (const auto& m : modes) f = std::max({f, std::abs(m.k[0]), std::abs(m.k[1])});
    return f;
}

// Constant (zero-frequency) modes contribute to the mean.
double constant_part(const std::vector<Mode>& modes) {
    double s = 0.0;
    for (const auto& m : modes)
        if (m.k[0] == 0 && m.k[1] == 0) s += m.amplitude;
    return s;
}

}  // namespace

double CoefficientField::value(const Vec2& omega, const Vec2& y) const {
    return base + mode_sum(y_modes, y) + mode_sum(w_modes, omega);
}

double CoefficientField::omega_mean(const Vec2& y) const {
    return base + mode_sum(y_modes, y) + constant_part(w_modes);
}

double CoefficientField::y_mean(const Vec2& omega) const {
    return base + constant_part(y_modes) + mode_sum(w_modes, omega);
}

bool CoefficientField::has_omega_modes() const {
    for (const auto& m : w_modes)
        if (m.amplitude != 0.0 && (m.k[0] != 0 || m.k[1] != 0)) return true;
    return false;
}

bool CoefficientField::has_y_modes() const {
    for (const auto& m : y_modes)
        if (m.amplitude != 0.0 && (m.k[0] != 0 || m.k[1] != 0)) return true;
    return false;
}

int CoefficientField::max_y_frequency() const { return max_freq(y_modes); }
int CoefficientField::max_omega_frequency() const { return max_freq(w_modes); }

double CoefficientField::certified_min() const {
    double s = base;
    for (const auto& m : y_modes) s -= std::abs(m.amplitude);
    for (const auto& m : w_modes) s -= std::abs(m.amplitude);
    return s;
}

CoefficientField CoefficientField::constant(std::string name, double value) {
    CoefficientField f;
    f.name = std::move(name);
    f.base = value;
    f.floor = value;
    return f;
}

std::array<Vec2, 2> fast_arguments(const Vec2& omega, const Vec2& x, double eps) {
    const double inv = 1.0 / eps;
    const double n = std::round(inv);
    const double k = std::abs(inv - n) < 1e-9 * inv ? n : inv;
    const Vec2 xe{x[0] * k, x[1] * k};
    const Vec2 xee{frac(xe[0] * k), frac(xe[1] * k)};
    return {shift(omega, xe), xee};
}

double eval_field_eps(const CoefficientField& field, const Vec2& omega, const Vec2& x, double eps) {
    const auto a = fast_arguments(omega, x, eps);
    return field.value(a[0], a[1]);
}

double eval_theta_eps(const CoefficientField& rho_f, const CoefficientField& rho_s, const PerforatedMesh& mesh,
                      const Vec2& omega, const Vec2& x, double eps) {
    const Phase ph = mesh.locate_phase(x);
    return eval_field_eps(ph == Phase::fluid ? rho_f : rho_s, omega, x, eps);
}

void GammaFunction::validate() const {
    if (!(alpha > 0.0)) throw ConfigError("gamma: alpha must be positive");
    if (!(lipschitz >= alpha)) throw ConfigError("gamma: lipschitz must be >= alpha");
    if (kind == Kind::saturated && !(saturation > 0.0)) throw ConfigError("gamma: saturation scale must be positive");
}

double GammaFunction::operator()(double r) const {
    if (kind == Kind::linear) return alpha * r;
    return alpha * r + (lipschitz - alpha) * saturation * std::tanh(r / saturation);
}

double GammaFunction::derivative(double r) const {
    if (kind == Kind::linear) return alpha;
    const double t = std::tanh(r / saturation);
    return alpha + (lipschitz - alpha) * (1.0 - t * t);
}

}  // namespace spnp
