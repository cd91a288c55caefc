#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "spnp/geometry.hpp"
#include "spnp/random_medium.hpp"

using namespace spnp;

namespace {

CoefficientField oscillating() {
    return {"rho_f", 2.0, 0.5, {{{1, 0}, 0.5}, {{1, 2}, 0.25}}, {{{0, 1}, 0.3}, {{2, 1}, 0.2}}};
}

// g(omega) = 1 + 0.7 cos(2 pi omega1) - 0.4 cos(2 pi (omega1 + 2 omega2)); exact mean 1
double g(const Vec2& w) {
    return 1.0 + 0.7 * std::cos(kTwoPi * w[0]) - 0.4 * std::cos(kTwoPi * (w[0] + 2.0 * w[1]));
}

}  // namespace

TEST_CASE("shift arithmetic and group law") {
    const Vec2 s = shift({0.9, 0.8}, {0.3, 0.4});
    CHECK(s[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(shift({0.25, 0.75}, {0.0, 0.0}) == Vec2{0.25, 0.75});
    const Vec2 neg = shift({0.1, 0.1}, {-0.3, -2.4});
    CHECK(neg[0] >= 0.0);
    CHECK(neg[0] < 1.0);
    CHECK(neg[0] == doctest::Approx(0.8));
    CHECK(neg[1] == doctest::Approx(0.7));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int k = 0; k < 1000; ++k) {
        const Vec2 w{std::abs(u(rng)) / 3.0 * 0.999, std::abs(u(rng)) / 3.0 * 0.999};
        const Vec2 y{u(rng), u(rng)}, z{u(rng), u(rng)};
        const Vec2 a = shift(shift(w, y), z), b = shift(w, y + z);
        for (int i = 0; i < 2; ++i) {
            double d = std::abs(a[i] - b[i]);
            d = std::min(d, 1.0 - d);
            CHECK(d < 1e-12);
        }
    }
}

TEST_CASE("sampling is deterministic and uniform") {
    CHECK(sample_omega(42).omega == sample_omega(42).omega);
    CHECK(sample_omega(42).omega != sample_omega(43).omega);
    const int N = 100000;
    const auto w = sample_omegas(11, N);
    double m0 = 0.0, m1 = 0.0;
    for (const auto& v : w) {
        CHECK(v[0] >= 0.0);
        CHECK(v[0] < 1.0);
        m0 += v[0];
        m1 += v[1];
    }
    const double sigma = (1.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(N));
    CHECK(std::abs(m0 / N - 0.5) <= 3 * sigma);
    CHECK(std::abs(m1 / N - 0.5) <= 3 * sigma);
}

TEST_CASE("measure invariance under the shift") {
    const int N = 100000;
    const auto w = sample_omegas(5, N);
    for (const Vec2 y : {Vec2{0.0, 0.0}, Vec2{0.37, 0.11}, Vec2{2.5, -1.25}}) {
        double s = 0.0, s2 = 0.0;
        for (const auto& v : w) {
            const double x = g(shift(v, y));
            s += x;
            s2 += x * x;
        }
        const double mean = s / N, sd = std::sqrt(s2 / N - mean * mean);
        CHECK(std::abs(mean - 1.0) <= 3 * sd / std::sqrt(static_cast<double>(N)));
    }
}

TEST_CASE("ergodic averages along an irrational direction") {
    const Vec2 v{std::sqrt(2.0) - 1.0, std::sqrt(3.0) - 1.0};
    const Vec2 w0 = sample_omega(9).omega;
    for (int K : {1000, 10000, 100000}) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += g(shift(w0, k * v)) - 1.0;
        CHECK(std::abs(s / K) <= 10.0 / std::sqrt(static_cast<double>(K)));
    }
}

TEST_CASE("coefficient fields: floor, evaluation and periodicity") {
    const CoefficientField f = oscillating();
    CHECK_NOTHROW(f.validate());
    CHECK(f.certified_min() == doctest::Approx(0.75));
    CoefficientField bad = f;
    bad.floor = 0.8;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    double lo = 1e9;
    const int n = 256;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Vec2 p{(i + 0.5) / n, (j + 0.5) / n};
            lo = std::min({lo, f.value(p, p), f.value({p[1], p[0]}, p)});
        }
    CHECK(lo >= f.floor);

    const CoefficientField c = CoefficientField::constant("eta", 3.0);
    CHECK(eval_field_eps(c, {0.3, 0.1}, {0.77, 0.21}, 0.25) == 3.0);

    CoefficientField y1{"rho_f", 2.0, 1.0, {{{1, 0}, 0.5}}, {}};
    CHECK(eval_field_eps(y1, {0.0, 0.0}, {0.25, 0.0}, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eval_field_eps(y1, {0.0, 0.0}, {0.5, 0.0}, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
    const double eps = 0.25;
    for (const Vec2 x : {Vec2{0.1, 0.2}, Vec2{0.33, 0.71}}) {
        const Vec2 xs{x[0] + eps * eps, x[1]};
        CHECK(std::abs(eval_field_eps(y1, {0.4, 0.6}, x, eps) - eval_field_eps(y1, {0.4, 0.6}, xs, eps)) < 1e-12);
    }

    // the omega argument follows T(x/eps) omega
    CoefficientField w1{"eta", 2.0, 1.0, {}, {{{1, 0}, 0.5}}};
    const Vec2 om{0.1, 0.0};
    const Vec2 x{0.05, 0.3};
    CHECK(eval_field_eps(w1, om, x, 0.5) == doctest::Approx(2.0 + 0.5 * std::cos(kTwoPi * (0.1 + 0.1))));
}

TEST_CASE("omega and y means") {
    const CoefficientField f = oscillating();
    const Vec2 y{0.3, 0.6};
    double s = 0.0;
    const int K = 8;
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) s += f.value({static_cast<double>(a) / K, static_cast<double>(b) / K}, y);
    CHECK(std::abs(s / (K * K) - f.omega_mean(y)) < 1e-12);
    CHECK(f.has_omega_modes());
    CHECK(f.has_y_modes());
    CHECK(f.max_omega_frequency() == 2);
    CHECK(f.max_y_frequency() == 2);
}

TEST_CASE("dielectric coefficient dispatches on the phase") {
    const TemplateCell cell = build_template_cell(UnitCellSpec{});
    const PerforatedMesh m = tile_domain(cell, 2);
    const auto rf = CoefficientField::constant("rho_f", 1.5), rs = CoefficientField::constant("rho_s", 0.25);
    CHECK(eval_theta_eps(rf, rs, m, {0.1, 0.2}, {0.25, 0.25}, 0.5) == 0.25);
    CHECK(eval_theta_eps(rf, rs, m, {0.1, 0.2}, {0.01, 0.01}, 0.5) == 1.5);
    CHECK_THROWS_AS(eval_theta_eps(rf, rs, m, {0.1, 0.2}, {1.5, 0.01}, 0.5), DomainError);
    const auto same = CoefficientField::constant("rho_s", 1.5);
    double s = 0.0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& tr = m.triangles[t];
        const Vec2 c = (1.0 / 3.0) * (m.vertices[tr[0]] + m.vertices[tr[1]] + m.vertices[tr[2]]);
        s += m.triangle_area(static_cast<int>(t)) * eval_theta_eps(rf, same, m, {0.0, 0.0}, c, 0.5);
    }
    CHECK(std::abs(s - 1.5) < 1e-12);
}

TEST_CASE("gamma functions") {
    GammaFunction lin;
    CHECK(lin(0.0) == 0.0);
    CHECK(lin.is_linear());
    GammaFunction sat;
    sat.kind = GammaFunction::Kind::saturated;
    sat.alpha = 0.5;
    sat.lipschitz = 2.0;
    sat.saturation = 0.7;
    CHECK_NOTHROW(sat.validate());
    CHECK(sat(0.0) == 0.0);
    CHECK_FALSE(sat.is_linear());
    const double h = 1e-5;
    for (double r = -10.0; r <= 10.0; r += 0.01) {
        const double fd = (sat(r + h) - sat(r - h)) / (2 * h);
        CHECK(fd >= sat.alpha - 1e-6);
        CHECK(fd <= sat.lipschitz + 1e-6);
        CHECK(std::abs(fd - sat.derivative(r)) < 1e-6);
    }
    GammaFunction bad = sat;
    bad.lipschitz = 0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = lin;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
