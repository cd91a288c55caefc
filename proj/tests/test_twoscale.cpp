#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "spnp/geometry.hpp"
#include "spnp/twoscale.hpp"

using namespace spnp;

namespace {

const TestIntegrand& by_name(const std::vector<TestIntegrand>& s, const std::string& n) {
    for (const auto& a : s)
        if (a.name == n) return a;
    throw std::runtime_error("missing integrand " + n);
}

}  // namespace

TEST_CASE("exact factor integrals") {
    const auto suite = integrand_suite();
    CHECK(integral_x(by_name(suite, "f")) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(integral_y(by_name(suite, "h")) == doctest::Approx(1.0).epsilon(1e-14));
    const TestIntegrand& p2 = by_name(suite, "fgh_p2");
    CHECK(p2.p == 2);
    // int x1^2 = 1/3, int (1 + .5c1 + .3c2)^2 = 1 + .125 + .045, int (1 + .5 c)^2 = 1.125
    CHECK(integral_x(p2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(integral_omega(p2) == doctest::Approx(1.17).epsilon(1e-14));
    CHECK(integral_y(p2) == doctest::Approx(1.125).epsilon(1e-14));
    CHECK(volume_reference(p2) == doctest::Approx(1.0 / 3.0 * 1.17 * 1.125).epsilon(1e-14));
}

TEST_CASE("trig polynomial products are exact") {
    const TrigPoly a{1.0, {{{1, 0}, 0.5}}}, b{2.0, {{{1, 1}, 0.3}}};
    const TrigPoly ab = a * b;
    for (const Vec2 p : {Vec2{0.1, 0.7}, Vec2{0.42, 0.13}}) CHECK(ab(p) == doctest::Approx(a(p) * b(p)).epsilon(1e-14));
}

TEST_CASE("volume oscillation: trivial and y-only integrands") {
    const auto suite = integrand_suite();
    const OscillationEstimate one = volume_oscillation(by_name(suite, "one"), 0.25, 64, 1, 0.25 * 0.25 / 8);
    CHECK(std::abs(one.value - 1.0) < 1e-12);
    CHECK(one.M == 1);
    CHECK(one.mc_stderr == 0.0);
    for (double eps : {0.5, 0.25, 0.125}) {
        const OscillationEstimate f = volume_oscillation(by_name(suite, "f"), eps, 64, 1, eps * eps / 8);
        CHECK(std::abs(f.value - 0.5) < 1e-12);
    }
    const OscillationEstimate h = volume_oscillation(by_name(suite, "h"), 0.25, 64, 1, 0.25 * 0.25 / 8);
    CHECK(std::abs(h.value - 1.0) <= 1e-3);
}

TEST_CASE("volume resolution gate refuses coarse spacing") {
    const auto suite = integrand_suite();
    CHECK_THROWS_AS(volume_oscillation(by_name(suite, "h"), 0.25, 1, 1, 0.25 * 0.25 / 4), ConfigError);
    TwoScaleOptions opt;
    opt.points_per_period = 4;
    const OscillationReport r = convergence_table(OscillationOp::volume, by_name(suite, "h"), {0.5, 0.25}, opt);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) {
        CHECK(row.refused);
        CHECK(std::isnan(row.value));
        CHECK(row.message.find("required spacing") != std::string::npos);
    }
}

TEST_CASE("omega design: shifted lattice for square M") {
    const auto d = omega_design(64, 3);
    REQUIRE(d.size() == 64);
    // lattice: every row of 8 points shares the second coordinate and is equispaced
    for (int j = 0; j < 8; ++j)
        for (int i = 1; i < 8; ++i) {
            CHECK(d[j * 8 + i][1] == d[j * 8][1]);
            double gap = d[j * 8 + i][0] - d[j * 8 + i - 1][0];
            if (gap < 0) gap += 1.0;
            CHECK(gap == doctest::Approx(0.125).epsilon(1e-12));
        }
    CHECK(omega_design(64, 3) == d);
    CHECK(omega_design(10, 3).size() == 10);
}

TEST_CASE("surface oscillation: constant and omega-only integrands") {
    const TemplateCell cell = build_template_cell(UnitCellSpec{});
    const auto suite = integrand_suite();
    const double perim = 64 * 2 * 0.25 * std::sin(kPi / 64);
    for (int n : {2, 4, 8}) {
        const PerforatedMesh m = tile_domain(cell, n);
        const OscillationEstimate one = surface_oscillation(by_name(suite, "one"), m, 1.0 / n, 64, 1);
        CHECK(std::abs(one.value - perim) < 1e-11);
        const TestIntegrand& fg = by_name(suite, "fg");
        const OscillationEstimate e = surface_oscillation(fg, m, 1.0 / n, 64, 1);
        CHECK(std::abs(e.value - surface_reference(fg, perim)) / surface_reference(fg, perim) < 1e-10);
    }
    const PerforatedMesh plain = tile_domain(build_template_cell([] {
                                                 UnitCellSpec s;
                                                 s.inclusion_radius = 0.0;
                                                 return s;
                                             }()),
                                             2);
    CHECK_THROWS_AS(surface_oscillation(by_name(suite, "one"), plain, 0.5, 1, 1), MeshError);
}

TEST_CASE("surface limit of a y-oscillation is the cell mean times the interface length") {
    const TemplateCell cell = build_template_cell(UnitCellSpec{});
    const auto suite = integrand_suite();
    const TestIntegrand& h = by_name(suite, "h");
    const PerforatedMesh m1 = tile_domain(cell, 1);
    const double trace = integral_gamma_h(h, m1);
    const double limit = surface_reference(h, cell.interface_length());
    CHECK(std::abs(limit - cell.interface_length()) < 1e-12);
    // the template trace differs from the limit by several percent
    CHECK(std::abs(trace - limit) / limit > 0.05);
    double prev_limit_err = 1e9;
    for (int n : {2, 4, 8, 16}) {
        const PerforatedMesh m = tile_domain(cell, n);
        const double v = surface_oscillation(h, m, 1.0 / n, 1, 1).value;
        const double err_limit = std::abs(v - limit) / limit;
        const double err_trace = std::abs(v - trace) / trace;
        CHECK(err_limit < prev_limit_err);
        if (n >= 4) CHECK(err_limit < err_trace);
        prev_limit_err = err_limit;
    }
}

TEST_CASE("convergence table: layout, constants and the product rule") {
    const auto suite = integrand_suite();
    TwoScaleOptions opt;
    const OscillationReport r =
        convergence_table(OscillationOp::volume, by_name(suite, "one"), {0.5, 0.25, 0.125}, opt);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) CHECK(row.rel_error < 1e-12);
    CHECK(r.inversions() == 0);
    CHECK_FALSE(r.non_monotone_flag);
    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str().rfind("eps,M,value,reference,rel_error,mc_stderr\n", 0) == 0);
    CHECK_THROWS_AS(convergence_table(OscillationOp::volume, by_name(suite, "one"), {0.25, 0.5}, opt), ConfigError);
    CHECK_THROWS_AS(convergence_table(OscillationOp::volume, by_name(suite, "one"), {0.3}, opt), ConfigError);

    // product of two integrands converges to the triple integral of the product
    const TestIntegrand u = by_name(suite, "fg"), v = by_name(suite, "h");
    const TestIntegrand uv = u * v;
    const OscillationReport pr = convergence_table(OscillationOp::volume, uv, {0.5, 0.25, 0.125}, opt);
    CHECK(pr.rows.back().rel_error <= 1e-3);
    CHECK(pr.rows.back().reference ==
          doctest::Approx(integral_x(u) * integral_omega(u) * integral_y(v)).epsilon(1e-14));
}

TEST_CASE("p = 2 volume variant converges to the squared-factor reference") {
    const auto suite = integrand_suite();
    TwoScaleOptions opt;
    const OscillationReport r =
        convergence_table(OscillationOp::volume, by_name(suite, "fgh_p2"), {0.5, 0.25, 0.125, 0.0625}, opt);
    CHECK(r.inversions() == 0);
    CHECK(r.rows[2].rel_error <= 0.05);
    CHECK(r.rows[3].rel_error <= 0.02);
}
