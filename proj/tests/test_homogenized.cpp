#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "json.hpp"
#include "spnp/assembly.hpp"
#include "spnp/geometry.hpp"
#include "spnp/homogenized.hpp"
#include "spnp/quadrature.hpp"

using namespace spnp;

namespace {

UnitCellSpec coarse_spec(double r = 0.25) {
    UnitCellSpec s;
    s.inclusion_radius = r;
    s.n_interface_segments = 16;
    s.target_edge_length = 1.0 / 8.0;
    return s;
}

CoefficientField field(const std::string& name, double base, std::vector<Mode> y, std::vector<Mode> w,
                       double floor = 0.1) {
    CoefficientField f;
    f.name = name;
    f.base = base;
    f.floor = floor;
    f.y_modes = std::move(y);
    f.w_modes = std::move(w);
    return f;
}

double max_entry_diff(const Mat2& a, const Mat2& b) {
    double m = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
    return m;
}

// Effective conductivity of a square array of insulating cylinders, fraction f.
double rayleigh_insulating(double f) {
    return 1.0 - 2.0 * f / (1.0 + f - 0.305827 * std::pow(f, 4) - 0.013362 * std::pow(f, 8));
}

}  // namespace

TEST_CASE("no inclusion: identity tensors and no surface") {
    const TemplateCell cell = build_template_cell(coarse_spec(0.0));
    const EffectiveCoefficients eff = compute_effective(cell, MediumFields{}, 8);
    CHECK(eff.theta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(max_entry_diff(eff.A_hom, identity_mat2()) <= 1e-12);
    CHECK(max_entry_diff(eff.B_hom, identity_mat2()) <= 1e-12);
    CHECK(max_entry_diff(eff.theta_eff, identity_mat2()) <= 1e-12);
    CHECK(eff.s_bar == 0.0);
}

TEST_CASE("species tensor: symmetry, bounds and the dilute-array oracle") {
    const TemplateCell cell = build_template_cell(UnitCellSpec{});
    const CellProblemSolution sol = solve_species_cell(cell);
    const Mat2& A = sol.tensor;
    CHECK(std::abs(A[0][1]) <= 1e-8);
    CHECK(std::abs(A[1][0]) <= 1e-8);
    CHECK(std::abs(A[0][0] - A[1][1]) <= 1e-8);
    const double theta = cell.fluid_area();
    CHECK(A[0][0] > 0.0);
    CHECK(A[0][0] < theta);
    const double f = regular_polygon_area(0.25, 64);
    CHECK(A[0][0] == doctest::Approx(rayleigh_insulating(f)).epsilon(2e-3));
    CHECK(sol.residual <= 1e-10);
    // correctors have zero mean over the fluid part
    for (int k = 0; k < 2; ++k) {
        double mean = 0.0;
        for (int t = 0; t < static_cast<int>(cell.triangles.size()); ++t) {
            if (cell.phases[t] != Phase::fluid) continue;
            const auto& tri = cell.triangles[t];
            mean += cell.triangle_area(t) *
                    (sol.corrector[k][tri[0]] + sol.corrector[k][tri[1]] + sol.corrector[k][tri[2]]) / 3.0;
        }
        CHECK(std::abs(mean) <= 1e-10);
    }
}

TEST_CASE("species tensor converges under refinement") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const double coarse = solve_species_cell(cell).tensor[0][0];
    const double mid = solve_species_cell(refine_uniform(cell)).tensor[0][0];
    const double fine = solve_species_cell(refine_uniform(refine_uniform(cell))).tensor[0][0];
    CHECK(coarse >= mid);
    CHECK(mid >= fine);
    CHECK(std::abs(coarse - fine) / fine <= 0.02);
    CHECK(std::abs(mid - fine) < std::abs(coarse - fine));
}

TEST_CASE("drift tensor equals the species tensor") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    MediumFields fields;
    fields.rho_f = field("rho_f", 1.0, {{{1, 0}, 0.3}}, {}, 0.5);
    fields.rho_s = field("rho_s", 0.5, {{{0, 1}, 0.2}}, {}, 0.2);
    const EffectiveCoefficients eff = compute_effective(cell, fields, 8);
    CHECK(max_entry_diff(eff.A_hom, eff.B_hom) <= 1e-10);
    const EffectiveCoefficients plain = compute_effective(cell, MediumFields{}, 8);
    CHECK(max_entry_diff(plain.A_hom, plain.B_hom) <= 1e-10);
}

TEST_CASE("constant dielectric is reproduced exactly") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const auto c0 = CoefficientField::constant("c", 2.0);
    const DielectricResult d = solve_dielectric_cells(c0, c0, cell, 8);
    CHECK(max_entry_diff(d.theta_eff, scaled_identity(2.0)) <= 1e-10);
    CHECK(d.stage1_solves == 1);
}

TEST_CASE("layered dielectric in y: harmonic and arithmetic means") {
    UnitCellSpec spec;
    spec.inclusion_radius = 0.0;
    const TemplateCell cell = build_template_cell(spec);
    const double b = 1.0, a = 0.6;
    const auto layered = field("theta", b, {{{1, 0}, a}}, {});
    const DielectricResult d = solve_dielectric_cells(layered, layered, cell, 8);
    CHECK(d.theta_eff[0][0] == doctest::Approx(std::sqrt(b * b - a * a)).epsilon(0.01));
    CHECK(d.theta_eff[1][1] == doctest::Approx(b).epsilon(1e-6));
    CHECK(std::abs(d.theta_eff[0][1]) <= 1e-8);
}

TEST_CASE("layered dielectric in omega: harmonic and arithmetic means") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const double b = 1.0, a = 0.6;
    const auto layered = field("theta", b, {}, {{{1, 0}, a}});
    const DielectricResult d = solve_dielectric_cells(layered, layered, cell, 32);
    CHECK(d.stage1_solves == 32 * 32);
    CHECK(d.theta_eff[0][0] == doctest::Approx(std::sqrt(b * b - a * a)).epsilon(0.01));
    CHECK(d.theta_eff[1][1] == doctest::Approx(b).epsilon(1e-6));
    CHECK(std::abs(d.theta_eff[0][1]) <= 1e-8);
}

TEST_CASE("dielectric tensor lies between the Reuss and Voigt bounds") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const QuadratureRule q7 = QuadratureRule::triangle7();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int K = 8;
    for (int trial = 0; trial < 20; ++trial) {
        auto random_modes = [&](int count, double budget) {
            std::vector<Mode> m;
            for (int i = 0; i < count; ++i)
                m.push_back({{static_cast<int>(u(rng) * 3), static_cast<int>(u(rng) * 3)},
                             budget / count * (2.0 * u(rng) - 1.0)});
            return m;
        };
        const double bf = 0.5 + 2.0 * u(rng), bs = 0.5 + 2.0 * u(rng);
        const auto rf = field("rho_f", bf, random_modes(2, 0.4 * bf), random_modes(1, 0.2 * bf), 0.3 * bf);
        const auto rs = field("rho_s", bs, random_modes(2, 0.4 * bs), random_modes(1, 0.2 * bs), 0.3 * bs);
        auto theta = [&](const Vec2& w, const Vec2& y, Phase ph) {
            return (ph == Phase::fluid ? rf : rs).value(w, y);
        };
        double voigt = 0.0, reuss = 0.0;
        for (int b = 0; b < K; ++b)
            for (int a = 0; a < K; ++a) {
                const Vec2 w{static_cast<double>(a) / K, static_cast<double>(b) / K};
                for (int t = 0; t < static_cast<int>(cell.triangles.size()); ++t) {
                    const auto& tri = cell.triangles[t];
                    const P1Element e = p1_element(cell.vertices[tri[0]], cell.vertices[tri[1]],
                                                   cell.vertices[tri[2]]);
                    for (std::size_t q = 0; q < q7.points.size(); ++q) {
                        const double v = theta(w, e.map(q7.points[q]), cell.phases[t]);
                        voigt += 2.0 * q7.weights[q] * e.area * v;
                        reuss += 2.0 * q7.weights[q] * e.area / v;
                    }
                }
            }
        voigt /= K * K;
        reuss = K * K / reuss;
        const DielectricResult d = solve_dielectric_cells(rf, rs, cell, K);
        const auto ev = sym_eigenvalues(d.theta_eff);
        CHECK(ev[0] > 0.0);
        CHECK(ev[0] >= reuss * (1.0 - 1e-3));
        CHECK(ev[1] <= voigt * (1.0 + 1e-9));
        CHECK(std::abs(d.theta_eff[0][1] - d.theta_eff[1][0]) <= 1e-10);
    }
}

TEST_CASE("coarse omega grid is refused") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const auto f = field("theta", 1.0, {}, {{{3, 0}, 0.2}});
    CHECK_THROWS_AS(solve_dielectric_cells(f, f, cell, 8), ConfigError);
    CHECK_NOTHROW(solve_dielectric_cells(f, f, cell, 12));
}

TEST_CASE("omega-level species corrector vanishes unless injected") {
    const Mat2 A{{{0.67, 0.01}, {0.01, 0.6}}};
    CHECK(omega_stage_species(A, 16) <= 1e-10);
    const int K = 16;
    std::vector<Mat2> injected(K * K);
    for (int b = 0; b < K; ++b)
        for (int a = 0; a < K; ++a) injected[b * K + a] = scaled_identity(1.0 + 0.5 * std::cos(kTwoPi * a / K));
    CHECK(omega_stage_species_injected(injected, K) >= 1e-3);
}

TEST_CASE("surface factor") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const double gamma_len = regular_polygon_perimeter(0.25, 16);
    CHECK(cell.interface_length() == doctest::Approx(gamma_len).epsilon(1e-12));
    CHECK(surface_factor(CoefficientField::constant("eta", 1.7), cell) ==
          doctest::Approx(1.7 * gamma_len).epsilon(1e-12));
    const auto eta = field("eta", 1.0, {}, {{{1, 2}, 0.4}});
    CHECK(surface_factor(eta, cell) == doctest::Approx(gamma_len).epsilon(1e-10));
}

TEST_CASE("disjoint omega grids give consistent dielectric tensors") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const auto rf = field("rho_f", 1.0, {{{1, 0}, 0.2}}, {{{1, 0}, 0.1}}, 0.5);
    const auto rs = field("rho_s", 0.5, {{{0, 1}, 0.1}}, {{{0, 1}, 0.1}}, 0.2);
    const int K = 16;
    const DielectricResult a = solve_dielectric_cells(rf, rs, cell, K);
    const DielectricResult b = solve_dielectric_cells(rf, rs, cell, K, {0.5 / K, 0.5 / K});
    CHECK(max_entry_diff(a.theta_eff, b.theta_eff) <= 1e-3 * a.theta_eff[0][0]);
}

TEST_CASE("threaded dielectric solve matches the serial one") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const auto rf = field("rho_f", 1.0, {}, {{{1, 1}, 0.2}}, 0.5);
    const DielectricResult a = solve_dielectric_cells(rf, rf, cell, 8, {0.0, 0.0}, 1);
    const DielectricResult b = solve_dielectric_cells(rf, rf, cell, 8, {0.0, 0.0}, 3);
    CHECK(max_entry_diff(a.theta_eff, b.theta_eff) == 0.0);
}

TEST_CASE("effective coefficients JSON") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const EffectiveCoefficients eff = compute_effective(cell, MediumFields{}, 8);
    std::ostringstream os;
    write_effective_json(os, eff);
    const auto j = nlohmann::json::parse(os.str());
    CHECK(j.at("theta").get<double>() == eff.theta);
    CHECK(j.at("A_hom").at(0).at(0).get<double>() == eff.A_hom[0][0]);
    CHECK(j.at("s_bar").get<double>() == eff.s_bar);
}

TEST_CASE("macro problem: interpolation, equilibrium and conservation") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const EffectiveCoefficients eff = compute_effective(cell, MediumFields{}, 8);
    PnpParams p;
    p.dt = 0.01;
    p.t_final = 0.05;
    p.n_outputs = 5;
    const MacroProblem macro(16, eff, p, GammaFunction{});

    Vector lin(macro.vertices().size());
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 2.0 * macro.vertices()[i][0] - macro.vertices()[i][1];
    CHECK(macro.interpolate(lin, {0.37, 0.81}) == doctest::Approx(2.0 * 0.37 - 0.81).epsilon(1e-13));
    CHECK(macro.interpolate(lin, {1.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-13));

    const MacroResult neutral = macro.run(InitialProfile::constant(1.0), InitialProfile::constant(1.0));
    for (const auto& s : neutral.snapshots) {
        for (double v : s.potential) CHECK(std::abs(v) <= 1e-12);
        for (double v : s.conc_plus) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }

    InitialProfile g;
    g.kind = InitialProfile::Kind::gaussian;
    g.base = 1.0;
    g.amplitude = 0.8;
    g.center = {0.3, 0.6};
    g.width = 0.15;
    const MacroResult res = macro.run(g, InitialProfile::constant(1.0));
    CHECK(res.max_mass_drift <= 1e-10);
    CHECK(res.max_equilibrium_residual <= 1e-8);
    REQUIRE(!res.pi_macro.empty());
    // excess cations: the macro surface term is negative
    CHECK(res.pi_macro.front() < 0.0);
    CHECK(res.mass_plus.front() == doctest::Approx(res.mass_plus.back()).epsilon(1e-12));
    CHECK(res.mass_minus.front() == doctest::Approx(eff.theta).epsilon(1e-12));
}
