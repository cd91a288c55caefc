#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <string>

#include "spnp/geometry.hpp"
#include "spnp/micro_pnp.hpp"

using namespace spnp;

namespace {

UnitCellSpec coarse_spec(double r = 0.25) {
    UnitCellSpec s;
    s.inclusion_radius = r;
    s.n_interface_segments = 16;
    s.target_edge_length = 1.0 / 8.0;
    return s;
}

MediumFields oscillating_fields() {
    MediumFields f;
    f.rho_f = CoefficientField::constant("rho_f", 1.0);
    f.rho_f.floor = 0.5;
    f.rho_f.y_modes.push_back({{1, 0}, 0.2});
    f.rho_f.w_modes.push_back({{1, 0}, 0.1});
    f.rho_s = CoefficientField::constant("rho_s", 0.5);
    f.rho_s.floor = 0.3;
    f.rho_s.y_modes.push_back({{0, 1}, 0.1});
    f.eta = CoefficientField::constant("eta", 1.0);
    f.eta.floor = 0.5;
    f.eta.w_modes.push_back({{0, 1}, 0.02});
    return f;
}

PnpParams short_params() {
    PnpParams p;
    p.dt = 0.01;
    p.t_final = 0.05;
    p.n_outputs = 5;
    return p;
}

InitialProfile gaussian(double base, double amp) {
    InitialProfile g;
    g.kind = InitialProfile::Kind::gaussian;
    g.base = base;
    g.amplitude = amp;
    g.center = {0.4, 0.55};
    g.width = 0.15;
    return g;
}

double max_abs(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_diff(const Vector& a, const Vector& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("output step schedule") {
    CHECK(output_steps(10, 5) == std::vector<int>{0, 2, 4, 6, 8, 10});
    CHECK(output_steps(0, 5) == std::vector<int>{0});
    CHECK(output_steps(3, 10) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("uniform neutral state is an equilibrium") {
    const TemplateCell cell = build_template_cell(coarse_spec());
    const PerforatedMesh mesh = tile_domain(cell, 2);
    const MicroProblem prob(mesh, short_params(), oscillating_fields(), {0.3, 0.7});
    const MicroResult res = prob.run(InitialProfile::constant(1.0), InitialProfile::constant(1.0));
    REQUIRE(res.snapshots.size() == 6);
    for (const auto& s : res.snapshots) {
        CHECK(max_abs(s.potential) <= 1e-12);
        for (double v : s.conc_plus) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        for (double v : s.conc_minus) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(res.max_mass_drift <= 1e-12);
    CHECK_FALSE(res.negativity_flag);
}

TEST_CASE("zero data gives zero potential") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    const MicroProblem prob(mesh, short_params(), oscillating_fields(), {0.1, 0.2});
    const MicroState s = prob.initial_condition(InitialProfile::constant(0.0), InitialProfile::constant(0.0));
    CHECK(max_abs(s.potential) == 0.0);
    CHECK(prob.pi_eps(s) == 0.0);
}

TEST_CASE("mass conservation and charge-surface identity") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 4);
    PnpParams p = short_params();
    p.c = 2.0;
    const MicroProblem prob(mesh, p, oscillating_fields(), {0.25, 0.6});
    const MicroResult res = prob.run(gaussian(1.0, 0.8), InitialProfile::constant(1.0));
    CHECK(res.max_mass_drift <= 1e-10);
    CHECK(res.max_identity_residual <= 1e-8);
    CHECK(res.max_pi_drift <= 1e-8);
    REQUIRE(res.ledger.rows.size() == 6);
    for (const auto& row : res.ledger.rows) {
        CHECK(row.mass_plus == doctest::Approx(res.ledger.rows[0].mass_plus).epsilon(1e-12));
        CHECK(row.gummel_iters >= 0);
    }
    // initial mass: lumped P1 mass of the interpolant over the fluid region
    CHECK(res.ledger.rows[0].mass_minus == doctest::Approx(mesh.fluid_area()).epsilon(1e-12));
}

TEST_CASE("positive excess charge gives positive surface integral") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    const MicroProblem prob(mesh, short_params(), MediumFields{}, {0.0, 0.0});
    const MicroState s = prob.initial_condition(gaussian(0.0, 1.0), InitialProfile::constant(0.0));
    const double charge = prob.charge(s);
    CHECK(charge > 0.0);
    CHECK(prob.pi_eps(s) == doctest::Approx(charge).epsilon(1e-8));
    CHECK(prob.pi_eps(s) == doctest::Approx(prob.mass(s.conc_plus)).epsilon(1e-8));
}

TEST_CASE("zero drift constant matches disabled drift") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    PnpParams a = short_params();
    a.c = 0.0;
    PnpParams b = short_params();
    b.disable_drift = true;
    const MicroProblem pa(mesh, a, oscillating_fields(), {0.5, 0.5});
    const MicroProblem pb(mesh, b, oscillating_fields(), {0.5, 0.5});
    const MicroResult ra = pa.run(gaussian(1.0, 0.5), gaussian(0.5, 0.2));
    const MicroResult rb = pb.run(gaussian(1.0, 0.5), gaussian(0.5, 0.2));
    REQUIRE(ra.snapshots.size() == rb.snapshots.size());
    const auto& sa = ra.snapshots.back();
    const auto& sb = rb.snapshots.back();
    CHECK(max_diff(sa.conc_plus, sb.conc_plus) <= 1e-10);
    CHECK(max_diff(sa.conc_minus, sb.conc_minus) <= 1e-10);
    CHECK(max_diff(sa.potential, sb.potential) <= 1e-10);
}

TEST_CASE("drift moves cations down the potential gradient") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    PnpParams drift = short_params();
    drift.c = 5.0;
    PnpParams nodrift = drift;
    nodrift.c = 0.0;
    const MicroProblem pd(mesh, drift, MediumFields{}, {0.0, 0.0});
    const MicroProblem pn(mesh, nodrift, MediumFields{}, {0.0, 0.0});
    const MicroResult rd = pd.run(gaussian(1.0, 1.0), InitialProfile::constant(1.0));
    const MicroResult rn = pn.run(gaussian(1.0, 1.0), InitialProfile::constant(1.0));
    // the cation peak sits at a potential maximum, so drift spreads it faster
    CHECK(max_abs(rd.snapshots.back().conc_plus) < max_abs(rn.snapshots.back().conc_plus));
    CHECK(rd.max_mass_drift <= 1e-10);
}

TEST_CASE("t_final zero yields the initial snapshot only") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    PnpParams p = short_params();
    p.t_final = 0.0;
    const MicroProblem prob(mesh, p, MediumFields{}, {0.0, 0.0});
    const MicroResult res = prob.run(gaussian(1.0, 0.5), InitialProfile::constant(1.0));
    CHECK(res.snapshots.size() == 1);
    CHECK(res.ledger.rows.size() == 1);
    CHECK(res.snapshots[0].t == 0.0);
}

TEST_CASE("manufactured potential converges at second order") {
    // theta = 1, no inclusion: -lap u = a F cos(pi x) cos(pi y) with natural
    // boundary conditions has u = a F / (2 pi^2) cos(pi x) cos(pi y).
    const double a = 0.5;
    const InitialProfile plus{InitialProfile::Kind::cosine, 1.0, a, {0.5, 0.5}, 0.1, {1, 1}};
    double prev = 0.0;
    for (int n : {2, 4, 8}) {
        const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec(0.0)), n);
        const MicroProblem prob(mesh, PnpParams{}, MediumFields{}, {0.0, 0.0});
        const MicroState s = prob.initial_condition(plus, InitialProfile::constant(1.0));
        double mean = 0.0;
        for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
            const auto& tri = mesh.triangles[t];
            mean += mesh.triangle_area(t) *
                    (s.potential[tri[0]] + s.potential[tri[1]] + s.potential[tri[2]]) / 3.0;
        }
        double err = 0.0;
        for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
            const Vec2& x = mesh.vertices[v];
            const double exact = a / (2.0 * kPi * kPi) * std::cos(kPi * x[0]) * std::cos(kPi * x[1]);
            err = std::max(err, std::abs(s.potential[v] - mean - exact));
        }
        if (prev > 0.0) CHECK(prev / err >= 3.0);
        prev = err;
    }
    CHECK(prev <= 2e-4);
}

TEST_CASE("saturated gamma: Newton path keeps the identity") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    MediumFields lin = oscillating_fields();
    MediumFields sat = lin;
    sat.gamma.kind = GammaFunction::Kind::saturated;
    sat.gamma.alpha = 0.5;
    sat.gamma.lipschitz = 2.0;
    sat.gamma.saturation = 0.05;
    const MicroProblem pl(mesh, short_params(), lin, {0.2, 0.3});
    const MicroProblem ps(mesh, short_params(), sat, {0.2, 0.3});
    const MicroResult rl = pl.run(gaussian(1.0, 2.0), InitialProfile::constant(1.0));
    const MicroResult rs = ps.run(gaussian(1.0, 2.0), InitialProfile::constant(1.0));
    CHECK(rs.max_identity_residual <= 1e-8);
    CHECK(rs.max_mass_drift <= 1e-10);
    CHECK(max_diff(rl.snapshots[0].potential, rs.snapshots[0].potential) > 1e-4);
    // equal charge, so the surface integrals agree while the potentials differ
    CHECK(ps.pi_eps(rs.snapshots[0]) == doctest::Approx(pl.pi_eps(rl.snapshots[0])).epsilon(1e-8));
}

TEST_CASE("runs are deterministic and snapshot CSV is well formed") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    const MicroProblem prob(mesh, short_params(), oscillating_fields(), {0.4, 0.9});
    auto csv = [&]() {
        const MicroResult r = prob.run(gaussian(1.0, 0.5), InitialProfile::constant(1.0));
        std::ostringstream os;
        write_snapshot_csv(os, prob, r.snapshots.back());
        r.ledger.write_csv(os);
        return os.str();
    };
    const std::string a = csv(), b = csv();
    CHECK(a == b);
    std::istringstream is(a);
    std::string line;
    std::getline(is, line);
    CHECK(line == "vertex_id,x,y,conc_plus,conc_minus,potential");
    int rows = 0;
    while (std::getline(is, line) && line.find(',') != std::string::npos && std::isdigit(line[0])) ++rows;
    CHECK(rows == prob.fluid_dofs().count);
}

TEST_CASE("negative initial data is rejected") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    const MicroProblem prob(mesh, short_params(), MediumFields{}, {0.0, 0.0});
    InitialProfile bad = gaussian(0.1, -1.0);
    CHECK_THROWS_AS(prob.initial_condition(bad, InitialProfile::constant(1.0)), ConfigError);
}

TEST_CASE("edge-upwind drift: conservative, nonnegative, close to the central scheme") {
    const PerforatedMesh mesh = tile_domain(build_template_cell(coarse_spec()), 2);
    PnpParams central = short_params();
    central.c = 2.0;
    PnpParams upwind = central;
    upwind.edge_upwind = true;
    const MicroProblem pc(mesh, central, oscillating_fields(), {0.3, 0.4});
    const MicroProblem pu(mesh, upwind, oscillating_fields(), {0.3, 0.4});
    const MicroResult rc = pc.run(gaussian(1.0, 1.0), InitialProfile::constant(1.0));
    const MicroResult ru = pu.run(gaussian(1.0, 1.0), InitialProfile::constant(1.0));
    CHECK(ru.max_mass_drift <= 1e-10);
    CHECK(ru.max_identity_residual <= 1e-8);
    CHECK(max_diff(rc.snapshots.back().conc_plus, ru.snapshots.back().conc_plus) <= 0.05);
    CHECK(max_diff(rc.snapshots.back().conc_plus, ru.snapshots.back().conc_plus) > 0.0);

    PnpParams steep = upwind;
    steep.c = 200.0;
    const MicroProblem ps(mesh, steep, MediumFields{}, {0.0, 0.0});
    const MicroResult rs = ps.run(gaussian(0.0, 3.0), InitialProfile::constant(0.0));
    CHECK(rs.max_mass_drift <= 1e-10);
    CHECK_FALSE(rs.negativity_flag);
    for (const auto& row : rs.ledger.rows) CHECK(row.min_conc >= -1e-12);
}
