#include "spnp/twoscale.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "spnp/geometry.hpp"
#include "spnp/quadrature.hpp"

namespace spnp {

double Polynomial::operator()(const Vec2& x) const {
    double s = 0.0;
    for (const auto& t : terms) s += t.c * std::pow(x[0], t.a) * std::pow(x[1], t.b);
    return s;
}

Polynomial Polynomial::constant(double c) { return Polynomial{{{c, 0, 0}}}; }
Polynomial Polynomial::x1() { return Polynomial{{{1.0, 1, 0}}}; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
    std::map<std::pair<int, int>, double> acc;
    for (const auto& s : terms)
        for (const auto& t : o.terms) acc[{s.a + t.a, s.b + t.b}] += s.c * t.c;
    Polynomial out;
    for (const auto& [k, c] : acc) out.terms.push_back({c, k.first, k.second});
    return out;
}

double TrigPoly::operator()(const Vec2& p) const {
    double s = base;
    for (const auto& m : modes) s += m.amplitude * std::cos(kTwoPi * (m.k[0] * p[0] + m.k[1] * p[1]));
    return s;
}

double TrigPoly::lower_bound() const {
    double s = base;
    for (const auto& m : modes) s -= std::abs(m.amplitude);
    return s;
}

int TrigPoly::max_frequency() const {
    int f = 0;
    for (const auto& m : modes) f = std::max({f, std::abs(m.k[0]), std::abs(m.k[1])});
    return f;
}

TrigPoly TrigPoly::constant(double c) { return TrigPoly{c, {}}; }

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
    // canonical key: cos is even, so k and -k are the same mode
    std::map<std::array<int, 2>, double> acc;
    auto put = [&](std::array<int, 2> k, double a) {
        if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) k = {-k[0], -k[1]};
        acc[k] += a;
    };
    put({0, 0}, base * o.base);
    for (const auto& m : modes) put(m.k, m.amplitude * o.base);
    for (const auto& m : o.modes) put(m.k, m.amplitude * base);
    for (const auto& m : modes)
        for (const auto& n : o.modes) {
            put({m.k[0] + n.k[0], m.k[1] + n.k[1]}, 0.5 * m.amplitude * n.amplitude);
            put({m.k[0] - n.k[0], m.k[1] - n.k[1]}, 0.5 * m.amplitude * n.amplitude);
        }
    TrigPoly out;
    out.base = 0.0;
    for (const auto& [k, a] : acc) {
        if (k[0] == 0 && k[1] == 0)
            out.base += a;
        else if (a != 0.0)
            out.modes.push_back({k, a});
    }
    return out;
}

bool TestIntegrand::omega_dependent() const {
    for (const auto& m : g.modes)
        if (m.amplitude != 0.0 && (m.k[0] != 0 || m.k[1] != 0)) return true;
    return false;
}

double TestIntegrand::value(const Vec2& x, const Vec2& omega, const Vec2& y) const {
    return std::pow(std::abs(f(x) * g(omega) * h(y)), p);
}

TestIntegrand TestIntegrand::operator*(const TestIntegrand& o) const {
    if (p != 1 || o.p != 1) throw ConfigError("integrand product requires p = 1");
    TestIntegrand out;
    out.name = name + "*" + o.name;
    out.f = f * o.f;
    out.g = g * o.g;
    out.h = h * o.h;
    out.p = 1;
    return out;
}

namespace {

double powabs(double v, int p) { return std::pow(std::abs(v), p); }

// Trapezoid rule on an L x L periodic grid: exact for trig polynomials of degree < L.
double torus_integral(const TrigPoly& t, int p) {
    const bool smooth_power = (p % 2 == 0) || t.lower_bound() >= 0.0;
    const int L = smooth_power ? 2 * p * std::max(1, t.max_frequency()) + 2 : 512;
    double s = 0.0;
    for (int j = 0; j < L; ++j)
        for (int i = 0; i < L; ++i) s += powabs(t({static_cast<double>(i) / L, static_cast<double>(j) / L}), p);
    return s / (static_cast<double>(L) * L);
}

}  // namespace

double integral_x(const TestIntegrand& a) {
    std::vector<double> x, w;
    gauss_legendre(8, x, w);
    constexpr int panels = 8;
    double s = 0.0;
    for (int pj = 0; pj < panels; ++pj)
        for (int pi = 0; pi < panels; ++pi)
            for (int j = 0; j < 8; ++j)
                for (int i = 0; i < 8; ++i) {
                    const Vec2 pt{(pi + 0.5 * (x[i] + 1.0)) / panels, (pj + 0.5 * (x[j] + 1.0)) / panels};
                    s += 0.25 * w[i] * w[j] / (panels * panels) * powabs(a.f(pt), a.p);
                }
    return s;
}

double integral_omega(const TestIntegrand& a) { return torus_integral(a.g, a.p); }
double integral_y(const TestIntegrand& a) { return torus_integral(a.h, a.p); }

double integral_gamma_h(const TestIntegrand& a, const PerforatedMesh& mesh) {
    const TemplateCell& cell = mesh.cell();
    const QuadratureRule q = QuadratureRule::edge_gauss(8);
    double s = 0.0;
    for (const auto& e : cell.interface_edges) {
        const Vec2 &p0 = cell.vertices[e[0]], &p1 = cell.vertices[e[1]];
        const double len = norm(p1 - p0);
        for (std::size_t k = 0; k < q.points.size(); ++k)
            s += len * q.weights[k] * powabs(a.h(p0 + q.points[k][0] * (p1 - p0)), a.p);
    }
    return s;
}

double volume_reference(const TestIntegrand& a) { return integral_x(a) * integral_omega(a) * integral_y(a); }

double surface_reference(const TestIntegrand& a, double interface_length) {
    return integral_x(a) * integral_omega(a) * interface_length * integral_y(a);
}

std::vector<Vec2> omega_design(int M, std::uint64_t seed) {
    if (M < 1) throw ConfigError("omega_design: M must be >= 1");
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(M))));
    if (m >= 2 && m * m == M) {
        const Vec2 s = sample_omega(seed).omega;
        std::vector<Vec2> out;
        out.reserve(M);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                out.push_back({frac(s[0] + static_cast<double>(i) / m), frac(s[1] + static_cast<double>(j) / m)});
        return out;
    }
    return sample_omegas(seed, M);
}

namespace {

int inverse_eps(double eps) {
    const double inv = 1.0 / eps;
    const int n = static_cast<int>(std::lround(inv));
    if (n < 1 || std::abs(inv - n) > 1e-9 * inv) throw ConfigError("eps must be the reciprocal of a positive integer");
    return n;
}

OscillationEstimate summarize(const std::vector<double>& v) {
    OscillationEstimate e;
    e.M = static_cast<int>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= e.M;
    e.value = mean;
    if (e.M > 1) {
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= (e.M - 1);
        e.mc_stderr = std::sqrt(var / e.M);
    }
    return e;
}

}  // namespace

OscillationEstimate volume_oscillation(const TestIntegrand& a, double eps, int M, std::uint64_t seed,
                                       double spacing) {
    const int n = inverse_eps(eps);
    const double period = 1.0 / (static_cast<double>(n) * n);
    if (!(spacing > 0.0) || spacing > period / 8.0 * (1.0 + 1e-12)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "volume_oscillation: quadrature spacing %.6g under-resolves eps^2; required spacing <= %.6g",
                      spacing, period / 8.0);
        throw ConfigError(buf);
    }
    const int m = static_cast<int>(std::ceil(period / spacing - 1e-9));
    const int N = n * n * m;         // grid points per side
    const int P = n * m;             // period of x/eps on the grid
    const double d = 1.0 / N;

    std::vector<double> hy(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) hy[j * m + i] = powabs(a.h({(i + 0.5) / m, (j + 0.5) / m}), a.p);

    // W[s] = sum over grid points with x/eps = s (mod 1) of |f|^p |h|^p dA
    std::vector<double> W(static_cast<std::size_t>(P) * P, 0.0);
    for (int j = 0; j < N; ++j) {
        const double x2 = (j + 0.5) * d;
        const int sj = j % P, hj = j % m;
        for (int i = 0; i < N; ++i) {
            const double fx = powabs(a.f({(i + 0.5) * d, x2}), a.p);
            W[static_cast<std::size_t>(sj) * P + i % P] += fx * hy[hj * m + i % m];
        }
    }
    for (double& w : W) w *= d * d;

    const bool random = a.omega_dependent();
    const std::vector<Vec2> omegas = random ? omega_design(M, seed) : std::vector<Vec2>{Vec2{0.0, 0.0}};
    std::vector<double> vals;
    vals.reserve(omegas.size());
    for (const Vec2& om : omegas) {
        double s = 0.0;
        for (int j = 0; j < P; ++j)
            for (int i = 0; i < P; ++i)
                s += W[static_cast<std::size_t>(j) * P + i] *
                     powabs(a.g(shift(om, {(i + 0.5) / P, (j + 0.5) / P})), a.p);
        vals.push_back(s);
    }
    return summarize(vals);
}

OscillationEstimate surface_oscillation(const TestIntegrand& a, const PerforatedMesh& mesh, double eps, int M,
                                        std::uint64_t seed) {
    const int n = inverse_eps(eps);
    if (n != mesh.n) throw ConfigError("surface_oscillation: mesh does not match eps");
    if (mesh.interface_edges.empty()) throw MeshError("surface_oscillation: empty interface");
    const QuadratureRule q = QuadratureRule::edge_gauss(8);

    struct Point {
        Vec2 s;
        double c;
    };
    std::vector<Point> pts;
    pts.reserve(mesh.interface_edges.size() * q.points.size());
    for (const auto& e : mesh.interface_edges) {
        const Vec2 &p0 = mesh.vertices[e[0]], &p1 = mesh.vertices[e[1]];
        const double len = norm(p1 - p0);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const Vec2 x = p0 + q.points[k][0] * (p1 - p0);
            const auto args = fast_arguments({0.0, 0.0}, x, eps);
            const double c = eps * len * q.weights[k] * powabs(a.f(x), a.p) * powabs(a.h(args[1]), a.p);
            pts.push_back({args[0], c});
        }
    }
    const bool random = a.omega_dependent();
    const std::vector<Vec2> omegas = random ? omega_design(M, seed) : std::vector<Vec2>{Vec2{0.0, 0.0}};
    std::vector<double> vals;
    vals.reserve(omegas.size());
    for (const Vec2& om : omegas) {
        double s = 0.0;
        for (const auto& pt : pts) s += pt.c * powabs(a.g(shift(om, pt.s)), a.p);
        vals.push_back(s);
    }
    return summarize(vals);
}

int OscillationReport::inversions() const {
    int k = 0;
    const OscillationRow* prev = nullptr;
    for (const auto& r : rows) {
        if (r.refused) continue;
        if (prev && r.rel_error > prev->rel_error && r.rel_error > kErrorNoiseFloor) ++k;
        prev = &r;
    }
    return k;
}

void OscillationReport::write_csv(std::ostream& os) const {
    os << "eps,M,value,reference,rel_error,mc_stderr\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g\n", r.eps, r.M, r.value, r.reference,
                      r.rel_error, r.mc_stderr);
        os << buf;
    }
}

OscillationReport convergence_table(OscillationOp op, const TestIntegrand& a, const std::vector<double>& eps_list,
                                    const TwoScaleOptions& opt) {
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        inverse_eps(eps_list[i]);
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps list must be strictly decreasing");
    }
    OscillationReport rep;
    rep.op = op == OscillationOp::volume ? "volume" : "surface";
    rep.integrand = a.name;

    TemplateCell cell;
    double reference = 0.0;
    if (op == OscillationOp::surface) {
        UnitCellSpec spec;
        spec.inclusion_radius = opt.inclusion_radius;
        spec.n_interface_segments = opt.n_interface_segments;
        spec.target_edge_length = opt.target_edge_length;
        cell = build_template_cell(spec);
        reference = surface_reference(a, cell.interface_length());
    } else {
        reference = volume_reference(a);
    }

    for (double eps : eps_list) {
        OscillationEstimate est;
        if (op == OscillationOp::volume) {
            const double spacing = eps * eps / opt.points_per_period;
            try {
                est = volume_oscillation(a, eps, opt.M, opt.seed, spacing);
            } catch (const ConfigError& e) {
                OscillationRow row;
                row.eps = eps;
                row.M = 0;
                row.value = row.rel_error = row.mc_stderr = std::numeric_limits<double>::quiet_NaN();
                row.reference = reference;
                row.refused = true;
                row.message = e.what();
                rep.rows.push_back(row);
                continue;
            }
        } else {
            const PerforatedMesh mesh = tile_domain(cell, inverse_eps(eps));
            est = surface_oscillation(a, mesh, eps, opt.M, opt.seed);
        }
        OscillationRow row;
        row.eps = eps;
        row.M = est.M;
        row.value = est.value;
        row.reference = reference;
        row.rel_error = reference != 0.0 ? std::abs(est.value - reference) / std::abs(reference)
                                         : std::abs(est.value - reference);
        row.mc_stderr = est.mc_stderr;
        rep.rows.push_back(row);
    }
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto &a0 = rep.rows[i - 1], &a1 = rep.rows[i];
        if (!a0.refused && !a1.refused && a1.rel_error > kErrorNoiseFloor &&
            a1.rel_error > 2.0 * a0.rel_error)
            rep.non_monotone_flag = true;
    }
    return rep;
}

std::vector<TestIntegrand> integrand_suite() {
    const TrigPoly g{1.0, {{{1, 0}, 0.5}, {{1, 1}, 0.3}}};
    const TrigPoly h{1.0, {{{1, 0}, 0.5}}};
    std::vector<TestIntegrand> s;
    s.push_back({"one", Polynomial::constant(1.0), TrigPoly::constant(1.0), TrigPoly::constant(1.0), 1});
    s.push_back({"f", Polynomial::x1(), TrigPoly::constant(1.0), TrigPoly::constant(1.0), 1});
    s.push_back({"h", Polynomial::constant(1.0), TrigPoly::constant(1.0), h, 1});
    s.push_back({"fg", Polynomial::x1(), g, TrigPoly::constant(1.0), 1});
    s.push_back({"fgh", Polynomial::x1(), g, h, 1});
    s.push_back({"fgh_p2", Polynomial::x1(), g, h, 2});
    return s;
}

}  // namespace spnp
