#include "spnp/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "spnp/random_medium.hpp"

namespace spnp {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

Vec2 read_vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected [a, b]");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Mode> parse_modes(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected a list of [[k1, k2], amplitude]");
    std::vector<Mode> out;
    for (const auto& m : j) {
        if (!m.is_array() || m.size() != 2 || !m[0].is_array() || m[0].size() != 2)
            throw ConfigError(where + ": each mode is [[k1, k2], amplitude]");
        out.push_back({{m[0][0].get<int>(), m[0][1].get<int>()}, m[1].get<double>()});
    }
    return out;
}

json modes_json(const std::vector<Mode>& modes) {
    json a = json::array();
    for (const auto& m : modes) a.push_back({{m.k[0], m.k[1]}, m.amplitude});
    return a;
}

GammaFunction parse_gamma(const json& j, GammaFunction g) {
    check_keys(j, "gamma", {"kind", "alpha", "lipschitz", "saturation"});
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "linear")
            g.kind = GammaFunction::Kind::linear;
        else if (k == "saturated")
            g.kind = GammaFunction::Kind::saturated;
        else
            throw ConfigError("gamma.kind must be 'linear' or 'saturated'");
    }
    read(j, "alpha", g.alpha, "gamma");
    read(j, "lipschitz", g.lipschitz, "gamma");
    read(j, "saturation", g.saturation, "gamma");
    return g;
}

InitialProfile parse_profile(const json& j, InitialProfile p, const std::string& where) {
    check_keys(j, where, {"kind", "base", "amplitude", "center", "width", "k"});
    if (j.contains("kind")) {
        const std::string k = j.at("kind").get<std::string>();
        if (k == "constant")
            p.kind = InitialProfile::Kind::constant;
        else if (k == "gaussian")
            p.kind = InitialProfile::Kind::gaussian;
        else if (k == "cosine")
            p.kind = InitialProfile::Kind::cosine;
        else
            throw ConfigError(where + ".kind must be constant, gaussian or cosine");
    }
    read(j, "base", p.base, where);
    read(j, "amplitude", p.amplitude, where);
    read(j, "width", p.width, where);
    if (j.contains("center")) p.center = read_vec2(j.at("center"), where + ".center");
    if (j.contains("k")) {
        const Vec2 k = read_vec2(j.at("k"), where + ".k");
        p.k = {static_cast<int>(k[0]), static_cast<int>(k[1])};
    }
    return p;
}

const char* kind_name(InitialProfile::Kind k) {
    switch (k) {
        case InitialProfile::Kind::gaussian: return "gaussian";
        case InitialProfile::Kind::cosine: return "cosine";
        default: return "constant";
    }
}

json profile_json(const InitialProfile& p) {
    return {{"kind", kind_name(p.kind)}, {"base", p.base},   {"amplitude", p.amplitude},
            {"center", {p.center[0], p.center[1]}}, {"width", p.width}, {"k", {p.k[0], p.k[1]}}};
}

void check_reciprocals(const std::vector<int>& v, const std::string& where) {
    if (v.empty()) throw ConfigError(where + " must be nonempty");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < 1) throw ConfigError(where + " entries must be positive integers");
        if (i > 0 && v[i] <= v[i - 1]) throw ConfigError(where + " must be increasing (eps decreasing)");
    }
}

std::vector<double> to_eps(const std::vector<int>& v) {
    std::vector<double> out;
    for (int n : v) out.push_back(1.0 / n);
    return out;
}

}  // namespace

CoefficientField parse_field(const json& j, const std::string& name) {
    check_keys(j, "fields." + name, {"base", "floor", "y_modes", "w_modes"});
    CoefficientField f;
    f.name = name;
    read(j, "base", f.base, "fields." + name);
    f.floor = f.base;
    read(j, "floor", f.floor, "fields." + name);
    if (j.contains("y_modes")) f.y_modes = parse_modes(j.at("y_modes"), "fields." + name + ".y_modes");
    if (j.contains("w_modes")) f.w_modes = parse_modes(j.at("w_modes"), "fields." + name + ".w_modes");
    f.validate();
    return f;
}

json to_json(const CoefficientField& f) {
    return {{"base", f.base}, {"floor", f.floor}, {"y_modes", modes_json(f.y_modes)}, {"w_modes", modes_json(f.w_modes)}};
}

void ExperimentConfig::validate() const {
    geometry.validate();
    fields.validate();
    pnp.validate();
    initial_plus.validate();
    initial_minus.validate();
    check_reciprocals(eps_reciprocals, "eps_reciprocals");
    check_reciprocals(twoscale_eps_reciprocals, "twoscale.eps_reciprocals");
    if (n_omega_samples < 1) throw ConfigError("n_omega_samples must be >= 1");
    if (macro_N < 1) throw ConfigError("macro.N must be >= 1");
    if (omega_grid_K < 2) throw ConfigError("effective.omega_grid_K must be >= 2");
    if (twoscale_M < 1) throw ConfigError("twoscale.M must be >= 1");
    if (twoscale_points_per_period < 1) throw ConfigError("twoscale.points_per_period must be >= 1");
    if (micro_eps_reciprocal < 1) throw ConfigError("micro.eps_reciprocal must be >= 1");
    if (micro_omega_index < 0) throw ConfigError("micro.omega_index must be >= 0");
    if (output_dir.empty()) throw ConfigError("output_dir must be nonempty");
}

std::vector<double> ExperimentConfig::eps_list() const { return to_eps(eps_reciprocals); }
std::vector<double> ExperimentConfig::twoscale_eps_list() const { return to_eps(twoscale_eps_reciprocals); }

Vec2 ExperimentConfig::omega_sample(int k) const {
    return sample_omega(splitmix64(seed + static_cast<std::uint64_t>(k))).omega;
}

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.fields.rho_f = {"rho_f", 1.0, 0.3, {{{1, 0}, 0.2}}, {{{1, 0}, 0.1}}};
    c.fields.rho_s = {"rho_s", 0.5, 0.2, {{{0, 1}, 0.1}}, {}};
    c.fields.eta = {"eta", 1.0, 0.5, {}, {{{0, 1}, 0.02}}};
    c.initial_plus.kind = InitialProfile::Kind::cosine;
    c.initial_plus.base = 1.0;
    c.initial_plus.amplitude = 0.5;
    c.initial_plus.k = {1, 1};
    c.initial_minus = InitialProfile::constant(0.8);
    return c;
}

ExperimentConfig parse_config(const json& doc) {
    ExperimentConfig c = default_config();
    check_keys(doc, "config",
               {"geometry", "fields", "gamma", "pnp", "initial", "eps_reciprocals", "n_omega_samples", "seed",
                "output_dir", "macro", "effective", "twoscale", "micro"});
    if (doc.contains("geometry")) {
        const json& g = doc.at("geometry");
        check_keys(g, "geometry", {"inclusion_radius", "inclusion_center", "n_interface_segments", "target_edge_length"});
        read(g, "inclusion_radius", c.geometry.inclusion_radius, "geometry");
        read(g, "n_interface_segments", c.geometry.n_interface_segments, "geometry");
        read(g, "target_edge_length", c.geometry.target_edge_length, "geometry");
        if (g.contains("inclusion_center")) c.geometry.inclusion_center = read_vec2(g.at("inclusion_center"), "geometry.inclusion_center");
    }
    if (doc.contains("fields")) {
        const json& f = doc.at("fields");
        check_keys(f, "fields", {"rho_f", "rho_s", "eta"});
        if (f.contains("rho_f")) c.fields.rho_f = parse_field(f.at("rho_f"), "rho_f");
        if (f.contains("rho_s")) c.fields.rho_s = parse_field(f.at("rho_s"), "rho_s");
        if (f.contains("eta")) c.fields.eta = parse_field(f.at("eta"), "eta");
    }
    if (doc.contains("gamma")) c.fields.gamma = parse_gamma(doc.at("gamma"), c.fields.gamma);
    if (doc.contains("pnp")) {
        const json& p = doc.at("pnp");
        check_keys(p, "pnp", {"D_plus", "D_minus", "z_plus", "z_minus", "c", "F", "dt", "t_final", "gummel_max",
                              "gummel_tol", "linear_tol", "n_outputs", "disable_drift", "edge_upwind"});
        read(p, "D_plus", c.pnp.D_plus, "pnp");
        read(p, "D_minus", c.pnp.D_minus, "pnp");
        read(p, "z_plus", c.pnp.z_plus, "pnp");
        read(p, "z_minus", c.pnp.z_minus, "pnp");
        read(p, "c", c.pnp.c, "pnp");
        read(p, "F", c.pnp.F_const, "pnp");
        read(p, "dt", c.pnp.dt, "pnp");
        read(p, "t_final", c.pnp.t_final, "pnp");
        read(p, "gummel_max", c.pnp.gummel_max, "pnp");
        read(p, "gummel_tol", c.pnp.gummel_tol, "pnp");
        read(p, "linear_tol", c.pnp.linear_tol, "pnp");
        read(p, "n_outputs", c.pnp.n_outputs, "pnp");
        read(p, "disable_drift", c.pnp.disable_drift, "pnp");
        read(p, "edge_upwind", c.pnp.edge_upwind, "pnp");
    }
    if (doc.contains("initial")) {
        const json& i = doc.at("initial");
        check_keys(i, "initial", {"plus", "minus"});
        if (i.contains("plus")) c.initial_plus = parse_profile(i.at("plus"), InitialProfile{}, "initial.plus");
        if (i.contains("minus")) c.initial_minus = parse_profile(i.at("minus"), InitialProfile{}, "initial.minus");
    }
    read(doc, "eps_reciprocals", c.eps_reciprocals, "config");
    read(doc, "n_omega_samples", c.n_omega_samples, "config");
    read(doc, "seed", c.seed, "config");
    read(doc, "output_dir", c.output_dir, "config");
    if (doc.contains("macro")) {
        check_keys(doc.at("macro"), "macro", {"N"});
        read(doc.at("macro"), "N", c.macro_N, "macro");
    }
    if (doc.contains("effective")) {
        check_keys(doc.at("effective"), "effective", {"omega_grid_K"});
        read(doc.at("effective"), "omega_grid_K", c.omega_grid_K, "effective");
    }
    if (doc.contains("twoscale")) {
        const json& t = doc.at("twoscale");
        check_keys(t, "twoscale", {"eps_reciprocals", "M", "points_per_period"});
        read(t, "eps_reciprocals", c.twoscale_eps_reciprocals, "twoscale");
        read(t, "M", c.twoscale_M, "twoscale");
        read(t, "points_per_period", c.twoscale_points_per_period, "twoscale");
    }
    if (doc.contains("micro")) {
        const json& m = doc.at("micro");
        check_keys(m, "micro", {"eps_reciprocal", "omega_index"});
        read(m, "eps_reciprocal", c.micro_eps_reciprocal, "micro");
        read(m, "omega_index", c.micro_omega_index, "micro");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
    const char* gk = c.fields.gamma.kind == GammaFunction::Kind::linear ? "linear" : "saturated";
    json j;
    j["geometry"] = {{"inclusion_radius", c.geometry.inclusion_radius},
                     {"inclusion_center", {c.geometry.inclusion_center[0], c.geometry.inclusion_center[1]}},
                     {"n_interface_segments", c.geometry.n_interface_segments},
                     {"target_edge_length", c.geometry.target_edge_length}};
    j["fields"] = {{"rho_f", to_json(c.fields.rho_f)}, {"rho_s", to_json(c.fields.rho_s)}, {"eta", to_json(c.fields.eta)}};
    j["gamma"] = {{"kind", gk},
                  {"alpha", c.fields.gamma.alpha},
                  {"lipschitz", c.fields.gamma.lipschitz},
                  {"saturation", c.fields.gamma.saturation}};
    const PnpParams& p = c.pnp;
    j["pnp"] = {{"D_plus", p.D_plus},         {"D_minus", p.D_minus},       {"z_plus", p.z_plus},
                {"z_minus", p.z_minus},       {"c", p.c},                   {"F", p.F_const},
                {"dt", p.dt},                 {"t_final", p.t_final},       {"gummel_max", p.gummel_max},
                {"gummel_tol", p.gummel_tol}, {"linear_tol", p.linear_tol}, {"n_outputs", p.n_outputs},
                {"disable_drift", p.disable_drift},
                {"edge_upwind", p.edge_upwind}};
    j["initial"] = {{"plus", profile_json(c.initial_plus)}, {"minus", profile_json(c.initial_minus)}};
    j["eps_reciprocals"] = c.eps_reciprocals;
    j["n_omega_samples"] = c.n_omega_samples;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["macro"] = {{"N", c.macro_N}};
    j["effective"] = {{"omega_grid_K", c.omega_grid_K}};
    j["twoscale"] = {{"eps_reciprocals", c.twoscale_eps_reciprocals},
                     {"M", c.twoscale_M},
                     {"points_per_period", c.twoscale_points_per_period}};
    j["micro"] = {{"eps_reciprocal", c.micro_eps_reciprocal}, {"omega_index", c.micro_omega_index}};
    return j;
}

}  // namespace spnp
