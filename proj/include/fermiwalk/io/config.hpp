#pragma once

// Experiment config: strict JSON parsing (unknown keys are errors, reported
// with their path) and a canonical serialization used for hashing.

#include "fermiwalk/coupling.hpp"
#include "fermiwalk/disorder.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fermiwalk::io {

using json = nlohmann::json;

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"validate", "asymptotic",     "flux",         "profile",
                                                "simulate", "oracle_check",   "disorder_dos", "averaged_density"};
    return names;
}

inline const std::vector<std::string>& plot_kinds() {
    static const std::vector<std::string> kinds{"profile", "correlations", "convergence", "dos", "flux_vs_alpha"};
    return kinds;
}

struct CoinConfig {
    enum class Kind { matrix, hadamard, rotation } kind = Kind::matrix;
    double theta = 0.0;
    CMatrix matrix;
};

struct WalkConfig {
    WalkKind kind = WalkKind::cycle;
    int n = 0;
    int r = 2;
    std::vector<CoinConfig> coins;
    std::vector<std::vector<int>> coloring;
    CMatrix raw;
    std::optional<CVector> star;
    int star_index = 0;
};

struct EnvironmentConfig {
    std::optional<CMatrix> u;
    std::vector<double> phases;
    CMatrix eigenvectors;
    std::vector<std::vector<cplx>> f;
    double gap_tolerance = 1e-8;
};

struct CouplingConfig {
    std::vector<double> alphas; ///< one entry unless a sweep was given
    bool sweep = false;
    CVector v;
};

struct DisorderConfig {
    double t = 0.0, r = 0.0;
    int n = 0;
    PhaseLaw law = PhaseLaw::point;
    double theta0 = 0.0, eta = 0.0;
    std::vector<cplx> f;
    double alpha = 0.0;
    bool keep_non_cyclic = false;
};

struct Options {
    int steps = 200;
    int oracle_steps = 20;
    int samples = 64;
    int bins = 512;
    std::uint64_t seed = 0;
    std::optional<Window> window;
    std::optional<int> t_max;
    double krylov_tolerance = 1e-10;
    double leakage_tolerance = 1e-10;
    double series_tolerance = 1e-12;
    int validation_grid = 4096;
    std::optional<CMatrix> xi;
    std::vector<std::string> plots;
};

struct ExperimentConfig {
    std::optional<std::string> command;
    std::optional<WalkConfig> walk;
    std::optional<EnvironmentConfig> environment;
    std::optional<CouplingConfig> coupling;
    std::optional<DisorderConfig> disorder;
    Options options;
    std::optional<std::string> output_dir;
};

namespace detail {

/// Object reader that remembers which keys were consumed.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& get(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ValidationError(child(key) + ": missing required field");
        return j_.at(key);
    }

    const json* opt(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ValidationError(child(it.key()) + ": unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path + ": expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw ValidationError(path + ": must be finite");
    return x;
}

inline int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ValidationError(path + ": expected an integer");
    return j.get<int>();
}

inline double as_positive(const json& j, const std::string& path) {
    const double x = as_real(j, path);
    if (!(x > 0)) throw ValidationError(path + ": must be positive");
    return x;
}

inline cplx as_complex(const json& j, const std::string& path) {
    if (j.is_number()) return {as_real(j, path), 0.0};
    if (!j.is_array() || j.size() != 2) throw ValidationError(path + ": expected [re, im]");
    return {as_real(j[0], path + "[0]"), as_real(j[1], path + "[1]")};
}

inline std::string idx(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

inline CVector as_cvector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ValidationError(path + ": expected a non-empty array of [re, im]");
    CVector v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) v(k) = as_complex(j[k], idx(path, k));
    return v;
}

inline CMatrix as_cmatrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ValidationError(path + ": expected a matrix (array of rows)");
    const std::size_t rows = j.size(), cols = j[0].size();
    CMatrix a(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) throw ValidationError(idx(path, r) + ": ragged matrix row");
        for (std::size_t c = 0; c < cols; ++c) a(r, c) = as_complex(j[r][c], idx(idx(path, r), c));
    }
    return a;
}

inline std::vector<cplx> as_coefficients(const json& j, const std::string& path) {
    const CVector v = as_cvector(j, path);
    return {v.data(), v.data() + v.size()};
}

inline json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json vector_json(const CVector& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(cplx_json(v(k)));
    return a;
}

inline json matrix_json(const CMatrix& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
    return a;
}

inline json coeff_json(const std::vector<cplx>& c) {
    json a = json::array();
    for (const cplx& z : c) a.push_back(cplx_json(z));
    return a;
}

inline CoinConfig parse_coin(const json& j, const std::string& path) {
    CoinConfig c;
    if (j.is_string()) {
        if (j.get<std::string>() != "hadamard") throw ValidationError(path + ": unknown coin name '" + j.get<std::string>() + "'");
        c.kind = CoinConfig::Kind::hadamard;
    } else if (j.is_object()) {
        Reader rd(j, path);
        c.kind = CoinConfig::Kind::rotation;
        c.theta = as_real(rd.get("rotation"), rd.child("rotation"));
        rd.finish();
    } else {
        c.matrix = as_cmatrix(j, path);
    }
    return c;
}

inline WalkConfig parse_walk(const json& j, const std::string& path) {
    Reader rd(j, path);
    WalkConfig w;
    const std::string kind = rd.get("kind").is_string() ? rd.get("kind").get<std::string>() : "";
    if (kind == "cycle") w.kind = WalkKind::cycle;
    else if (kind == "regular_graph") w.kind = WalkKind::regular_graph;
    else if (kind == "raw") w.kind = WalkKind::raw;
    else throw ValidationError(rd.child("kind") + ": expected cycle, regular_graph or raw");

    if (w.kind == WalkKind::raw) {
        w.raw = as_cmatrix(rd.get("W"), rd.child("W"));
    } else {
        w.n = as_int(rd.get("n"), rd.child("n"));
        if (w.n < 1) throw ValidationError(rd.child("n") + ": must be >= 1");
        if (w.kind == WalkKind::regular_graph) w.r = as_int(rd.get("r"), rd.child("r"));
        const json& coins = rd.get("coins");
        const std::string cp = rd.child("coins");
        if (!coins.is_array() || coins.empty()) throw ValidationError(cp + ": expected a non-empty array");
        for (std::size_t k = 0; k < coins.size(); ++k) w.coins.push_back(parse_coin(coins[k], idx(cp, k)));
        if (w.kind == WalkKind::regular_graph) {
            const json& col = rd.get("coloring");
            const std::string pp = rd.child("coloring");
            if (!col.is_array()) throw ValidationError(pp + ": expected an array of permutations");
            for (std::size_t k = 0; k < col.size(); ++k) {
                if (!col[k].is_array()) throw ValidationError(idx(pp, k) + ": expected an integer array");
                std::vector<int> perm;
                for (std::size_t q = 0; q < col[k].size(); ++q) perm.push_back(as_int(col[k][q], idx(idx(pp, k), q)));
                w.coloring.push_back(std::move(perm));
            }
        }
    }
    if (const json* s = rd.opt("star")) w.star = as_cvector(*s, rd.child("star"));
    if (const json* s = rd.opt("star_index")) w.star_index = as_int(*s, rd.child("star_index"));
    rd.finish();
    return w;
}

inline EnvironmentConfig parse_environment(const json& j, const std::string& path) {
    Reader rd(j, path);
    EnvironmentConfig e;
    if (const json* u = rd.opt("U")) {
        e.u = as_cmatrix(*u, rd.child("U"));
        if (rd.has("phases") || rd.has("eigenvectors"))
            throw ValidationError(path + ": give either U or phases + eigenvectors, not both");
    } else {
        const json& ph = rd.get("phases");
        if (!ph.is_array() || ph.empty()) throw ValidationError(rd.child("phases") + ": expected a non-empty array");
        for (std::size_t k = 0; k < ph.size(); ++k) e.phases.push_back(as_real(ph[k], idx(rd.child("phases"), k)));
        e.eigenvectors = as_cmatrix(rd.get("eigenvectors"), rd.child("eigenvectors"));
    }
    const json& f = rd.get("F");
    if (!f.is_array() || f.empty()) throw ValidationError(rd.child("F") + ": expected one coefficient list per subreservoir");
    for (std::size_t k = 0; k < f.size(); ++k) e.f.push_back(as_coefficients(f[k], idx(rd.child("F"), k)));
    if (const json* g = rd.opt("gap_tolerance")) e.gap_tolerance = as_positive(*g, rd.child("gap_tolerance"));
    rd.finish();
    return e;
}

inline CouplingConfig parse_coupling(const json& j, const std::string& path) {
    Reader rd(j, path);
    CouplingConfig c;
    const json* a = rd.opt("alpha");
    const json* s = rd.opt("alphas");
    if ((a == nullptr) == (s == nullptr)) throw ValidationError(path + ": give exactly one of alpha or alphas");
    if (a) {
        c.alphas.push_back(as_real(*a, rd.child("alpha")));
    } else {
        c.sweep = true;
        if (!s->is_array() || s->empty()) throw ValidationError(rd.child("alphas") + ": expected a non-empty array");
        for (std::size_t k = 0; k < s->size(); ++k) c.alphas.push_back(as_real((*s)[k], idx(rd.child("alphas"), k)));
    }
    c.v = as_cvector(rd.get("v"), rd.child("v"));
    rd.finish();
    return c;
}

inline DisorderConfig parse_disorder(const json& j, const std::string& path) {
    Reader rd(j, path);
    DisorderConfig d;
    d.t = as_real(rd.get("t"), rd.child("t"));
    d.r = as_real(rd.get("r"), rd.child("r"));
    d.n = as_int(rd.get("n"), rd.child("n"));
    {
        const std::string mp = rd.child("mu");
        Reader mu(rd.get("mu"), mp);
        const json& k = mu.get("kind");
        const std::string kind = k.is_string() ? k.get<std::string>() : "";
        if (kind == "point") d.law = PhaseLaw::point;
        else if (kind == "uniform") d.law = PhaseLaw::uniform;
        else throw ValidationError(mu.child("kind") + ": expected point or uniform");
        d.theta0 = as_real(mu.get("theta0"), mu.child("theta0"));
        if (d.law == PhaseLaw::uniform) d.eta = as_positive(mu.get("eta"), mu.child("eta"));
        mu.finish();
    }
    if (const json* f = rd.opt("F")) d.f = as_coefficients(*f, rd.child("F"));
    if (const json* a = rd.opt("alpha")) d.alpha = as_real(*a, rd.child("alpha"));
    if (const json* k = rd.opt("keep_non_cyclic")) {
        if (!k->is_boolean()) throw ValidationError(rd.child("keep_non_cyclic") + ": expected true or false");
        d.keep_non_cyclic = k->get<bool>();
    }
    rd.finish();
    return d;
}

inline Options parse_options(const json& j, const std::string& path) {
    Reader rd(j, path);
    Options o;
    auto nonneg = [&](const char* key, int& dst) {
        if (const json* x = rd.opt(key)) {
            dst = as_int(*x, rd.child(key));
            if (dst < 0) throw ValidationError(rd.child(key) + ": must be >= 0");
        }
    };
    nonneg("steps", o.steps);
    nonneg("oracle_steps", o.oracle_steps);
    nonneg("samples", o.samples);
    nonneg("bins", o.bins);
    nonneg("validation_grid", o.validation_grid);
    if (const json* s = rd.opt("seed")) {
        if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
            throw ValidationError(rd.child("seed") + ": expected a non-negative integer");
        o.seed = s->get<std::uint64_t>();
    }
    if (const json* w = rd.opt("window")) {
        Reader wr(*w, rd.child("window"));
        Window win;
        win.a = as_int(wr.get("a"), wr.child("a"));
        win.b = as_int(wr.get("b"), wr.child("b"));
        if (const json* p = wr.opt("periodic")) {
            if (!p->is_boolean()) throw ValidationError(wr.child("periodic") + ": expected a boolean");
            win.periodic = p->get<bool>();
        }
        wr.finish();
        o.window = win;
    }
    if (const json* t = rd.opt("t_max")) o.t_max = as_int(*t, rd.child("t_max"));
    if (const json* x = rd.opt("krylov_tolerance")) o.krylov_tolerance = as_positive(*x, rd.child("krylov_tolerance"));
    if (const json* x = rd.opt("leakage_tolerance")) o.leakage_tolerance = as_positive(*x, rd.child("leakage_tolerance"));
    if (const json* x = rd.opt("series_tolerance")) o.series_tolerance = as_positive(*x, rd.child("series_tolerance"));
    if (const json* x = rd.opt("xi")) o.xi = as_cmatrix(*x, rd.child("xi"));
    if (const json* p = rd.opt("plots")) {
        if (!p->is_array()) throw ValidationError(rd.child("plots") + ": expected an array of plot kinds");
        for (std::size_t k = 0; k < p->size(); ++k) {
            const json& e = (*p)[k];
            const std::string kind = e.is_string() ? e.get<std::string>() : "";
            const auto& kinds = plot_kinds();
            if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
                throw ValidationError(idx(rd.child("plots"), k) + ": unknown plot kind '" + kind + "'");
            o.plots.push_back(kind);
        }
    }
    rd.finish();
    return o;
}

} // namespace detail

inline ExperimentConfig parse_config(const json& j) {
    detail::Reader rd(j, "");
    ExperimentConfig cfg;
    if (const json* c = rd.opt("command")) {
        const std::string name = c->is_string() ? c->get<std::string>() : "";
        const auto& names = command_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw ValidationError("command: unknown command '" + name + "'");
        cfg.command = name;
    }
    if (const json* w = rd.opt("walk")) cfg.walk = detail::parse_walk(*w, "walk");
    if (const json* e = rd.opt("environment")) cfg.environment = detail::parse_environment(*e, "environment");
    if (const json* c = rd.opt("coupling")) cfg.coupling = detail::parse_coupling(*c, "coupling");
    if (const json* d = rd.opt("disorder")) cfg.disorder = detail::parse_disorder(*d, "disorder");
    if (const json* o = rd.opt("options")) cfg.options = detail::parse_options(*o, "options");
    if (const json* o = rd.opt("output_dir")) {
        if (!o->is_string()) throw ValidationError("output_dir: expected a string");
        cfg.output_dir = o->get<std::string>();
    }
    rd.finish();
    return cfg;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Canonical form: every field explicit, defaults filled in.
inline json to_json(const ExperimentConfig& cfg) {
    using namespace detail;
    json j = json::object();
    if (cfg.command) j["command"] = *cfg.command;
    if (cfg.walk) {
        const WalkConfig& w = *cfg.walk;
        json wj;
        if (w.kind == WalkKind::raw) {
            wj["kind"] = "raw";
            wj["W"] = matrix_json(w.raw);
        } else {
            wj["kind"] = w.kind == WalkKind::cycle ? "cycle" : "regular_graph";
            wj["n"] = w.n;
            if (w.kind == WalkKind::regular_graph) {
                wj["r"] = w.r;
                wj["coloring"] = w.coloring;
            }
            json coins = json::array();
            for (const CoinConfig& c : w.coins) {
                if (c.kind == CoinConfig::Kind::hadamard) coins.push_back("hadamard");
                else if (c.kind == CoinConfig::Kind::rotation) coins.push_back(json{{"rotation", c.theta}});
                else coins.push_back(matrix_json(c.matrix));
            }
            wj["coins"] = coins;
        }
        if (w.star) wj["star"] = vector_json(*w.star);
        else wj["star_index"] = w.star_index;
        j["walk"] = wj;
    }
    if (cfg.environment) {
        const EnvironmentConfig& e = *cfg.environment;
        json ej;
        if (e.u) {
            ej["U"] = matrix_json(*e.u);
        } else {
            ej["phases"] = e.phases;
            ej["eigenvectors"] = matrix_json(e.eigenvectors);
        }
        json f = json::array();
        for (const auto& c : e.f) f.push_back(coeff_json(c));
        ej["F"] = f;
        ej["gap_tolerance"] = e.gap_tolerance;
        j["environment"] = ej;
    }
    if (cfg.coupling) {
        json cj;
        if (cfg.coupling->sweep) cj["alphas"] = cfg.coupling->alphas;
        else cj["alpha"] = cfg.coupling->alphas.front();
        cj["v"] = vector_json(cfg.coupling->v);
        j["coupling"] = cj;
    }
    if (cfg.disorder) {
        const DisorderConfig& d = *cfg.disorder;
        json mu{{"kind", d.law == PhaseLaw::point ? "point" : "uniform"}, {"theta0", d.theta0}};
        if (d.law == PhaseLaw::uniform) mu["eta"] = d.eta;
        json dj{{"t", d.t}, {"r", d.r}, {"n", d.n}, {"mu", mu}, {"alpha", d.alpha},
                {"keep_non_cyclic", d.keep_non_cyclic}};
        if (!d.f.empty()) dj["F"] = coeff_json(d.f);
        j["disorder"] = dj;
    }
    const Options& o = cfg.options;
    json oj{{"steps", o.steps},
            {"oracle_steps", o.oracle_steps},
            {"samples", o.samples},
            {"bins", o.bins},
            {"seed", o.seed},
            {"krylov_tolerance", o.krylov_tolerance},
            {"leakage_tolerance", o.leakage_tolerance},
            {"series_tolerance", o.series_tolerance},
            {"validation_grid", o.validation_grid},
            {"plots", o.plots}};
    if (o.window) oj["window"] = json{{"a", o.window->a}, {"b", o.window->b}, {"periodic", o.window->periodic}};
    if (o.t_max) oj["t_max"] = *o.t_max;
    if (o.xi) oj["xi"] = matrix_json(*o.xi);
    j["options"] = oj;
    if (cfg.output_dir) j["output_dir"] = *cfg.output_dir;
    return j;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Hash of the canonical config; the output location does not take part.
inline std::string inputs_hash(const ExperimentConfig& cfg) {
    json j = to_json(cfg);
    j.erase("output_dir");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

} // namespace fermiwalk::io
