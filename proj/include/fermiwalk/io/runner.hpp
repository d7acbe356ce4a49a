#pragma once

// Command dispatch for the fermiwalk tool. Each command turns a parsed
// config into a result JSON plus optional plot tables; run() maps errors to
// exit codes (0 ok, 2 validation, 3 numerical domain, 1 anything else).

#include "fermiwalk/fermiwalk.hpp"
#include "fermiwalk/io/config.hpp"
#include "fermiwalk/io/output.hpp"

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace fermiwalk::io {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunRequest {
    std::string command;
    std::string config_path;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

struct CommandOutput {
    json result = json::object();
    std::map<std::string, CsvTable> plots;     ///< plot kind → table
    std::map<std::string, std::string> extras; ///< file name → contents
    int exit_code = 0;                         ///< validate may report a failure with a written result
};

namespace detail {

inline CMatrix coin_matrix(const CoinConfig& c) {
    switch (c.kind) {
    case CoinConfig::Kind::hadamard: return hadamard_coin();
    case CoinConfig::Kind::rotation: return rotation_coin(c.theta);
    default: return c.matrix;
    }
}

inline Walk make_walk(const ExperimentConfig& cfg) {
    if (!cfg.walk) throw ValidationError("walk: missing required section");
    const WalkConfig& wc = *cfg.walk;
    WalkSpec spec;
    spec.kind = wc.kind;
    spec.n = wc.n;
    spec.r = wc.r;
    for (std::size_t k = 0; k < wc.coins.size(); ++k) spec.coins.push_back(coin_matrix(wc.coins[k]));
    spec.coloring = wc.coloring;
    spec.raw = wc.raw;
    if (wc.star) spec.star = *wc.star;
    spec.star_index = wc.star_index;
    return build_walk(spec);
}

inline std::vector<SymbolFunction> symbol_functions(const EnvironmentConfig& ec) {
    std::vector<SymbolFunction> f;
    for (const auto& c : ec.f) f.push_back(SymbolFunction{c});
    return f;
}

inline Environment make_env(const ExperimentConfig& cfg) {
    if (!cfg.environment) throw ValidationError("environment: missing required section");
    const EnvironmentConfig& ec = *cfg.environment;
    auto f = symbol_functions(ec);
    for (std::size_t i = 0; i < f.size(); ++i) validate_coefficients(f[i], i);
    const ValidationReport rep = validate_symbol(f, cfg.options.validation_grid);
    if (!rep.pass) throw ValidationError("environment.F: " + rep.message);
    if (ec.u) return make_environment(*ec.u, std::move(f), ec.gap_tolerance);
    return make_environment(ec.phases, ec.eigenvectors, std::move(f), ec.gap_tolerance);
}

inline const CouplingConfig& coupling_config(const ExperimentConfig& cfg) {
    if (!cfg.coupling) throw ValidationError("coupling: missing required section");
    return *cfg.coupling;
}

inline double single_alpha(const ExperimentConfig& cfg, const std::string& command) {
    const auto& cc = coupling_config(cfg);
    if (cc.sweep) throw ValidationError("coupling.alphas: command " + command + " takes a single alpha");
    return cc.alphas.front();
}

inline json certificate_json(const Contraction& c, double tol) {
    json j{{"spr", c.spr}, {"C", c.cert.c}, {"q", c.cert.q}, {"t0", c.cert.t0}};
    if (c.spr < 1.0) j["truncation"] = c.cert.truncation(tol);
    return j;
}

inline json pb_json(const PoissonBinomial& pb) {
    return json{{"mass", pb.mass}, {"mean", pb.mean()}, {"variance", pb.variance()}};
}

inline CsvTable profile_table(const RVector& p) {
    CsvTable t{{"node", "density"}, {}};
    for (Eigen::Index k = 0; k < p.size(); ++k) t.rows.push_back({static_cast<double>(k), p(k)});
    return t;
}

inline CsvTable correlation_table(const RMatrix& c) {
    CsvTable t{{"node_a", "node_b", "correlation"}, {}};
    for (Eigen::Index a = 0; a < c.rows(); ++a)
        for (Eigen::Index b = 0; b < c.cols(); ++b)
            if (a != b) t.rows.push_back({static_cast<double>(a), static_cast<double>(b), c(a, b)});
    return t;
}

inline std::vector<double> rotation_angles(const WalkConfig& wc, bool& all_rotation) {
    std::vector<double> th;
    all_rotation = wc.kind == WalkKind::cycle;
    for (const auto& c : wc.coins) {
        if (c.kind != CoinConfig::Kind::rotation) all_rotation = false;
        th.push_back(c.theta);
    }
    return th;
}

// ---------------------------------------------------------------- commands

inline CommandOutput cmd_validate(const ExperimentConfig& cfg) {
    CommandOutput out;
    json& r = out.result;
    bool valid = true;

    const Walk walk = make_walk(cfg);
    const Cyclicity cyc = is_cyclic(walk.w, walk.star, cfg.options.krylov_tolerance);
    r["walk"] = json{{"dim", walk.dim()},
                     {"unitarity_defect", unitarity_defect(walk.w)},
                     {"cyclic", cyc.cyclic},
                     {"krylov_rank", cyc.krylov_rank}};
    out.extras["W.csv"] = matrix_csv(walk.w);

    if (!cfg.environment) throw ValidationError("environment: missing required section");
    const auto f = symbol_functions(*cfg.environment);
    for (std::size_t i = 0; i < f.size(); ++i) validate_coefficients(f[i], i);
    const ValidationReport rep = validate_symbol(f, cfg.options.validation_grid);
    json ranges = json::array();
    for (const auto& s : rep.ranges) ranges.push_back(json{{"min", s.min}, {"max", s.max}});
    r["symbol"] = json{{"pass", rep.pass}, {"ranges", ranges}, {"message", rep.message}};
    if (!rep.pass) {
        r["valid"] = false;
        out.exit_code = 2;
        return out;
    }
    const Environment env = make_env(cfg);
    r["environment"] = json{{"m", env.m}, {"phases", env.gamma}, {"l_max", env.l_max()}};

    const auto& cc = coupling_config(cfg);
    json runs = json::array();
    for (double alpha : cc.alphas) {
        validate_coupling(CouplingSpec{alpha, cc.v}, env.m);
        const Contraction con = make_contraction(walk.w, walk.star, alpha);
        const bool ok = con.spr < 1.0 - 1e-12 && std::abs(std::sin(alpha)) > kMinSinAlpha;
        valid = valid && ok;
        // no certificate exists when M does not contract
        runs.push_back(json{{"alpha", alpha},
                            {"spr", con.spr},
                            {"contracting", ok},
                            {"certificate", ok ? certificate_json(con, cfg.options.series_tolerance) : json(nullptr)}});
        if (alpha == cc.alphas.front()) out.extras["M.csv"] = matrix_csv(con.m);
    }
    r["coupling"] = runs;
    r["valid"] = valid && cyc.cyclic;
    if (!(valid && cyc.cyclic)) out.exit_code = 3;
    return out;
}

inline CMatrix initial_xi(const ExperimentConfig& cfg, Eigen::Index d) {
    return cfg.options.xi ? *cfg.options.xi : CMatrix::Zero(d, d);
}

inline json asymptotic_record(const Environment& env, const Walk& walk, const CouplingSpec& cp,
                              const ExperimentConfig& cfg, bool with_moller) {
    const Contraction con = make_contraction(walk.w, walk.star, cp.alpha);
    const AsymptoticState st = asymptotic_symbol(env, walk, cp, con);
    json r{{"alpha", cp.alpha},
           {"certificate", certificate_json(con, cfg.options.series_tolerance)},
           {"Delta", matrix_json(st.delta)},
           {"eigenvalues", real_json(st.eigenvalues)},
           {"particle_number", pb_json(particle_number_distribution(st))}};
    if (walk.kind == WalkKind::cycle) {
        r["profile"] = real_json(node_profile(st, walk));
        r["correlations"] = real_matrix_json(node_correlations(st, walk));
    }
    const FluxResult fl = flux_expectations(env, walk, cp, con);
    r["fluxes"] = fl.phi;
    const auto w = env.weights(cp.v);
    r["weak_coupling_rates"] = weak_coupling_flux_rate(env, walk, w);
    try {
        r["rates"] = small_alpha_flux_rate(env, w);
    } catch (const ValidationError&) {
        r["rates"] = nullptr; // some w_i is 0 or 1
    }
    if (with_moller) {
        const int t = cfg.options.t_max ? *cfg.options.t_max : con.cert.truncation(cfg.options.series_tolerance);
        const MollerBlock mb = moller_sample_block(env, walk, cp, con, t);
        r["moller_deviation"] = operator_norm(moller_sample_state(env, mb, initial_xi(cfg, walk.dim())) - st.delta);
        r["moller_truncation"] = t;
    }
    return r;
}

inline CommandOutput cmd_asymptotic(const ExperimentConfig& cfg, bool profile_only) {
    CommandOutput out;
    const Walk walk = make_walk(cfg);
    const Environment env = make_env(cfg);
    const auto& cc = coupling_config(cfg);
    if (profile_only) require_cycle(walk, "profile");
    json runs = json::array();
    for (double alpha : cc.alphas) {
        const CouplingSpec cp{alpha, cc.v};
        json rec = asymptotic_record(env, walk, cp, cfg, !profile_only);
        if (profile_only) {
            for (const char* k : {"Delta", "particle_number", "fluxes", "rates", "weak_coupling_rates"}) rec.erase(k);
            bool rot = false;
            const auto th = rotation_angles(*cfg.walk, rot);
            if (rot && env.m == 1 && env.l_max() <= 2 && walk.n >= 3) {
                const RVector closed = rotation_example_profile(th, env.f[0], alpha);
                rec["closed_form_profile"] = real_json(closed);
                const RVector p = node_profile(asymptotic_symbol(env, walk, cp).delta, walk);
                rec["closed_form_deviation"] = (p - closed).cwiseAbs().maxCoeff();
            }
        }
        runs.push_back(std::move(rec));
    }
    out.result["runs"] = runs;
    if (!cc.sweep && walk.kind == WalkKind::cycle) {
        const auto& rec = runs.front();
        RVector p(walk.n);
        for (int k = 0; k < walk.n; ++k) p(k) = rec["profile"][k].get<double>();
        out.plots["profile"] = profile_table(p);
        RMatrix c(walk.n, walk.n);
        for (int a = 0; a < walk.n; ++a)
            for (int b = 0; b < walk.n; ++b) c(a, b) = rec["correlations"][a][b].get<double>();
        out.plots["correlations"] = correlation_table(c);
    }
    return out;
}

inline CommandOutput cmd_flux(const ExperimentConfig& cfg) {
    CommandOutput out;
    const Walk walk = make_walk(cfg);
    const Environment env = make_env(cfg);
    const auto& cc = coupling_config(cfg);
    const auto w = env.weights(cc.v);
    CsvTable tab;
    tab.header = {"alpha"};
    for (int i = 0; i < env.m; ++i) tab.header.push_back("phi_" + std::to_string(i + 1));
    json runs = json::array();
    for (double alpha : cc.alphas) {
        const CouplingSpec cp{alpha, cc.v};
        const Contraction con = make_contraction(walk.w, walk.star, alpha);
        const FluxResult fl = flux_expectations(env, walk, cp, con);
        double total = 0.0;
        for (double x : fl.phi) total += x;
        runs.push_back(json{{"alpha", alpha}, {"fluxes", fl.phi}, {"total", total}, {"spr", con.spr}});
        std::vector<double> row{alpha};
        row.insert(row.end(), fl.phi.begin(), fl.phi.end());
        tab.rows.push_back(std::move(row));
    }
    out.result["runs"] = runs;
    out.result["weights"] = w;
    out.result["weak_coupling_rates"] = weak_coupling_flux_rate(env, walk, w);
    try {
        out.result["rates"] = small_alpha_flux_rate(env, w);
    } catch (const ValidationError&) {
        out.result["rates"] = nullptr;
    }
    out.plots["flux_vs_alpha"] = std::move(tab);
    return out;
}

inline CommandOutput cmd_simulate(const ExperimentConfig& cfg) {
    CommandOutput out;
    const Walk walk = make_walk(cfg);
    const Environment env = make_env(cfg);
    const CouplingSpec cp{single_alpha(cfg, "simulate"), coupling_config(cfg).v};
    validate_coupling(cp, env.m);
    const int steps = cfg.options.steps;

    CovarianceOptions co;
    co.window = cfg.options.window;
    co.periodic = cfg.options.window && cfg.options.window->periodic;
    co.leakage_tolerance = cfg.options.leakage_tolerance;
    CovarianceState st(env, walk, cp, initial_xi(cfg, walk.dim()), steps, co);

    const Contraction con = make_contraction(walk.w, walk.star, cp.alpha);
    const bool limit = con.spr < 1.0 - 1e-12 && std::abs(std::sin(cp.alpha)) > kMinSinAlpha;
    CMatrix delta;
    if (limit) delta = asymptotic_symbol(env, walk, cp, con).delta;

    CsvTable trace{{"t", "error", "leakage"}, {}};
    for (int i = 0; i < env.m; ++i) trace.header.push_back("flux_" + std::to_string(i + 1));
    CsvTable conv{{"t", "log_error"}, {}};
    std::vector<double> ts, logs;
    auto record = [&] {
        const double err = limit ? operator_norm(st.sample_block() - delta) : std::nan("");
        std::vector<double> row{static_cast<double>(st.time()), err, st.leakage()};
        for (int i = 0; i < env.m; ++i) row.push_back(flux_finite_time(st, env, walk, cp, i));
        trace.rows.push_back(std::move(row));
        if (limit && err > 0) {
            conv.rows.push_back({static_cast<double>(st.time()), std::log(err)});
            ts.push_back(st.time());
            logs.push_back(std::log(err));
        }
    };
    record();
    for (int k = 0; k < steps; ++k) {
        st.step();
        record();
    }

    json& r = out.result;
    r["steps"] = steps;
    r["window"] = json{{"a", st.op().window().a}, {"b", st.op().window().b}, {"periodic", st.op().window().periodic}};
    r["sample_block"] = matrix_json(st.sample_block());
    r["leakage"] = st.leakage();
    r["spr"] = con.spr;
    std::vector<double> fl;
    for (int i = 0; i < env.m; ++i) fl.push_back(flux_finite_time(st, env, walk, cp, i));
    r["fluxes"] = fl;
    if (limit) {
        r["error"] = trace.rows.back()[1];
        r["flux_limits"] = flux_expectations(env, walk, cp, con).phi;
        // slope over the last 50 points still above the rounding floor
        std::vector<double> x, y;
        for (std::size_t k = 0; k < ts.size(); ++k)
            if (logs[k] > std::log(1e-13)) {
                x.push_back(ts[k]);
                y.push_back(logs[k]);
            }
        if (x.size() > 50) {
            x.erase(x.begin(), x.end() - 50);
            y.erase(y.begin(), y.end() - 50);
        }
        if (x.size() >= 2) {
            r["convergence_slope"] = ls_slope(x, y);
            r["slope_bound"] = std::log(con.spr) + 0.05;
        }
    }
    out.plots["convergence"] = std::move(conv);
    out.extras["trace.csv"] = trace.str();
    return out;
}

inline Window oracle_window(const ExperimentConfig& cfg, int m, Eigen::Index d) {
    if (cfg.options.window) {
        if (!cfg.options.window->periodic) throw ValidationError("options.window: oracle_check needs a periodic window");
        return *cfg.options.window;
    }
    int len = std::min<int>(6, static_cast<int>((kMaxFockModes - d) / m));
    if (len < 3)
        throw ValidationError("oracle_check: sample of dimension " + std::to_string(d) +
                              " leaves no room for a 3-site window within " + std::to_string(kMaxFockModes) + " modes");
    const int a = -(len - 1) / 2;
    return Window{a, a + len - 1, true};
}

inline CommandOutput cmd_oracle(const ExperimentConfig& cfg) {
    CommandOutput out;
    const Walk walk = make_walk(cfg);
    const Environment env = make_env(cfg);
    const CouplingSpec cp{single_alpha(cfg, "oracle_check"), coupling_config(cfg).v};
    validate_coupling(cp, env.m);
    const Window win = oracle_window(cfg, env.m, walk.dim());

    CovarianceOptions co;
    co.window = win;
    co.periodic = true;
    co.leakage_tolerance = cfg.options.leakage_tolerance;
    CovarianceState st(env, walk, cp, initial_xi(cfg, walk.dim()), cfg.options.oracle_steps, co);
    FockModel fm(env, walk, cp, win);
    FockEnsemble ens = fm.gaussian_state(st.gamma());

    const CVector odd = embed_sample(st.op(), walk.star);
    const double n0 = fm.total_number(ens);
    double dev = operator_norm(fm.two_point(ens) - st.gamma()), drift = 0.0, odd_max = 0.0;
    CsvTable tab{{"t", "two_point_deviation", "number_drift"}, {{0.0, dev, 0.0}}};
    for (int k = 0; k < cfg.options.oracle_steps; ++k) {
        st.step();
        fm.step(ens);
        const double e = operator_norm(fm.two_point(ens) - st.gamma());
        const double nd = std::abs(fm.total_number(ens) - n0);
        dev = std::max(dev, e);
        drift = std::max(drift, nd);
        odd_max = std::max(odd_max, std::abs(fm.create_expectation(ens, odd)));
        tab.rows.push_back({static_cast<double>(st.time()), e, nd});
    }
    const auto p = fm.sample_number_distribution(ens);
    const PoissonBinomial pb = particle_number_distribution(make_state(st.sample_block()));
    double tv = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) tv += std::abs(p[k] - pb.mass[k]);
    tv *= 0.5;

    json& r = out.result;
    r["modes"] = fm.modes();
    r["window"] = json{{"a", win.a}, {"b", win.b}, {"periodic", true}};
    r["steps"] = cfg.options.oracle_steps;
    r["max_two_point_deviation"] = dev;
    r["max_number_drift"] = drift;
    r["max_odd_expectation"] = odd_max;
    r["sample_number_distribution"] = p;
    r["gaussian_prediction"] = pb.mass;
    r["total_variation"] = tv;
    r["pass"] = dev <= 1e-10 && drift <= 1e-12 && odd_max <= 1e-12 && tv <= 1e-10;
    out.extras["oracle_trace.csv"] = tab.str();
    return out;
}

inline DisorderModel disorder_model(const ExperimentConfig& cfg) {
    if (!cfg.disorder) throw ValidationError("disorder: missing required section");
    const DisorderConfig& dc = *cfg.disorder;
    DisorderModel m;
    m.t = dc.t;
    m.r = dc.r;
    m.n = dc.n;
    m.mu = PhaseDistribution{dc.law, dc.theta0, dc.eta};
    validate_disorder(m);
    return m;
}

inline CommandOutput cmd_dos(const ExperimentConfig& cfg, int threads) {
    CommandOutput out;
    const DisorderModel model = disorder_model(cfg);
    if (cfg.options.samples < 1) throw ValidationError("options.samples: must be >= 1");
    if (cfg.options.bins < 1) throw ValidationError("options.bins: must be >= 1");
    const DOSEstimate est = density_of_states(model, cfg.options.samples, cfg.options.bins, cfg.options.seed, threads);
    const SupportReport rep = support_report(est, model);
    CsvTable tab{{"theta", "mass", "stderr"}, {}};
    double total = 0.0;
    for (int b = 0; b < est.bins; ++b) {
        tab.rows.push_back({est.center(b), est.mass[b], est.stderr_[b]});
        total += est.mass[b];
    }
    out.result = json{{"samples", est.samples},
                      {"bins", est.bins},
                      {"total_mass", total},
                      {"band_support",
                       json{{"max_excess", rep.max_excess},
                            {"outside", rep.outside},
                            {"stray_bins", rep.stray_bins},
                            {"missed_edges", rep.missed_edges},
                            {"tolerance", 1e-8},
                            {"inside", rep.outside == 0}}}};
    out.plots["dos"] = std::move(tab);
    return out;
}

inline CommandOutput cmd_averaged(const ExperimentConfig& cfg, int threads) {
    CommandOutput out;
    const DisorderModel model = disorder_model(cfg);
    if (cfg.disorder->f.empty()) throw ValidationError("disorder.F: averaged_density needs a symbol function");
    const SymbolFunction f{cfg.disorder->f};
    validate_coefficients(f, 0);
    if (const ValidationReport rep = validate_symbol({f}, cfg.options.validation_grid); !rep.pass)
        throw ValidationError("disorder.F: " + rep.message);
    const AveragedDensity ad = averaged_density(model, f, cfg.disorder->alpha, cfg.options.samples, cfg.options.seed, threads,
                                                 cfg.disorder->keep_non_cyclic);
    const double se = std::hypot(ad.stderr_, ad.dos_stderr);
    const double gap = std::abs(ad.value - ad.dos_value);
    out.result = json{{"value", ad.value},
                      {"stderr", ad.stderr_},
                      {"dos_value", ad.dos_value},
                      {"dos_stderr", ad.dos_stderr},
                      {"difference", gap},
                      {"combined_stderr", se},
                      {"bias_bound", ad.bias_bound},
                      {"used", ad.used},
                      {"skipped", ad.skipped},
                      {"non_cyclic", ad.non_cyclic},
                      {"within_3_stderr", gap <= 3.0 * se + ad.bias_bound}};
    return out;
}

inline const std::map<std::string, std::vector<std::string>>& plot_sources() {
    static const std::map<std::string, std::vector<std::string>> m{
        {"profile", {"asymptotic", "profile"}},
        {"correlations", {"asymptotic", "profile"}},
        {"convergence", {"simulate"}},
        {"dos", {"disorder_dos"}},
        {"flux_vs_alpha", {"flux"}}};
    return m;
}

} // namespace detail

/// Executes one command; throws ValidationError / DomainError.
inline CommandOutput execute(const std::string& command, const ExperimentConfig& cfg, int threads) {
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ValidationError("unknown command '" + command + "'");
    if (cfg.command && *cfg.command != command)
        throw ValidationError("command: config says '" + *cfg.command + "' but '" + command + "' was requested");
    for (const auto& kind : cfg.options.plots) {
        const auto& src = detail::plot_sources().at(kind);
        if (std::find(src.begin(), src.end(), command) == src.end())
            throw ValidationError("options.plots: kind '" + kind + "' is not produced by command " + command);
    }
    CommandOutput out;
    if (command == "validate") out = detail::cmd_validate(cfg);
    else if (command == "asymptotic") out = detail::cmd_asymptotic(cfg, false);
    else if (command == "profile") out = detail::cmd_asymptotic(cfg, true);
    else if (command == "flux") out = detail::cmd_flux(cfg);
    else if (command == "simulate") out = detail::cmd_simulate(cfg);
    else if (command == "oracle_check") out = detail::cmd_oracle(cfg);
    else if (command == "disorder_dos") out = detail::cmd_dos(cfg, threads);
    else out = detail::cmd_averaged(cfg, threads);

    for (const auto& kind : cfg.options.plots)
        if (!out.plots.count(kind))
            throw ValidationError("options.plots: kind '" + kind + "' is unavailable for this input (e.g. alpha sweep or non-cycle walk)");
    out.result["command"] = command;
    out.result["inputs_hash"] = inputs_hash(cfg);
    out.result["provenance"] = json{{"tool", "fermiwalk"}, {"version", kToolVersion}, {"seed", cfg.options.seed}};
    return out;
}

/// Threads from the flag, then FERMIWALK_THREADS, then 1.
inline int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw ValidationError("--threads must be >= 1");
        return *flag;
    }
    if (const char* env = std::getenv("FERMIWALK_THREADS")) {
        try {
            std::size_t pos = 0;
            const int k = std::stoi(env, &pos);
            if (pos == std::string(env).size() && k >= 1) return k;
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("FERMIWALK_THREADS='") + env + "' is not a positive integer");
    }
    return 1;
}

/// Full CLI path: load, execute, write artifacts, map errors to exit codes.
inline int run(const RunRequest& req, std::ostream& log) {
    try {
        ExperimentConfig cfg = load_config(req.config_path);
        if (req.seed) cfg.options.seed = *req.seed;
        CommandOutput out = execute(req.command, cfg, req.threads);

        const std::filesystem::path dir = req.out ? *req.out : (cfg.output_dir ? *cfg.output_dir : "fermiwalk-out");
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
        write_text(dir / "result.json", dump_json(out.result));
        for (const auto& [kind, tab] : out.plots)
            if (std::find(cfg.options.plots.begin(), cfg.options.plots.end(), kind) != cfg.options.plots.end())
                write_text(dir / (kind + ".csv"), tab.str());
        for (const auto& [name, text] : out.extras) write_text(dir / name, text);
        log << req.command << ": wrote " << (dir / "result.json").string() << "\n";
        if (out.exit_code != 0) log << req.command << ": checks failed, see result.json\n";
        return out.exit_code;
    } catch (const ValidationError& e) {
        log << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        log << "domain error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace fermiwalk::io
