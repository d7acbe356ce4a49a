// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include "fermiwalk/fermiwalk.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace fermiwalk;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

// random helpers, same construction as the unit tests
CMatrix random_unitary(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CMatrix a(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double re = nd(rng);
            a(i, j) = cplx(re, nd(rng));
        }
    Eigen::HouseholderQR<CMatrix> qr(a);
    return qr.householderQ();
}

CMatrix random_density(int k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const CMatrix q = random_unitary(k, rng);
    CVector lam(k);
    for (int i = 0; i < k; ++i) lam(i) = ud(rng);
    return q * lam.asDiagonal() * q.adjoint();
}

CMatrix random_projector(int k, std::mt19937_64& rng) {
    const CMatrix q = random_unitary(k, rng).leftCols(k / 2);
    return q * q.adjoint();
}

CVector random_unit(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    CVector v(k);
    for (int i = 0; i < k; ++i) {
        const double re = nd(rng);
        v(i) = cplx(re, nd(rng));
    }
    return v.normalized();
}

Walk cycle_walk(std::vector<CMatrix> coins) {
    WalkSpec s;
    s.kind = WalkKind::cycle;
    s.n = static_cast<int>(coins.size());
    s.coins = std::move(coins);
    return build_walk(s);
}

Walk random_cycle_walk(int n, std::mt19937_64& rng) {
    std::vector<CMatrix> coins;
    for (int k = 0; k < n; ++k) coins.push_back(random_unitary(2, rng));
    return cycle_walk(std::move(coins));
}

Walk hadamard_walk(int n) { return cycle_walk(std::vector<CMatrix>(n, hadamard_coin())); }

// fast-mixing n = 4 instance; the homogeneous Hadamard ring is not cyclic for n >= 3
Walk fast_walk_n4() {
    std::mt19937_64 rng(2070);
    return random_cycle_walk(4, rng);
}

Walk rotation_walk(const std::vector<double>& th) {
    std::vector<CMatrix> coins;
    for (double x : th) coins.push_back(rotation_coin(x));
    return cycle_walk(coins);
}

SymbolFunction random_symbol(int l_max, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    SymbolFunction f;
    const double c0 = 0.2 + 0.6 * ud(rng);
    f.c.push_back(c0);
    const double budget = 0.45 * std::min(c0, 1.0 - c0);
    std::vector<double> share(l_max);
    double tot = 0;
    for (double& s : share) tot += (s = ud(rng) + 0.1);
    for (int l = 1; l <= l_max; ++l) f.c.push_back(std::polar(budget * share[l - 1] / tot, 2 * kPi * ud(rng)));
    return f;
}

Environment random_environment(int m, int l_max, std::mt19937_64& rng) {
    std::vector<SymbolFunction> f;
    for (int i = 0; i < m; ++i) f.push_back(random_symbol(l_max, rng));
    return make_environment(m == 1 ? CMatrix::Identity(1, 1) : random_unitary(m, rng), std::move(f));
}

double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

/// Criterion-2 instance set: n in {2, 4}, m in {1, 2}, α in {π/4, 1}.
struct Instance {
    std::string name;
    Walk walk;
    Environment env;
    CouplingSpec coupling;
    Window fock_window; ///< periodic, keeps D <= 14
};

std::vector<Instance> instance_set() {
    std::mt19937_64 rng(2024);
    std::vector<Instance> out;
    for (int n : {2, 4})
        for (int m : {1, 2}) {
            // n = 4, m = 2 needs a 3-site window to stay at D = 14, hence L_max = 1
            const int l_max = (n == 4 && m == 2) ? 1 : 2;
            const Environment env = random_environment(m, l_max, rng);
            const CVector v = m == 1 ? CVector::Ones(1) : random_unit(m, rng);
            const Window win = n == 2 ? Window{-1, 2, true} : (m == 1 ? Window{-2, 3, true} : Window{-1, 1, true});
            for (double a : {kPi / 4, 1.0}) {
                std::ostringstream nm;
                nm << "n" << n << "m" << m << (a == 1.0 ? "a1" : "api4");
                out.push_back({nm.str(), n == 2 ? hadamard_walk(2) : fast_walk_n4(), env, CouplingSpec{a, v}, win});
            }
        }
    return out;
}

// 1 ------------------------------------------------------------------------
Verdict contraction_law() {
    Verdict v;
    std::mt19937_64 rng(101);
    double worst = 0.0, identity_min = 1.0;
    int walks = 0;
    for (int k = 0; k < 24; ++k) {
        const int n = 4 + 2 * (k % 3);
        Walk w = random_cycle_walk(n, rng);
        while (!is_cyclic(w.w, w.star).cyclic) w = random_cycle_walk(n, rng);
        ++walks;
        for (double a : {kPi / 7, kPi / 4, 1.0}) worst = std::max(worst, make_contraction(w.w, w.star, a).spr);
    }
    for (int n : {4, 6, 8}) {
        const Walk w = cycle_walk(std::vector<CMatrix>(n, CMatrix::Identity(2, 2)));
        for (double a : {kPi / 7, kPi / 4, 1.0}) identity_min = std::min(identity_min, make_contraction(w.w, w.star, a).spr);
    }
    v.require(worst < 1 - 1e-6, "cyclic spr < 1 - 1e-6");
    v.require(identity_min >= 1 - 1e-12, "identity coins spr >= 1 - 1e-12");
    v.detail << walks << " cyclic walks x 3 alphas, max spr " << worst << "; identity coins min spr " << identity_min;
    return v;
}

// 2 ------------------------------------------------------------------------
Verdict three_engines() {
    Verdict v;
    std::mt19937_64 rng(202);
    double fock_dev = 0.0, delta_dev = 0.0;
    int max_modes = 0;
    for (const Instance& in : instance_set()) {
        const int d = static_cast<int>(in.walk.dim());
        // (a) Fock oracle against covariance propagation on the periodic window
        CovarianceOptions o;
        o.window = in.fock_window;
        o.periodic = true;
        const CMatrix xi = in.env.m == 1 && in.walk.n == 2 ? random_density(d, rng) : random_projector(d, rng);
        CovarianceState st(in.env, in.walk, in.coupling, xi, 20, o);
        const FockModel fm(in.env, in.walk, in.coupling, in.fock_window);
        max_modes = std::max(max_modes, fm.modes());
        FockEnsemble ens = fm.gaussian_state(st.gamma());
        double dev = max_abs(fm.two_point(ens) - st.gamma());
        for (int t = 1; t <= 20; ++t) {
            st.step();
            fm.step(ens);
            dev = std::max(dev, max_abs(fm.two_point(ens) - st.gamma()));
        }
        fock_dev = std::max(fock_dev, dev);

        // (b) open-window covariance sample block against Δ
        const Contraction con = make_contraction(in.walk.w, in.walk.star, in.coupling.alpha);
        const int t = con.cert.truncation(1e-9);
        CovarianceState open(in.env, in.walk, in.coupling, random_density(d, rng), t);
        open.evolve(t);
        const double e = operator_norm(open.sample_block() - asymptotic_symbol(in.env, in.walk, in.coupling, con).delta);
        delta_dev = std::max(delta_dev, e);
    }
    v.require(fock_dev <= 1e-10, "Fock vs covariance <= 1e-10");
    v.require(delta_dev <= 1e-8, "sample block vs Delta <= 1e-8");
    v.detail << "8 instances, D <= " << max_modes << ": Fock vs covariance " << sci(fock_dev) << ", block vs Delta "
             << sci(delta_dev);
    return v;
}

// 3 ------------------------------------------------------------------------
Verdict exponential_convergence() {
    Verdict v;
    double worst_margin = -1e300;
    for (const Instance& in : instance_set()) {
        const Contraction con = make_contraction(in.walk.w, in.walk.star, in.coupling.alpha);
        const int steps = 300;
        CovarianceState st(in.env, in.walk, in.coupling, CMatrix::Zero(in.walk.dim(), in.walk.dim()), steps);
        const auto tr = convergence_trace(st, asymptotic_symbol(in.env, in.walk, in.coupling, con).delta, steps);
        // fit the last 50 points above the rounding floor
        int end = 0;
        while (end < steps && tr.error[end] > 1e-12) ++end;
        if (end < 50) {
            v.require(false, in.name + ": fewer than 50 points above 1e-12");
            continue;
        }
        std::vector<double> x, y;
        for (int k = end - 50; k < end; ++k) {
            x.push_back(tr.t[k]);
            y.push_back(std::log(tr.error[k]));
        }
        const double margin = ls_slope(x, y) - (std::log(con.spr) + 0.05);
        worst_margin = std::max(worst_margin, margin);
    }
    v.require(worst_margin <= 0.0, "slope <= log spr + 0.05");
    v.detail << "8 instances, max (slope - log spr - 0.05) = " << worst_margin;
    return v;
}

// 4 ------------------------------------------------------------------------
Verdict rotation_example() {
    Verdict v;
    const SymbolFunction f{{0.5, cplx(0.07, 0.01), cplx(0.1, 0.02)}};
    const SymbolFunction g{{0.6, cplx(0.12, -0.05)}}; // F'' = 0
    double dev = 0.0, flat = 0.0;
    for (const auto& th : {std::vector<double>{0.3, 0.7, 1.1, 0.5}, std::vector<double>{0.3, 0.7, 1.1, 0.5, 0.9, 1.3}}) {
        const Walk w = rotation_walk(th);
        v.require(is_cyclic(w.w, w.star).cyclic, "rotation walk cyclic");
        for (double a : {0.3, kPi / 4}) {
            const CouplingSpec c{a, CVector::Ones(1)};
            const RVector p = node_profile(asymptotic_symbol(make_environment(CMatrix::Identity(1, 1), {f}), w, c), w);
            dev = std::max(dev, (p - rotation_example_profile(th, f, a)).cwiseAbs().maxCoeff());
            // each spin entry carries 2F(0), so a node carries 4F(0)
            const auto st = asymptotic_symbol(make_environment(CMatrix::Identity(1, 1), {g}), w, c);
            const double two_f0 = 2.0 * g(0.0).real();
            for (Eigen::Index k = 0; k < st.delta.rows(); ++k) flat = std::max(flat, std::abs(st.delta(k, k).real() - two_f0));
            flat = std::max(flat, (node_profile(st, w).array() - 2 * two_f0).abs().maxCoeff());
        }
    }
    v.require(dev <= 1e-10, "closed form to 1e-10");
    v.require(flat <= 1e-10, "2F(0) when F'' = 0");
    v.detail << "n in {4,6}, alpha in {0.3, pi/4}: closed form " << sci(dev) << ", 2F(0) check " << sci(flat);
    return v;
}

// 5 ------------------------------------------------------------------------
Verdict correlation_sign() {
    Verdict v;
    double worst = -1e300;
    for (const Instance& in : instance_set()) {
        const RMatrix c = node_correlations(asymptotic_symbol(in.env, in.walk, in.coupling), in.walk);
        for (int a = 0; a < in.walk.n; ++a)
            for (int b = 0; b < in.walk.n; ++b)
                if (a != b) worst = std::max(worst, c(a, b));
    }
    v.require(worst <= 1e-12, "C(nu, upsilon) <= 1e-12");
    v.detail << "max off-diagonal node correlation " << sci(worst);
    return v;
}

// 6 ------------------------------------------------------------------------
Verdict flux_suite() {
    Verdict v;
    std::mt19937_64 rng(606);
    double single = 0.0, balance = 0.0, small_rel = 0.0, weak_rel = 0.0, finite = 0.0;
    bool signs = true;
    for (const Instance& in : instance_set()) {
        const auto phi = flux_expectations(in.env, in.walk, in.coupling,
                                           make_contraction(in.walk.w, in.walk.star, in.coupling.alpha)).phi;
        if (in.env.m == 1) single = std::max(single, std::abs(phi[0]));
        else balance = std::max(balance, std::abs(phi[0] + phi[1]));
    }
    // small α against the closed-form rate: subreservoirs sharing their ℓ >= 1 coefficients
    const Walk w4 = fast_walk_n4();
    const std::vector<cplx> tail{cplx(0.04, 0.01), cplx(-0.02, 0.03)};
    const Environment shared = make_environment(
        random_unitary(2, rng), {SymbolFunction{{0.35, tail[0], tail[1]}}, SymbolFunction{{0.6, tail[0], tail[1]}}});
    const CVector vs = random_unit(2, rng);
    const auto r = small_alpha_flux_rate(shared, shared.weights(vs));
    {
        const double a = 1e-3;
        const auto phi = flux_expectations(shared, w4, CouplingSpec{a, vs}, make_contraction(w4.w, w4.star, a)).phi;
        for (int i = 0; i < 2; ++i) small_rel = std::max(small_rel, std::abs(phi[i] / (a * a) - r[i]) / std::abs(r[i]));
    }
    for (double a : {0.1, 0.05, 0.01}) {
        const auto phi = flux_expectations(shared, w4, CouplingSpec{a, vs}, make_contraction(w4.w, w4.star, a)).phi;
        for (int i = 0; i < 2; ++i) signs = signs && (phi[i] > 0) == (r[i] > 0) && phi[i] != 0.0;
    }
    // general tails: the weak-coupling rate from the free walk
    const Environment gen = random_environment(3, 2, rng);
    const CVector vg = random_unit(3, rng);
    const auto rg = weak_coupling_flux_rate(gen, w4, gen.weights(vg));
    {
        const double a = 1e-3;
        const auto phi = flux_expectations(gen, w4, CouplingSpec{a, vg}, make_contraction(w4.w, w4.star, a)).phi;
        for (int i = 0; i < 3; ++i) weak_rel = std::max(weak_rel, std::abs(phi[i] / (a * a) - rg[i]) / std::abs(rg[i]));
    }
    // finite-time flux from the covariance engine at t = 200
    for (const Instance& in : instance_set()) {
        if (in.env.m != 2) continue;
        const auto phi = flux_expectations(in.env, in.walk, in.coupling,
                                           make_contraction(in.walk.w, in.walk.star, in.coupling.alpha)).phi;
        CovarianceState st(in.env, in.walk, in.coupling, CMatrix::Zero(in.walk.dim(), in.walk.dim()), 200);
        st.evolve(200);
        for (int i = 0; i < 2; ++i)
            finite = std::max(finite, std::abs(flux_finite_time(st, in.env, in.walk, in.coupling, i) - phi[i]));
    }
    v.require(single <= 1e-12, "m = 1 flux zero");
    v.require(balance <= 1e-10, "flux balance");
    v.require(small_rel <= 0.01, "small-alpha rate within 1%");
    v.require(weak_rel <= 0.01, "weak-coupling rate within 1%");
    v.require(signs, "small-alpha signs");
    v.require(finite <= 1e-6, "finite-time flux at t = 200");
    v.detail << "m=1 |phi| " << sci(single) << ", balance " << sci(balance) << ", small-alpha rel " << sci(small_rel)
             << " (weak-coupling rel " << sci(weak_rel) << "), signs " << (signs ? "ok" : "wrong") << ", t=200 gap "
             << sci(finite);
    return v;
}

// 7 ------------------------------------------------------------------------
Verdict poisson_binomial_check() {
    Verdict v;
    std::mt19937_64 rng(707);
    double moments = 0.0;
    for (const Instance& in : instance_set()) {
        const auto st = asymptotic_symbol(in.env, in.walk, in.coupling);
        const auto pb = particle_number_distribution(st);
        double norm = 0.0, var = 0.0;
        for (double x : pb.mass) norm += x;
        for (Eigen::Index k = 0; k < st.eigenvalues.size(); ++k) var += st.eigenvalues(k) * (1 - st.eigenvalues(k));
        moments = std::max({moments, std::abs(norm - 1), std::abs(pb.mean() - st.delta.trace().real()),
                            std::abs(pb.variance() - var)});
    }
    // α = π/2 swaps ψ* out completely and M = (1 − P)W is nilpotent for the
    // n = 2 Hadamard ring, so the sample reaches Δ in finitely many steps.
    const Walk w = hadamard_walk(2);
    const Environment env = make_environment(CMatrix::Identity(1, 1), {SymbolFunction{{0.5, cplx(0.08, 0.03), 0.1}}});
    const CouplingSpec c{kPi / 2, CVector::Ones(1)};
    const Contraction con = make_contraction(w.w, w.star, c.alpha);
    int nil = 0;
    for (CMatrix p = CMatrix::Identity(4, 4); max_abs(p) > 1e-14 && nil < 10; ++nil) p = p * con.m;
    const CMatrix delta = asymptotic_symbol(env, w, c, con).delta;
    const auto pb = particle_number_distribution(make_state(delta)).mass;
    const Window win{-2, 3, true};
    double tv = 0.0;
    int modes = 0;
    for (const CMatrix& xi : {CMatrix(CMatrix::Zero(4, 4)), random_projector(4, rng)}) {
        CovarianceOptions o;
        o.window = win;
        o.periodic = true;
        const CovarianceState st(env, w, c, xi, 1, o);
        const FockModel fm(env, w, c, win);
        modes = fm.modes();
        FockEnsemble ens = fm.gaussian_state(st.gamma());
        const int t = nil + env.l_max();
        for (int k = 0; k < t; ++k) fm.step(ens);
        const auto dist = fm.sample_number_distribution(ens);
        double s = 0.0;
        for (std::size_t p = 0; p < std::max(dist.size(), pb.size()); ++p)
            s += std::abs((p < dist.size() ? dist[p] : 0.0) - (p < pb.size() ? pb[p] : 0.0));
        tv = std::max(tv, 0.5 * s);
    }
    v.require(moments <= 1e-12, "normalization, mean, variance");
    v.require(nil <= 4, "nilpotent instance");
    v.require(tv <= 1e-6, "Fock number distribution TV <= 1e-6");
    v.detail << "moments " << sci(moments) << "; nilpotent index " << nil << ", D = " << modes << ", TV " << sci(tv);
    return v;
}

// 8 ------------------------------------------------------------------------
Verdict odd_coefficients() {
    Verdict v;
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    double dev = 0.0;
    int cases = 0;
    for (int n : {2, 4, 6, 8}) {
        Walk w = random_cycle_walk(n, rng);
        while (!is_cyclic(w.w, w.star).cyclic) w = random_cycle_walk(n, rng);
        for (double a : {kPi / 4, 1.0}) {
            const CouplingSpec c{a, CVector::Ones(1)};
            SymbolFunction f{{0.5, 0.0, cplx(0.05, 0.02), 0.0}};
            const RVector p0 = node_profile(asymptotic_symbol(make_environment(CMatrix::Identity(1, 1), {f}), w, c), w);
            for (int k = 0; k < 5; ++k) {
                f.c[1] = cplx(0.05 * ud(rng), 0.05 * ud(rng));
                f.c[3] = cplx(0.05 * ud(rng), 0.05 * ud(rng));
                v.require(validate_symbol(std::vector<SymbolFunction>{f}).pass, "admissible perturbation");
                const RVector p = node_profile(asymptotic_symbol(make_environment(CMatrix::Identity(1, 1), {f}), w, c), w);
                dev = std::max(dev, (p - p0).cwiseAbs().maxCoeff());
                ++cases;
            }
        }
    }
    v.require(dev <= 1e-12, "profile change <= 1e-12");
    v.detail << cases << " perturbations on n in {2,4,6,8}, max profile change " << sci(dev);
    return v;
}

// 9 ------------------------------------------------------------------------
Verdict moller_identity() {
    Verdict v;
    std::mt19937_64 rng(909);
    double dev = 0.0;
    for (const Instance& in : instance_set()) {
        const Contraction con = make_contraction(in.walk.w, in.walk.star, in.coupling.alpha);
        const CMatrix delta = asymptotic_symbol(in.env, in.walk, in.coupling, con).delta;
        const auto mb = moller_sample_block(in.env, in.walk, in.coupling, con, con.cert.truncation(1e-12));
        const int d = static_cast<int>(in.walk.dim());
        for (const CMatrix& xi : {CMatrix(CMatrix::Zero(d, d)), random_density(d, rng)})
            dev = std::max(dev, operator_norm(moller_sample_state(in.env, mb, xi) - delta));
    }
    v.require(dev <= 1e-8, "Moller block vs Delta <= 1e-8");
    v.detail << "8 instances x 2 initial sample states, max deviation " << sci(dev);
    return v;
}

// 10 -----------------------------------------------------------------------
Verdict disorder_check() {
    Verdict v;
    const int threads = std::max(1u, std::thread::hardware_concurrency());
    const double t = 0.6, r = 0.8;
    auto model = [&](PhaseLaw law, double eta) {
        DisorderModel m;
        m.t = t;
        m.r = r;
        m.n = 256;
        m.mu = PhaseDistribution{law, 0.4, eta};
        return m;
    };
    const DisorderModel point = model(PhaseLaw::point, 0.0), interval = model(PhaseLaw::uniform, 0.05);

    const auto pe = density_of_states(point, 4, 512, 10, threads);
    const auto pr = support_report(pe, point);
    v.require(pr.outside == 0 && pr.stray_bins == 0 && pr.missed_edges == 0, "point mass support within one bin");

    const auto ie = density_of_states(interval, 50, 512, 11, threads);
    const auto ir = support_report(ie, interval);
    v.require(ir.outside == 0, "interval: eigenvalues inside enlarged bands + 1e-8");

    const SymbolFunction f{{0.5, 0.0, 0.125}};
    const double alpha = 0.3;
    // weak disorder barely splits the clean ring's k/−k pairs, so many draws
    // have spr(M) within rounding of 1; they are flagged and kept, since both
    // traces are defined for every draw
    const auto ai = averaged_density(interval, f, alpha, 50, 12, threads, true);
    const double gi = std::abs(ai.value - ai.dos_value), si = std::hypot(ai.stderr_, ai.dos_stderr);
    v.require(ai.used >= 50 && gi <= 3 * si + ai.bias_bound, "interval averaged density within 3 stderr");
    // clean ring: never cyclic (k and −k pair up); every draw is the same walk
    const auto ap = averaged_density(point, f, alpha, 2, 13, threads, true);
    const double gp = std::abs(ap.value - ap.dos_value), sp = std::hypot(ap.stderr_, ap.dos_stderr);
    v.require(gp <= 3 * sp + ap.bias_bound, "point averaged density within 3 stderr");

    v.detail << "n=256; point: stray " << pr.stray_bins << ", missed edges " << pr.missed_edges << ", max excess "
             << sci(pr.max_excess) << "; interval: outside " << ir.outside << ", max excess " << sci(ir.max_excess)
             << "; averaged (interval, " << ai.used << " used, " << ai.non_cyclic.size() << " flagged) gap " << sci(gi) << " vs 3se " << sci(3 * si)
             << " + bias " << sci(ai.bias_bound) << "; (point) gap " << sci(gp) << " vs bias " << sci(ap.bias_bound);
    return v;
}

// 11 -----------------------------------------------------------------------
Verdict evaluation_paths() {
    Verdict v;
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> ud(0.3, 1.0);
    double dev = 0.0;
    for (int k = 0; k < 50; ++k) {
        const int d = 2 + k % 7;
        const CMatrix b = ud(rng) * random_unitary(d, rng) * random_density(d, rng);
        const SymbolFunction f = random_symbol(1 + k % 4, rng);
        const double rad = 0.5 * (1.0 + spectral_radius(b));
        dev = std::max(dev, operator_norm(eval_series(f, b) - eval_contour(f, b, rad, 512)));
    }
    v.require(dev <= 1e-10, "series vs contour <= 1e-10");
    v.detail << "50 random contractions, max deviation " << sci(dev);
    return v;
}

} // namespace

int main(int argc, char** argv) {
    // optional arguments pick criteria by number
    std::vector<int> pick;
    for (int k = 1; k < argc; ++k) pick.push_back(std::atoi(argv[k]));
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"contraction law", contraction_law},
        {"three-engine agreement", three_engines},
        {"exponential convergence", exponential_convergence},
        {"rotation example", rotation_example},
        {"correlation sign", correlation_sign},
        {"flux suite", flux_suite},
        {"Poisson binomial", poisson_binomial_check},
        {"odd coefficients", odd_coefficients},
        {"Moller identity", moller_identity},
        {"disorder", disorder_check},
        {"evaluation paths", evaluation_paths}};
    int failed = 0;
    int ran = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!pick.empty() && std::find(pick.begin(), pick.end(), static_cast<int>(k + 1)) == pick.end()) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "exception: " << e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        std::printf("%-4s %2zu %-24s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                    v.detail.str().c_str(), sec);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
