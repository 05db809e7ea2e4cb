#pragma once

#include "viscompare/barrier.hpp"
#include "viscompare/systems.hpp"

#include <random>
#include <string>
#include <vector>

namespace viscompare {

struct PredicateResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Outcome of the theorem dispatch. `theorem` names the strictest comparison
/// result whose hypotheses all pass, empty when none does; `failed` then names
/// the first failing predicate on the route that was tried last.
struct HypothesisVerdict {
    std::string theorem;
    bool applies = false;
    std::string failed;
    std::vector<PredicateResult> predicates;
    double lambda0 = 0.0;  // set for the large-lambda routes
    std::string note;
};

struct HypothesisOptions {
    GrowthOptions growth;
    BarrierWindow window{1e3, 2001};
    double local_radius = 10.0;  // B_R for the modulus and convexity samples
    int samples = 200;
    unsigned seed = 5;
    double ladder_mu = 0.5;
};

namespace detail {

inline std::vector<std::pair<Vec, Vec>> random_point_pairs(int dim, double R, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g;
    std::vector<std::pair<Vec, Vec>> out;
    for (int i = 0; i < count; ++i) {
        Vec x(dim), xi(dim);
        for (int k = 0; k < dim; ++k) {
            x[k] = R * u(rng);
            xi[k] = g(rng);
        }
        out.emplace_back(x, xi);
    }
    return out;
}

inline std::vector<std::pair<Vec, Vec>> random_xi_pairs(int dim, int count, unsigned seed) {
    auto p = random_point_pairs(dim, 1.0, count, seed);
    std::mt19937_64 rng(seed + 1);
    std::normal_distribution<double> g;
    for (auto& [a, b] : p)
        for (int k = 0; k < dim; ++k) a[k] = 3.0 * g(rng), b[k] = 3.0 * g(rng);
    return p;
}

class VerdictBuilder {
public:
    explicit VerdictBuilder(HypothesisVerdict& v) : v_(v) {}
    bool add(std::string name, bool passed, std::string detail = {}) {
        if (!passed && v_.failed.empty()) v_.failed = name;
        v_.predicates.push_back({std::move(name), passed, std::move(detail)});
        return passed;
    }

private:
    HypothesisVerdict& v_;
};

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Structural checks on F shared by every scalar route.
inline bool operator_checks(const ProblemSpec& p, const HypothesisOptions& o, VerdictBuilder& vb) {
    const auto xs = cube_grid(p.dim, o.local_radius, p.dim == 1 ? 21 : 7);
    bool ok = true;
    const auto ell = check_degenerate_ellipticity(p.op, xs);
    ok &= vb.add("degenerate_ellipticity", ell.passed, "worst F(X)-F(Y) for X>=Y: " + fmt(ell.worst_increase));
    const auto pairs = make_modulus_pairs(p.dim, o.local_radius, o.samples, o.seed);
    const auto f1 = check_F1_standard_form(p.op, o.local_radius, {0.5, 0.1, 0.01}, pairs);
    ok &= vb.add("F1", f1.passed, f1.note.empty() ? "modulus max " + fmt(f1.max_value()) : f1.note);
    const auto f2 = check_F2_homogeneity(
        [&](const Vec& x, const Vec& xi, const Mat& X) { return eval_F(p.op, x, xi, X); }, p.dim, xs, {0.0, 0.5, 2.0, 7.0});
    ok &= vb.add("F2", f2.passed, "max deviation " + fmt(f2.max_abs_deviation));
    return ok;
}

// (F3)(F4) plus f in S_{q'}^+ (strict) or SG_{q'}^+ (relaxed).
inline bool growth_checks(const ProblemSpec& p, GrowthMode mode, const HypothesisOptions& o, VerdictBuilder& vb) {
    const bool strict = mode == GrowthMode::Strict;
    const auto f3f4 = check_F3_F4_growth(p.extremal_operator(), p.dim, mode, o.growth);
    const bool s_ok = strict ? f3f4.sigma0.in_S() : f3f4.sigma0.in_SG();
    const bool b_ok = strict ? f3f4.b0.in_S() : f3f4.b0.in_SG();
    bool ok = vb.add(strict ? "F3" : "F3'", s_ok, f3f4.sigma0.verdict_note);
    ok &= vb.add(strict ? "F4" : "F4'", b_ok, f3f4.b0.verdict_note);
    const auto fr = classify_growth(p.f, p.dim, GrowthExponent(p.q_prime()), o.growth);
    ok &= vb.add(strict ? "f in S_{q'}^+" : "f in SG_{q'}^+", strict ? fr.in_S_plus : fr.in_SG_plus, fr.verdict_note);
    return ok;
}

inline bool convexity_check(const std::string& name, const Hamiltonian& h, int dim, const HypothesisOptions& o,
                            VerdictBuilder& vb) {
    const auto xs = cube_grid(dim, o.local_radius, dim == 1 ? 11 : 5);
    const auto r = check_H1_convexity(h, xs, random_xi_pairs(dim, 24, o.seed), {0.25, 0.5, 0.75});
    return vb.add(name, r.passed, "worst violation " + fmt(r.worst_violation));
}

// Eigenvalue bound for power pieces; half the sampled minimum on the unit sphere otherwise.
inline double sampled_delta(const Hamiltonian& h, int dim, const std::vector<Vec>& xs) {
    if (const auto* p = std::get_if<PowerHamiltonian>(&h)) return estimate_delta(*p, xs);
    if (const auto* mc = std::get_if<MinConvexHamiltonian>(&h)) {
        double d = std::numeric_limits<double>::infinity();
        bool all_power = true;
        for (const auto& c : mc->components) {
            if (const auto* pp = std::get_if<PowerHamiltonian>(&c)) d = std::min(d, estimate_delta(*pp, xs));
            else all_power = false;
        }
        if (all_power) return d;
    }
    double d = std::numeric_limits<double>::infinity();
    for (const Vec& x : xs)
        for (const Vec& u : sphere_directions(dim, 32)) d = std::min(d, eval(h, x, u));
    return 0.5 * d;
}

inline bool hamiltonian_common(const ProblemSpec& p, const HypothesisOptions& o, VerdictBuilder& vb, bool bounds) {
    const Hamiltonian& h = *p.H;
    const auto window = cube_grid(p.dim, o.local_radius, p.dim == 1 ? 41 : 9);
    const double C0 = p.C0 ? *p.C0 : estimate_C0(h, p.dim, window);
    bool ok = true;
    if (bounds) {
        const auto samples = random_point_pairs(p.dim, o.local_radius, o.samples, o.seed);
        auto probe = window;
        for (const auto& s : samples) probe.push_back(s.first);
        const double delta = sampled_delta(h, p.dim, probe);
        if (delta > 0.0) {
            const auto b = check_H2_bounds(h, constant_field(delta), C0, samples);
            ok &= vb.add("H2", b.passed, "delta " + fmt(delta) + ", C0 " + fmt(C0));
        } else {
            ok &= vb.add("H2", false, "no positive lower constant delta on the window");
        }
    }
    const auto hom = check_H3_homogeneity(h, random_point_pairs(p.dim, o.local_radius, o.samples, o.seed + 2),
                                          {0.0, 0.5, 2.0, 7.0}, 1e-10);
    ok &= vb.add("H3", hom.passed, "max relative deviation " + fmt(hom.max_rel_deviation));
    const auto mod = check_H4_modulus(h, o.local_radius, make_modulus_pairs(p.dim, o.local_radius, o.samples, o.seed + 3));
    ok &= vb.add("H4", mod.passed, mod.note.empty() ? "modulus max " + fmt(mod.max_value()) : mod.note);
    return ok;
}

inline void large_lambda(const ProblemSpec& p, const HypothesisOptions& o, HypothesisVerdict& v, VerdictBuilder& vb) {
    const auto rep = lambda0_for_SG(p, o.ladder_mu, o.window, o.growth);
    if (!vb.add("lambda0 finite", rep.found, rep.diagnostics)) return;
    v.lambda0 = rep.lambda0;
    v.applies = vb.add("lambda >= lambda0", p.lambda >= rep.lambda0,
                       "lambda " + fmt(p.lambda) + ", lambda0 " + fmt(rep.lambda0));
}

}  // namespace detail

/// Runs the applicable structural checks and names the strictest comparison
/// theorem they support: convex_S, convex_SG_large_lambda, linear_S,
/// linear_SG_large_lambda, sign_switching, min_convex or game.
inline HypothesisVerdict check_hypotheses(const ProblemSpec& p, const HypothesisOptions& o = {}) {
    HypothesisVerdict v;
    detail::VerdictBuilder vb(v);
    if (!detail::operator_checks(p, o, vb)) return v;

    if (!p.H) {
        HypothesisVerdict strict = v;
        detail::VerdictBuilder sb(strict);
        if (detail::growth_checks(p, GrowthMode::Strict, o, sb)) {
            strict.theorem = "linear_S";
            strict.applies = true;
            return strict;
        }
        const std::string strict_failure = strict.failed;
        if (!detail::growth_checks(p, GrowthMode::Relaxed, o, vb)) return v;
        v.theorem = "linear_SG_large_lambda";
        v.note = "strict growth fails at " + strict_failure;
        detail::large_lambda(p, o, v, vb);
        return v;
    }

    const Hamiltonian& h = *p.H;
    switch (h.index()) {
        case 0:    // Power
        case 4: {  // Custom
            bool ok = detail::convexity_check("H1", h, p.dim, o, vb);
            ok &= detail::hamiltonian_common(p, o, vb, true);
            if (!ok) return v;
            HypothesisVerdict strict = v;
            detail::VerdictBuilder sb(strict);
            if (detail::growth_checks(p, GrowthMode::Strict, o, sb)) {
                strict.theorem = "convex_S";
                strict.applies = true;
                return strict;
            }
            const std::string strict_failure = strict.failed;
            if (!detail::growth_checks(p, GrowthMode::Relaxed, o, vb)) return v;
            v.theorem = "convex_SG_large_lambda";
            v.note = "strict growth fails at " + strict_failure;
            detail::large_lambda(p, o, v, vb);
            return v;
        }
        case 1: {  // SignedScalar
            const auto& sh = std::get<SignedScalarHamiltonian>(h);
            if (p.dim != 1) {
                vb.add("A2", false, "zero-set partition is sampled in one dimension only");
                return v;
            }
            const auto grid = line_grid(-o.local_radius, o.local_radius, 4001);
            const auto gamma = compute_gamma(sh, grid);
            const bool split = !gamma.gamma_points.empty() && !gamma.omega_plus.empty() && !gamma.omega_minus.empty();
            bool ok = vb.add("A2", split,
                             std::to_string(gamma.gamma_points.size()) + " zero-set points, " +
                                 std::to_string(gamma.omega_plus.size()) + " convex-side, " +
                                 std::to_string(gamma.omega_minus.size()) + " concave-side");
            if (!ok) return v;
            const auto a13 = check_A1_A3(p.extremal_operator(), gamma, grid);
            ok &= vb.add("A1", a13.degenerate_on_gamma, a13.degenerate_on_gamma ? "" : "sigma0 or b0 nonzero on the zero set");
            ok &= vb.add("A3", a13.lipschitz_finite,
                         "Lipschitz sigma0 " + detail::fmt(a13.lipschitz_sigma0) + ", b0 " + detail::fmt(a13.lipschitz_b0));
            const auto a4 = check_A4(h, gamma.gamma_points, 1.0, 1e6);
            ok &= vb.add("A4", a4.passed, "C1 estimate " + detail::fmt(a4.C1_estimate));
            ok &= detail::hamiltonian_common(p, o, vb, false);
            ok &= detail::growth_checks(p, GrowthMode::Strict, o, vb);
            if (ok) {
                v.theorem = "sign_switching";
                v.applies = true;
            }
            return v;
        }
        case 2: {  // MinConvex
            const auto& mc = std::get<MinConvexHamiltonian>(h);
            bool ok = true;
            for (std::size_t k = 0; k < mc.components.size(); ++k) {
                const Hamiltonian piece = std::visit([](const auto& c) -> Hamiltonian { return c; }, mc.components[k]);
                ok &= detail::convexity_check("H1[" + std::to_string(k) + "]", piece, p.dim, o, vb);
            }
            ok &= detail::hamiltonian_common(p, o, vb, true);
            ok &= detail::growth_checks(p, GrowthMode::Strict, o, vb);
            if (ok) {
                v.theorem = "min_convex";
                v.applies = true;
            }
            return v;
        }
        case 3: {  // Game
            const auto& g = std::get<GameHamiltonian>(h);
            const auto xs = cube_grid(p.dim, o.local_radius, p.dim == 1 ? 21 : 7);
            double delta = std::numeric_limits<double>::infinity();
            for (const Vec& x : xs)
                for (int b = 0; b < g.beta_count; ++b) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (int a = 0; a < g.alpha_count; ++a) {
                        const Mat s = g.sigma(x, a, b), t = g.tau(x, a, b);
                        best = std::max(best, min_eigenvalue(s * s.transpose() - t * t.transpose()));
                    }
                    delta = std::min(delta, best);
                }
            const double C0 = p.C0 ? *p.C0 : estimate_C0(h, p.dim, xs);
            bool ok = true;
            if (delta > 0.0) {
                const auto r = check_H2prime(g, constant_field(delta), C0, xs);
                ok &= vb.add("H2'", r.passed, r.passed ? "delta " + detail::fmt(delta) + ", C0 " + detail::fmt(C0) : r.failure);
            } else {
                ok &= vb.add("H2'", false, "no alpha keeps S - T positive definite for some beta");
            }
            ok &= detail::hamiltonian_common(p, o, vb, false);
            ok &= detail::growth_checks(p, GrowthMode::Strict, o, vb);
            if (ok) {
                v.theorem = "game";
                v.applies = true;
            }
            return v;
        }
        default:
            break;
    }
    vb.add("hamiltonian_supported", false, "unrecognized Hamiltonian form");
    return v;
}

/// (M), (F2') and shared constants for a weakly coupled system.
inline HypothesisVerdict check_hypotheses(const MonotoneSystem& sys, const HypothesisOptions& o = {}) {
    HypothesisVerdict v;
    detail::VerdictBuilder vb(v);
    const auto rs = make_rs_samples(sys.m(), o.samples, o.seed, 5.0);
    const auto pts = make_point_samples(sys.dim, o.samples, o.seed + 1, o.local_radius);
    const auto m = check_M(sys, rs, pts);
    std::string mdetail = "worst slack " + detail::fmt(m.worst_slack);
    if (!m.passed) mdetail += " in component " + std::to_string(m.witness_j);
    bool ok = vb.add("M", m.passed, mdetail);
    const auto f2 = check_F2prime(sys, rs, pts, {0.0, 0.5, 2.0, 7.0});
    ok &= vb.add("F2'", f2.passed, "max deviation " + detail::fmt(f2.max_abs_deviation));
    const auto cc = common_constants(sys, cube_grid(sys.dim, o.local_radius, sys.dim == 1 ? 41 : 9));
    ok &= vb.add("common q and C0", cc.common, cc.note);
    for (int k = 0; k < sys.m(); ++k) {
        const auto p = detail::component_problem(sys, k);
        const auto f3f4 = check_F3_F4_growth(p.extremal_operator(), p.dim, GrowthMode::Strict, o.growth);
        ok &= vb.add("F3F4[" + std::to_string(k) + "]", f3f4.passed, f3f4.failed);
    }
    if (ok) {
        v.theorem = "monotone_system";
        v.applies = true;
    }
    return v;
}

}  // namespace viscompare
