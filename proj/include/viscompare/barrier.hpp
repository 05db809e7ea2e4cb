#pragma once

#include "viscompare/growth.hpp"
#include "viscompare/operator.hpp"
#include "viscompare/problem.hpp"
#include "viscompare/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace viscompare {

/// Sample window on which the barrier constants are estimated and strictness is checked.
struct BarrierWindow {
    double radius = 1e3;
    int points_per_axis = 10001;

    std::vector<Vec> points(int dim) const { return cube_grid(dim, radius, points_per_axis); }
};

enum class BarrierKind { Convex, Linear };

/// Constants of the strict supersolution Phi(x) = (1 - mu) (C1 + alpha <x>^{q'}).
///
/// For the linear (H = 0) construction mu = 0 and beta_mu = 0, so the same
/// evaluator gives Phi(x) = alpha <x>^{q'} + C1.
struct BarrierParams {
    BarrierKind kind = BarrierKind::Convex;
    GrowthMode mode = GrowthMode::Strict;
    double mu = 0.5;
    double q = 2.0;
    double q_prime = 2.0;
    double lambda = 1.0;
    double C0 = 1.0;
    double C0_prime = 8.0;
    double eps = 0.25;
    double eps_prime = 0.0;
    double C_eps = 0.0;
    double C_eps_prime = 0.0;
    double alpha = 0.0;
    double C1 = 1.0;
    double beta_mu = 0.0;
    double c1_reference_term = 0.0;  // max{C_eps <x>^{q'-2} : <x> <= 4 C_eps / lambda}
    double c1_deficit_term = 0.0;    // max over the same set of alpha (C_eps s^{q'-1} - lambda s^{q'} / 4)
    double window_radius = 0.0;
    int window_points = 0;

    /// eps <= lambda/4, alpha^{q-1} C0' <= lambda/4, eps' <= lambda alpha/4.
    bool chain_holds() const {
        if (kind == BarrierKind::Linear) return eps <= lambda / 2.0 && alpha >= 1.0 && C1 >= 1.0;
        return eps <= lambda / 4.0 && std::pow(alpha, q - 1.0) * C0_prime <= lambda / 4.0 * (1.0 + 1e-12) &&
               eps_prime <= lambda * alpha / 4.0 * (1.0 + 1e-12);
    }
};

/// beta_mu = ((1 - mu)/2)^{1-q} C0.
inline double beta_mu(double mu, double q, double C0) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("beta_mu: mu must lie in (0,1)");
    return std::pow(0.5 * (1.0 - mu), 1.0 - q) * C0;
}

struct BarrierValue {
    double value;
    Vec gradient;
    Mat hessian;
};

inline BarrierValue eval_barrier(const BarrierParams& p, const Vec& x) {
    const double scale = (1.0 - p.mu) * p.alpha;
    const auto d = bracket_power_derivatives(x, p.q_prime);
    return {(1.0 - p.mu) * (p.C1 + p.alpha * bracket_power(x, p.q_prime)), scale * d.gradient, scale * d.hessian};
}

/// lambda w + P(x, D^2w) - b0 |Dw| - beta_mu |Dw|^q - (mu - 1) f(x).
/// Positive at x means w is a strict supersolution of the extremal inequality there.
inline double extremal_residual(const ProblemSpec& problem, const BarrierParams& params, double w_value,
                                const Vec& w_grad, const Mat& w_hess, const Vec& x) {
    const auto ext = problem.extremal_operator();
    const double g = w_grad.norm();
    return problem.lambda * w_value + eval_P(ext, x, w_hess) - evaluate_at(ext.b0, x) * g -
           params.beta_mu * std::pow(g, params.q) - (params.mu - 1.0) * evaluate_at(problem.f, x);
}

/// lambda w + P(x, D^2w) - b0 |Dw| (no Hamiltonian, f cancels in the difference of solutions).
inline double linear_extremal_residual(const ProblemSpec& problem, double w_value, const Vec& w_grad,
                                       const Mat& w_hess, const Vec& x) {
    const auto ext = problem.extremal_operator();
    return problem.lambda * w_value + eval_P(ext, x, w_hess) - evaluate_at(ext.b0, x) * w_grad.norm();
}

/// lambda w + min_k { P_k(x, D^2w) - b_k |Dw| - beta_mu |Dw|^q - (mu - 1) f_k(x) }.
inline double system_extremal_residual(double lambda, const std::vector<ExtremalOperator>& components,
                                       const std::vector<ScalarField>& f, const BarrierParams& params,
                                       double w_value, const Vec& w_grad, const Mat& w_hess, const Vec& x) {
    if (components.empty() || components.size() != f.size())
        throw std::invalid_argument("system_extremal_residual: component count mismatch");
    const double g = w_grad.norm();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < components.size(); ++k) {
        const double v = eval_P(components[k], x, w_hess) - evaluate_at(components[k].b0, x) * g -
                         params.beta_mu * std::pow(g, params.q) - (params.mu - 1.0) * evaluate_at(f[k], x);
        best = std::min(best, v);
    }
    return lambda * w_value + best;
}

namespace detail {

// Coefficient c(x) with  -P(x, D^2 <x>^{q'}) + b0 |D <x>^{q'}| <= c(x) <x>^{q'-1}.
inline double barrier_drift_coefficient(const ExtremalOperator& ext, double q_prime, const Vec& x) {
    const double s2 = evaluate_at(ext.sigma0, x).squaredNorm();  // Tr(sigma0 sigma0^T)
    return q_prime * std::max(1.0, q_prime - 1.0) * s2 / bracket(x) + q_prime * evaluate_at(ext.b0, x);
}

// max over s in [1, S] of a s^{e1} - k s^{e2} (k > 0, e2 > e1), 0 when the set is empty.
inline double max_power_deficit(double a, double e1, double k, double e2, double S) {
    if (!(S >= 1.0) || a <= 0.0) return 0.0;
    auto f = [&](double s) { return a * std::pow(s, e1) - k * std::pow(s, e2); };
    double best = std::max(f(1.0), f(S));
    if (e1 > 0.0) {
        const double s_star = (a * e1) / (k * e2);  // stationary point of a s^{e1} - k s^{e2}
        const double s = std::pow(s_star, 1.0 / (e2 - e1));
        if (s > 1.0 && s < S) best = std::max(best, f(s));
    }
    return std::max(best, 0.0);
}

struct WindowEstimates {
    double slope_g = 0.0;  // max over the outer shell of c(x)/<x>
    double slope_f = 0.0;  // max over the outer shell of -f(x)/<x>^{q'}
};

inline WindowEstimates outer_shell_slopes(const ProblemSpec& problem, const ExtremalOperator& ext, double q_prime,
                                          double radius) {
    WindowEstimates w;
    for (const Vec& d : sphere_directions(problem.dim, 64)) {
        const Vec x = radius * d;
        w.slope_g = std::max(w.slope_g, barrier_drift_coefficient(ext, q_prime, x) / bracket(x));
        w.slope_f = std::max(w.slope_f, -evaluate_at(problem.f, x) / bracket_power(x, q_prime));
    }
    return w;
}

inline void require_growth(const ProblemSpec& problem, GrowthMode mode, const GrowthOptions& opts) {
    const auto f3f4 = check_F3_F4_growth(problem.extremal_operator(), problem.dim, mode, opts);
    const char* fallback = mode == GrowthMode::Strict
                               ? "; the large-lambda construction (relaxed growth mode, lambda0 ladder) may apply"
                               : "";
    if (!f3f4.passed) throw HypothesisError(f3f4.failed, std::string("coefficient growth precondition unmet") + fallback);
    const auto fr = classify_growth(problem.f, problem.dim, GrowthExponent(problem.q_prime()), opts);
    const bool ok = mode == GrowthMode::Strict ? fr.in_S_plus : fr.in_SG_plus;
    if (!ok)
        throw HypothesisError(mode == GrowthMode::Strict ? "f not in S_{q'}^+" : "f not in SG_{q'}^+",
                              std::string("right-hand side growth precondition unmet") + fallback);
}

}  // namespace detail

/// Builds the strict supersolution constants on a window.
///
/// eps = lambda/4, alpha = min(0.99, (lambda/(4 C0'))^{1/(q-1)}), eps' = lambda alpha/4,
/// C_eps and C_eps' are the smallest constants making
///   c(x) <= eps <x> + C_eps  and  -f(x) <= eps' <x>^{q'} + C_eps'
/// hold on the window. In relaxed mode eps and eps' are raised to the slopes
/// observed on the outer shell, so they need not be small.
inline BarrierParams construct_barrier(const ProblemSpec& problem, double mu, const BarrierWindow& window = {},
                                       GrowthMode mode = GrowthMode::Strict, const GrowthOptions& growth = {},
                                       bool check_growth = true) {
    if (!problem.has_hamiltonian())
        throw std::invalid_argument("construct_barrier: problem has no Hamiltonian (use linear_case_barrier)");
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("construct_barrier: mu must lie in (0,1)");
    if (check_growth) detail::require_growth(problem, mode, growth);

    const auto pts = window.points(problem.dim);
    const auto ext = problem.extremal_operator();
    BarrierParams p;
    p.kind = BarrierKind::Convex;
    p.mode = mode;
    p.mu = mu;
    p.q = problem.exponent();
    p.q_prime = conjugate(p.q);
    p.lambda = problem.lambda;
    p.C0 = problem.C0 ? *problem.C0 : estimate_C0(*problem.H, problem.dim, pts);
    p.C0_prime = p.C0 * std::pow(2.0, p.q - 1.0) * std::pow(p.q_prime, p.q);
    p.beta_mu = beta_mu(mu, p.q, p.C0);
    p.window_radius = window.radius;
    p.window_points = window.points_per_axis;

    const double lam = p.lambda;
    p.eps = lam / 4.0;
    p.alpha = p.C0_prime > 0.0 ? std::min(0.99, std::pow(lam / (4.0 * p.C0_prime), 1.0 / (p.q - 1.0))) : 0.99;
    p.eps_prime = lam * p.alpha / 4.0;
    if (mode == GrowthMode::Relaxed) {
        const auto slopes = detail::outer_shell_slopes(problem, ext, p.q_prime, window.radius);
        p.eps = std::max(p.eps, slopes.slope_g);
        p.eps_prime = std::max(p.eps_prime, slopes.slope_f);
    }

    for (const Vec& x : pts) {
        const double bx = bracket(x);
        p.C_eps = std::max(p.C_eps, detail::barrier_drift_coefficient(ext, p.q_prime, x) - p.eps * bx);
        p.C_eps_prime = std::max(p.C_eps_prime,
                                 -evaluate_at(problem.f, x) - p.eps_prime * std::pow(bx, p.q_prime));
    }

    const double S = 4.0 * p.C_eps / lam;
    if (S >= 1.0) {
        p.c1_reference_term = std::max(p.C_eps * std::pow(S, p.q_prime - 2.0), p.C_eps);
        p.c1_deficit_term = detail::max_power_deficit(p.alpha * p.C_eps, p.q_prime - 1.0, p.alpha * lam / 4.0,
                                                      p.q_prime, S);
    }
    p.C1 = (p.C_eps_prime + std::max(p.c1_reference_term, p.c1_deficit_term)) / lam + 1.0;
    return p;
}

struct StrictnessReport {
    bool passed = false;
    double min_residual = std::numeric_limits<double>::infinity();
    Vec argmin;
    std::vector<double> residuals;  // per grid point
};

/// min over the grid of the extremal residual of Phi; strict iff positive everywhere.
inline StrictnessReport verify_strict(const ProblemSpec& problem, const BarrierParams& params,
                                      const std::vector<Vec>& grid, bool keep_residuals = false) {
    StrictnessReport rep;
    if (keep_residuals) rep.residuals.reserve(grid.size());
    for (const Vec& x : grid) {
        const auto phi = eval_barrier(params, x);
        const double r = params.kind == BarrierKind::Linear
                             ? linear_extremal_residual(problem, phi.value, phi.gradient, phi.hessian, x)
                             : extremal_residual(problem, params, phi.value, phi.gradient, phi.hessian, x);
        if (keep_residuals) rep.residuals.push_back(r);
        if (r < rep.min_residual) {
            rep.min_residual = r;
            rep.argmin = x;
        }
    }
    rep.passed = !grid.empty() && rep.min_residual > 0.0;
    return rep;
}

struct LinearBarrierResult {
    BarrierParams params;
    StrictnessReport report;
};

/// Phi(x) = alpha <x>^{q'} + C1 for the equation without Hamiltonian.
///
/// eps = lambda/2 (raised to the outer-shell slope in relaxed mode),
/// C1 = max(1, C_eps/lambda, 2 D/lambda) with D the largest deficit of
/// alpha (C_eps s^{q'-1} - (lambda/2) s^{q'}) over s >= 1.
inline LinearBarrierResult linear_case_barrier(const ProblemSpec& problem, const BarrierWindow& window = {},
                                               GrowthMode mode = GrowthMode::Strict, double alpha = 1.0,
                                               const GrowthOptions& growth = {}, bool check_growth = true) {
    if (problem.has_hamiltonian()) throw std::invalid_argument("linear_case_barrier: problem has a Hamiltonian");
    if (check_growth) {
        const auto f3f4 = check_F3_F4_growth(problem.extremal_operator(), problem.dim, mode, growth);
        if (!f3f4.passed) throw HypothesisError(f3f4.failed, "coefficient growth precondition unmet");
    }
    const auto pts = window.points(problem.dim);
    const auto ext = problem.extremal_operator();
    BarrierParams p;
    p.kind = BarrierKind::Linear;
    p.mode = mode;
    p.mu = 0.0;
    p.q = problem.exponent();
    p.q_prime = conjugate(p.q);
    p.lambda = problem.lambda;
    p.C0 = 0.0;
    p.C0_prime = 0.0;
    p.beta_mu = 0.0;
    p.alpha = std::max(alpha, 1.0);
    p.window_radius = window.radius;
    p.window_points = window.points_per_axis;
    p.eps = p.lambda / 2.0;
    if (mode == GrowthMode::Relaxed)
        p.eps = std::max(p.eps, detail::outer_shell_slopes(problem, ext, p.q_prime, window.radius).slope_g);
    for (const Vec& x : pts)
        p.C_eps = std::max(p.C_eps, detail::barrier_drift_coefficient(ext, p.q_prime, x) - p.eps * bracket(x));
    const double S = 2.0 * p.C_eps / p.lambda;
    p.c1_deficit_term =
        detail::max_power_deficit(p.alpha * p.C_eps, p.q_prime - 1.0, p.alpha * p.lambda / 2.0, p.q_prime, S);
    p.C1 = std::max({1.0, p.C_eps / p.lambda, 2.0 * p.c1_deficit_term / p.lambda});
    LinearBarrierResult out{p, verify_strict(problem, p, pts)};
    return out;
}

struct LadderRung {
    double lambda;
    double min_residual;
    bool passed;
};

struct Lambda0Report {
    bool found = false;
    double lambda0 = std::numeric_limits<double>::infinity();
    std::vector<LadderRung> rungs;
    std::string diagnostics;
};

/// Smallest lambda on the ladder 2^-4, 2^-3, ..., 2^20 for which the relaxed-growth
/// barrier is a strict supersolution on the window. An upper bound for the true
/// threshold, certified on the window only.
inline Lambda0Report lambda0_for_SG(const ProblemSpec& problem, double mu, const BarrierWindow& window = {},
                                    const GrowthOptions& growth = {}) {
    Lambda0Report rep;
    if (problem.has_hamiltonian()) detail::require_growth(problem, GrowthMode::Relaxed, growth);
    else {
        const auto f3f4 = check_F3_F4_growth(problem.extremal_operator(), problem.dim, GrowthMode::Relaxed, growth);
        if (!f3f4.passed) throw HypothesisError(f3f4.failed, "coefficient growth precondition unmet");
    }
    const auto pts = window.points(problem.dim);
    ProblemSpec trial = problem;
    if (problem.has_hamiltonian() && !trial.C0) trial.C0 = estimate_C0(*problem.H, problem.dim, pts);
    for (double lam = 1.0 / 16.0; lam <= std::ldexp(1.0, 20); lam *= 2.0) {
        trial.lambda = lam;
        StrictnessReport sr;
        if (problem.has_hamiltonian()) {
            const auto params = construct_barrier(trial, mu, window, GrowthMode::Relaxed, growth, false);
            sr = verify_strict(trial, params, pts);
        } else {
            sr = linear_case_barrier(trial, window, GrowthMode::Relaxed, 1.0, growth, false).report;
        }
        rep.rungs.push_back({lam, sr.min_residual, sr.passed});
        if (sr.passed) {
            rep.found = true;
            rep.lambda0 = lam;
            return rep;
        }
    }
    rep.diagnostics = "ladder exhausted up to lambda = 2^20 without a strict supersolution on the window; last min residual " +
                      std::to_string(rep.rungs.back().min_residual);
    return rep;
}

}  // namespace viscompare
