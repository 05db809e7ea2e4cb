#pragma once

#include "viscompare/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace viscompare {

/// lambda u + F(x, Du, D^2u) + H(x, Du) - f(x) for a smooth candidate u.
inline double pde_residual(const ProblemSpec& p, const SmoothCandidate& u, const Vec& x) {
    const double v = evaluate_at(u.value, x);
    const Vec g = evaluate_at(u.gradient, x);
    const Mat h = evaluate_at(u.hessian, x);
    return p.lambda * v + eval_F(p.op, x, g, h) + p.eval_H(x, g) - evaluate_at(p.f, x);
}

/// lambda u* + F(x, Du*, D^2u*) + H(x, Du*): the right-hand side that makes u* exact.
inline double manufactured_rhs(const ProblemSpec& p, const SmoothCandidate& u_star, const Vec& x) {
    const double v = evaluate_at(u_star.value, x);
    const Vec g = evaluate_at(u_star.gradient, x);
    const Mat h = evaluate_at(u_star.hessian, x);
    return p.lambda * v + eval_F(p.op, x, g, h) + p.eval_H(x, g);
}

/// Problem copy whose right-hand side is manufactured from u*.
inline ProblemSpec with_manufactured_rhs(ProblemSpec p, const SmoothCandidate& u_star) {
    ProblemSpec base = p;
    p.f = [base, u_star](const Vec& x) { return manufactured_rhs(base, u_star, x); };
    return p;
}

/// Residual of mu*u for  lambda w + F(x, Dw, D^2w) + mu^{1-q} H(x, Dw) = mu f.
inline double mu_subsolution_residual(const ProblemSpec& p, const SmoothCandidate& u, double mu, const Vec& x) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("mu_subsolution_residual: mu must lie in (0,1)");
    const double v = mu * evaluate_at(u.value, x);
    const Vec g = mu * evaluate_at(u.gradient, x);
    const Mat h = mu * evaluate_at(u.hessian, x);
    const double q = p.exponent();
    return p.lambda * v + eval_F(p.op, x, g, h) + std::pow(mu, 1.0 - q) * p.eval_H(x, g) - mu * evaluate_at(p.f, x);
}

enum class SignClass { Solution, Subsolution, Supersolution, Neither };

inline const char* to_string(SignClass c) {
    switch (c) {
        case SignClass::Solution: return "solution";
        case SignClass::Subsolution: return "subsolution";
        case SignClass::Supersolution: return "supersolution";
        case SignClass::Neither: return "neither";
    }
    return "neither";
}

struct ResidualReport {
    std::string candidate;
    double max_abs_residual = 0.0;
    Vec argmax;
    double min_residual = std::numeric_limits<double>::infinity();
    double max_residual = -std::numeric_limits<double>::infinity();
    double tol = 0.0;
    SignClass classification = SignClass::Neither;
    std::vector<double> residuals;  // per grid point, same order as the grid

    bool is_subsolution() const {
        return classification == SignClass::Solution || classification == SignClass::Subsolution;
    }
    bool is_supersolution() const {
        return classification == SignClass::Solution || classification == SignClass::Supersolution;
    }
};

/// Evaluates the residual on a grid and classifies the sign pattern.
/// A negative tol selects the default 1e-8 (1 + max |f| on the grid).
inline ResidualReport verify_solution(const ProblemSpec& p, const SmoothCandidate& u, const std::vector<Vec>& grid,
                                      double tol = -1.0) {
    if (grid.empty()) throw std::invalid_argument("verify_solution: empty grid");
    ResidualReport rep;
    rep.candidate = u.name;
    double fmax = 0.0;
    rep.residuals.reserve(grid.size());
    for (const Vec& x : grid) {
        const double r = pde_residual(p, u, x);
        fmax = std::max(fmax, std::abs(evaluate_at(p.f, x)));
        rep.residuals.push_back(r);
        rep.min_residual = std::min(rep.min_residual, r);
        rep.max_residual = std::max(rep.max_residual, r);
        if (std::abs(r) > rep.max_abs_residual || rep.argmax.size() == 0) {
            rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
            rep.argmax = x;
        }
    }
    rep.tol = tol < 0.0 ? 1e-8 * (1.0 + fmax) : tol;
    if (rep.max_abs_residual <= rep.tol) rep.classification = SignClass::Solution;
    else if (rep.max_residual <= rep.tol) rep.classification = SignClass::Subsolution;
    else if (rep.min_residual >= -rep.tol) rep.classification = SignClass::Supersolution;
    else rep.classification = SignClass::Neither;
    return rep;
}

}  // namespace viscompare
