#pragma once

#include "viscompare/growth.hpp"
#include "viscompare/hamiltonian.hpp"
#include "viscompare/operator.hpp"
#include "viscompare/types.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace viscompare {

/// One scalar equation  lambda u + F(x, Du, D^2u) + H(x, Du) = f(x)  in R^N.
struct ProblemSpec {
    std::string name;
    int dim = 1;
    double lambda = 1.0;
    DriftDiffusionOperator op;
    std::optional<ExtremalOperator> extremal;  // canonical (sigma, |b|) when empty
    std::optional<Hamiltonian> H;              // empty: linear problem
    double q = 2.0;                            // growth exponent; taken from H when present
    ScalarField f;
    std::optional<double> C0;  // upper constant of H; estimated on a window when empty

    ExtremalOperator extremal_operator() const { return extremal ? *extremal : canonical_extremal(op); }
    double exponent() const { return H ? viscompare::exponent(*H) : q; }
    double q_prime() const { return conjugate(exponent()); }
    bool has_hamiltonian() const { return H.has_value(); }
    double eval_H(const Vec& x, const Vec& xi) const { return H ? eval(*H, x, xi) : 0.0; }
};

/// u, Du, D^2u evaluators of a smooth candidate solution.
struct SmoothCandidate {
    std::string name;
    std::function<double(const Vec&)> value;
    VectorField gradient;
    MatrixField hessian;
    bool finite_difference = false;
};

inline double fd_step_gradient(const Vec& x) {
    return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + x.norm());
}

inline double fd_step_hessian(const Vec& x) {
    return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * (1.0 + x.norm());
}

inline Vec fd_gradient(const std::function<double(const Vec&)>& u, const Vec& x) {
    const double h = fd_step_gradient(x);
    Vec g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Vec p = x, m = x;
        p[i] += h;
        m[i] -= h;
        g[i] = (u(p) - u(m)) / (2.0 * h);
    }
    return g;
}

inline Mat fd_hessian(const std::function<double(const Vec&)>& u, const Vec& x) {
    const double h = fd_step_hessian(x);
    const auto n = x.size();
    Mat H(n, n);
    const double u0 = u(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec p = x, m = x;
        p[i] += h;
        m[i] -= h;
        H(i, i) = (u(p) - 2.0 * u0 + u(m)) / (h * h);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vec pp = x, pm = x, mp = x, mm = x;
            pp[i] += h, pp[j] += h;
            pm[i] += h, pm[j] -= h;
            mp[i] -= h, mp[j] += h;
            mm[i] -= h, mm[j] -= h;
            H(i, j) = H(j, i) = (u(pp) - u(pm) - u(mp) + u(mm)) / (4.0 * h * h);
        }
    }
    return H;
}

struct ConsistencyReport {
    bool passed = true;
    double max_gradient_error = 0.0;
    double max_hessian_error = 0.0;
    Vec witness;
};

/// Compares a candidate's gradient/Hessian with central differences of its value.
inline ConsistencyReport check_candidate_consistency(const SmoothCandidate& c, const std::vector<Vec>& probes,
                                                     double tol = 1e-5) {
    ConsistencyReport rep;
    for (const Vec& x : probes) {
        const Vec g = c.gradient(x);
        const Mat H = c.hessian(x);
        const double ge = (g - fd_gradient(c.value, x)).norm() / (1.0 + g.norm());
        const double he = (H - fd_hessian(c.value, x)).norm() / (1.0 + H.norm());
        if (ge > rep.max_gradient_error || he > rep.max_hessian_error) rep.witness = x;
        rep.max_gradient_error = std::max(rep.max_gradient_error, ge);
        rep.max_hessian_error = std::max(rep.max_hessian_error, he);
        if (!(H - H.transpose()).isZero(1e-12 * (1.0 + H.norm()))) rep.passed = false;
    }
    rep.passed = rep.passed && rep.max_gradient_error <= tol && rep.max_hessian_error <= tol;
    return rep;
}

/// Candidate with analytic derivatives.
inline SmoothCandidate make_candidate(std::string name, std::function<double(const Vec&)> value, VectorField gradient,
                                      MatrixField hessian) {
    return {std::move(name), std::move(value), std::move(gradient), std::move(hessian), false};
}

/// Value-only candidate; derivatives by central differences. The finite-difference
/// gradient is cross-checked at two step sizes on `probes` before the candidate is returned.
inline SmoothCandidate candidate_from_value(std::string name, std::function<double(const Vec&)> value,
                                            const std::vector<Vec>& probes, double tol = 1e-5) {
    SmoothCandidate c;
    c.name = std::move(name);
    c.value = value;
    c.gradient = [value](const Vec& x) { return fd_gradient(value, x); };
    c.hessian = [value](const Vec& x) { return fd_hessian(value, x); };
    c.finite_difference = true;
    for (const Vec& x : probes) {
        const Vec g1 = fd_gradient(value, x);
        const double h = 2.0 * fd_step_gradient(x);
        Vec g2(x.size());
        double one_sided_jump = 0.0;  // forward minus backward slope; O(h) when smooth, O(1) at a kink
        const double u0 = value(x);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            Vec p = x, m = x;
            p[i] += h;
            m[i] -= h;
            const double up = value(p), um = value(m);
            g2[i] = (up - um) / (2.0 * h);
            one_sided_jump = std::max(one_sided_jump, std::abs((up - u0) - (u0 - um)) / h);
        }
        if ((g1 - g2).norm() > tol * (1.0 + g1.norm()) || one_sided_jump > 1e-3 * (1.0 + g1.norm()))
            throw EvaluationError("finite-difference gradient inconsistent (candidate not smooth enough)", x);
    }
    return c;
}

/// n equally spaced points on [a, b] (n >= 2), as 1D vectors.
inline std::vector<Vec> line_grid(double a, double b, int n) {
    std::vector<Vec> pts;
    pts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pts.push_back(Vec::Constant(1, a + (b - a) * i / (n - 1)));
    return pts;
}

/// Tensor grid with n points per axis on [-R, R]^dim.
inline std::vector<Vec> cube_grid(int dim, double R, int n) {
    std::vector<Vec> pts;
    if (dim == 1) return line_grid(-R, R, n);
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    while (true) {
        Vec x(dim);
        for (int k = 0; k < dim; ++k) x[k] = -R + 2.0 * R * idx[static_cast<std::size_t>(k)] / (n - 1);
        pts.push_back(x);
        int k = 0;
        while (k < dim && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
        if (k == dim) break;
    }
    return pts;
}

}  // namespace viscompare
