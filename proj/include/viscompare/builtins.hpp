#pragma once

#include "viscompare/problem.hpp"

#include <cmath>
#include <string>

// Built-in problems and their closed-form solutions.
namespace viscompare::builtins {

inline DriftDiffusionOperator laplacian(int dim) {
    return {dim, constant_matrix_field(Mat::Identity(dim, dim)), zero_vector_field(dim)};
}

inline PowerHamiltonian euclidean_power(int dim, double q) { return {constant_matrix_field(Mat::Identity(dim, dim)), q}; }

/// lambda u - u'' + |u'|^2 = 0 in R.
inline ProblemSpec eq12(double lambda = 1.0) {
    ProblemSpec p;
    p.name = "eq12";
    p.dim = 1;
    p.lambda = lambda;
    p.op = laplacian(1);
    p.H = euclidean_power(1, 2.0);
    p.q = 2.0;
    p.f = constant_field(0.0);
    p.C0 = 1.0;
    return p;
}

/// lambda u - Laplace u + |Du|^q = f in R^dim.
inline ProblemSpec eq13(int dim = 1, double q = 2.0, ScalarField f = {}, double lambda = 1.0) {
    ProblemSpec p;
    p.name = "eq13";
    p.dim = dim;
    p.lambda = lambda;
    p.op = laplacian(dim);
    p.H = euclidean_power(dim, q);
    p.q = q;
    p.f = f ? std::move(f) : constant_field(0.0);
    p.C0 = 1.0;
    return p;
}

/// lambda u - u'' + |u'|^2 + t x u' = 0 in R.
inline ProblemSpec hje3(double lambda = 1.0, double t = 1.0) {
    ProblemSpec p = eq12(lambda);
    p.name = "hje3";
    p.op.b = [t](const Vec& x) { return Vec(t * x); };
    return p;
}

/// lambda u - (1 + x^2) u'' + |u'|^2 = 0 in R (closed forms need lambda = 1).
inline ProblemSpec ex2(double lambda = 1.0) {
    ProblemSpec p = eq12(lambda);
    p.name = "ex2";
    p.op.sigma = [](const Vec& x) { return Mat::Constant(1, 1, bracket(x)); };
    return p;
}

/// u - Tr(sigma sigma^T D^2u) + <b, Du> + <A Du, Du>^{q/2} = f in R^2 with bounded smooth coefficients.
inline ProblemSpec example1(double lambda = 1.0, double q = 2.0) {
    ProblemSpec p;
    p.name = "example1";
    p.dim = 2;
    p.lambda = lambda;
    p.op.dim = 2;
    p.op.sigma = [](const Vec& x) {
        Mat s = Mat::Zero(2, 2);
        s(0, 0) = 1.0 + 0.25 * std::sin(x[1]);
        s(1, 1) = 1.0 + 0.25 * std::cos(x[0]);
        return s;
    };
    p.op.b = [](const Vec& x) {
        Vec b(2);
        b << 0.5 * std::sin(x[1]), -0.5 * std::cos(x[0]);
        return b;
    };
    p.H = PowerHamiltonian{[](const Vec& x) {
                               Mat a = Mat::Zero(2, 2);
                               a(0, 0) = 2.0 + std::sin(x[0]);
                               a(1, 1) = 2.0 + std::cos(x[1]);
                               return a;
                           },
                           q};
    p.q = q;
    p.f = [](const Vec& x) { return bracket(x); };
    p.C0 = std::pow(3.0, q / 2.0);
    return p;
}

/// lambda u + a(x) |u'|^q = lambda in R with a(x) = x^3: convex for x > 0, concave for x < 0.
inline ProblemSpec signswitch(double lambda = 1.0, double q = 3.0, ScalarField a = {}) {
    ProblemSpec p;
    p.name = "signswitch";
    p.dim = 1;
    p.lambda = lambda;
    p.op = {1, constant_matrix_field(Mat::Zero(1, 1)), zero_vector_field(1)};
    if (!a) a = [](const Vec& x) { return x[0] * x[0] * x[0]; };
    p.H = SignedScalarHamiltonian{std::move(a), q};
    p.q = q;
    p.f = constant_field(lambda);
    return p;
}

/// C^1 viscosity solution of signswitch with a(x) = x^3, q = 3:
/// u = 1 on [-left, right], u = 1 -+ ((2/3) lambda^{1/3} log(|x|/x*))^{3/2} outside.
/// Only the value is smooth enough to serve as boundary data.
inline ScalarField signswitch_solution(double lambda = 1.0, double left = 0.5, double right = 0.25) {
    return [=](const Vec& x) {
        const double edge = x[0] < 0.0 ? left : right;
        const double ax = std::abs(x[0]);
        if (ax <= edge) return 1.0;
        const double w = std::pow((2.0 / 3.0) * std::cbrt(lambda) * std::log(ax / edge), 1.5);
        return x[0] < 0.0 ? 1.0 + w : 1.0 - w;
    };
}

/// lambda u - Laplace u + min(<A1 Du, Du>, <A2 Du, Du>) = f in R^2, A1 = diag(1,4), A2 = diag(4,1).
inline ProblemSpec minconvex(double lambda = 1.0, ScalarField f = {}) {
    ProblemSpec p;
    p.name = "minconvex";
    p.dim = 2;
    p.lambda = lambda;
    p.op = laplacian(2);
    const Mat A1 = Eigen::Vector2d(1.0, 4.0).asDiagonal(), A2 = Eigen::Vector2d(4.0, 1.0).asDiagonal();
    MinConvexHamiltonian h;
    h.q = 2.0;
    h.components = {PowerHamiltonian{constant_matrix_field(A1), 2.0}, PowerHamiltonian{constant_matrix_field(A2), 2.0}};
    p.H = h;
    p.q = 2.0;
    p.f = f ? std::move(f) : constant_field(0.0);
    p.C0 = 4.0;
    return p;
}

/// 2x2 game: S - T = M(alpha, beta) with
///   beta = 0: diag(2, 1/2), diag(1/2, 2);  beta = 1: diag(3/2, 1), diag(1, 3/2);  T = I/4.
inline GameHamiltonian game_hamiltonian() {
    GameHamiltonian g;
    g.alpha_count = 2;
    g.beta_count = 2;
    g.sigma = [](const Vec&, int alpha, int beta) {
        static const double m[2][2][2] = {{{2.0, 0.5}, {0.5, 2.0}}, {{1.5, 1.0}, {1.0, 1.5}}};
        Mat s = Mat::Zero(2, 2);
        s(0, 0) = std::sqrt(m[beta][alpha][0] + 0.25);
        s(1, 1) = std::sqrt(m[beta][alpha][1] + 0.25);
        return s;
    };
    g.tau = [](const Vec&, int, int) { return Mat(0.5 * Mat::Identity(2, 2)); };
    return g;
}

inline ProblemSpec game(double lambda = 1.0, ScalarField f = {}) {
    ProblemSpec p;
    p.name = "game";
    p.dim = 2;
    p.lambda = lambda;
    p.op = laplacian(2);
    p.H = game_hamiltonian();
    p.q = 2.0;
    p.f = f ? std::move(f) : constant_field(0.0);
    p.C0 = 2.25;
    return p;
}

/// u(x) = a x^2 + d in 1D.
inline SmoothCandidate quadratic(std::string name, double a, double d) {
    return make_candidate(
        std::move(name), [a, d](const Vec& x) { return a * x[0] * x[0] + d; },
        [a](const Vec& x) { return Vec(Vec::Constant(1, 2.0 * a * x[0])); },
        [a](const Vec&) { return Mat(Mat::Constant(1, 1, 2.0 * a)); });
}

inline SmoothCandidate zero(int dim = 1) {
    return make_candidate(
        "u1", [](const Vec&) { return 0.0; }, [dim](const Vec&) { return Vec(Vec::Zero(dim)); },
        [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); });
}

/// u2(x) = -(lambda/4) x^2 - 1/2 for eq12.
inline SmoothCandidate eq12_u2(double lambda = 1.0) { return quadratic("u2", -lambda / 4.0, -0.5); }

/// u2(x) = -c x^2 - 2c/lambda, c = (lambda + 2t)/4, for hje3.
inline SmoothCandidate hje3_u2(double lambda = 1.0, double t = 1.0) {
    const double c = (lambda + 2.0 * t) / 4.0;
    return quadratic("u2", -c, -2.0 * c / lambda);
}

/// v2(x) = 1/2 + x^2/4 for ex2.
inline SmoothCandidate ex2_v2() { return quadratic("v2", 0.25, 0.5); }

}  // namespace viscompare::builtins
