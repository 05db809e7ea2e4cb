#pragma once

#include "viscompare/growth.hpp"
#include "viscompare/hamiltonian.hpp"
#include "viscompare/modulus.hpp"
#include "viscompare/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace viscompare {

/// F(x, xi, X) = -Tr(sigma(x) sigma(x)^T X) + <b(x), xi>
struct DriftDiffusionOperator {
    int dim = 1;
    MatrixField sigma;
    VectorField b;

    Mat diffusion(const Vec& x) const {
        const Mat s = evaluate_at(sigma, x);
        return s * s.transpose();
    }
};

/// P(x, X) = -Tr(sigma0 sigma0^T X) together with the drift bound b0(x) |xi|.
struct ExtremalOperator {
    MatrixField sigma0;
    ScalarField b0;
};

/// A black-box F(x, xi, X); only homogeneity sampling applies to it.
struct GeneralOperator {
    std::function<double(const Vec&, const Vec&, const Mat&)> F;
};

inline void check_dims(const DriftDiffusionOperator& op, const Vec& x, const Vec& xi, const Mat& X) {
    const auto n = static_cast<Eigen::Index>(op.dim);
    if (x.size() != n || xi.size() != n || X.rows() != n || X.cols() != n)
        throw std::invalid_argument("operator: dimension mismatch (expected N = " + std::to_string(op.dim) + ")");
}

inline double eval_F(const DriftDiffusionOperator& op, const Vec& x, const Vec& xi, const Mat& X) {
    check_dims(op, x, xi, X);
    return -(op.diffusion(x).cwiseProduct(X)).sum() + evaluate_at(op.b, x).dot(xi);
}

inline double eval_P(const ExtremalOperator& ext, const Vec& x, const Mat& X) {
    const Mat s = evaluate_at(ext.sigma0, x);
    if (s.rows() != X.rows() || X.rows() != X.cols() || x.size() != X.rows())
        throw std::invalid_argument("eval_P: dimension mismatch");
    return -((s * s.transpose()).cwiseProduct(X)).sum();
}

/// sigma0 := sigma and b0 := |b|, the tightest choice for the model form.
inline ExtremalOperator canonical_extremal(const DriftDiffusionOperator& op) {
    return {op.sigma, [b = op.b](const Vec& x) { return evaluate_at(b, x).norm(); }};
}

// ---------------------------------------------------------------------------

namespace detail {

inline Mat random_symmetric(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    return 0.5 * (m + m.transpose());
}

inline Mat random_psd(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    Mat b(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b(i, j) = g(rng);
    return b * b.transpose();
}

}  // namespace detail

struct EllipticityReport {
    bool passed = true;
    double worst_increase = -std::numeric_limits<double>::infinity();  // max of F(X) - F(Y) with X >= Y
    Vec witness_x;
    int samples = 0;
};

/// F(x, xi, X) <= F(x, xi, Y) whenever X = Y + (PSD increment).
template <class Evaluator>
EllipticityReport check_degenerate_ellipticity_fn(const Evaluator& F, int dim, const std::vector<Vec>& x_samples,
                                                  int per_point = 10, unsigned seed = 11, double tol = 1e-10) {
    EllipticityReport rep;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (const Vec& x : x_samples) {
        for (int k = 0; k < per_point; ++k) {
            Vec xi(dim);
            for (int i = 0; i < dim; ++i) xi[i] = g(rng);
            const Mat Y = detail::random_symmetric(rng, dim, 1.0);
            const Mat X = Y + detail::random_psd(rng, dim, 1.0);
            const double fx = F(x, xi, X), fy = F(x, xi, Y);
            const double inc = fx - fy;
            ++rep.samples;
            if (inc > rep.worst_increase) {
                rep.worst_increase = inc;
                rep.witness_x = x;
            }
            if (inc > tol * (1.0 + std::abs(fy))) rep.passed = false;
        }
    }
    return rep;
}

inline EllipticityReport check_degenerate_ellipticity(const DriftDiffusionOperator& op,
                                                      const std::vector<Vec>& x_samples, int per_point = 10,
                                                      unsigned seed = 11) {
    return check_degenerate_ellipticity_fn(
        [&](const Vec& x, const Vec& xi, const Mat& X) { return eval_F(op, x, xi, X); }, op.dim, x_samples,
        per_point, seed);
}

enum class GrowthMode { Strict, Relaxed };

struct F3F4Report {
    GrowthReport sigma0;
    GrowthReport b0;
    bool passed = false;
    std::string failed;  // empty when passed
};

/// Classifies |sigma0| (spectral norm) and b0 with r = 1: S_1 in strict mode, SG_1 in relaxed mode.
inline F3F4Report check_F3_F4_growth(const ExtremalOperator& ext, int dim, GrowthMode mode,
                                     const GrowthOptions& opts = {}) {
    F3F4Report rep;
    rep.sigma0 = classify_growth([&](const Vec& x) { return spectral_norm(evaluate_at(ext.sigma0, x)); }, dim,
                                 GrowthExponent(1.0), opts);
    rep.b0 = classify_growth(ext.b0, dim, GrowthExponent(1.0), opts);
    const bool s_ok = mode == GrowthMode::Strict ? rep.sigma0.in_S() : rep.sigma0.in_SG();
    const bool b_ok = mode == GrowthMode::Strict ? rep.b0.in_S() : rep.b0.in_SG();
    rep.passed = s_ok && b_ok;
    const char* cls = mode == GrowthMode::Strict ? "S_1" : "SG_1";
    if (!s_ok) rep.failed = std::string("|sigma0| not in ") + cls;
    else if (!b_ok) rep.failed = std::string("b0 not in ") + cls;
    return rep;
}

struct A1A3Report {
    bool passed = true;
    bool degenerate_on_gamma = true;
    Vec witness;  // first Gamma point where sigma0 or b0 does not vanish
    double lipschitz_sigma0 = 0.0;
    double lipschitz_b0 = 0.0;
    bool lipschitz_finite = true;
};

/// sigma0 = 0 and b0 = 0 on Gamma; sampled Lipschitz constants of sigma0, b0 on the window.
inline A1A3Report check_A1_A3(const ExtremalOperator& ext, const GammaPartition& gamma,
                              const std::vector<Vec>& lipschitz_window, double tol = 1e-10) {
    A1A3Report rep;
    for (const Vec& x : gamma.gamma_points) {
        const double s = evaluate_at(ext.sigma0, x).norm();
        const double b = std::abs(evaluate_at(ext.b0, x));
        if (s > tol || b > tol) {
            rep.degenerate_on_gamma = false;
            rep.witness = x;
            break;
        }
    }
    std::vector<Mat> sv;
    std::vector<double> bv;
    sv.reserve(lipschitz_window.size());
    bv.reserve(lipschitz_window.size());
    for (const Vec& x : lipschitz_window) {
        sv.push_back(evaluate_at(ext.sigma0, x));
        bv.push_back(evaluate_at(ext.b0, x));
    }
    for (std::size_t i = 0; i < lipschitz_window.size(); ++i) {
        for (std::size_t j = i + 1; j < lipschitz_window.size(); ++j) {
            const double d = (lipschitz_window[i] - lipschitz_window[j]).norm();
            if (d == 0.0) continue;
            rep.lipschitz_sigma0 = std::max(rep.lipschitz_sigma0, (sv[i] - sv[j]).norm() / d);
            rep.lipschitz_b0 = std::max(rep.lipschitz_b0, std::abs(bv[i] - bv[j]) / d);
        }
    }
    rep.lipschitz_finite = std::isfinite(rep.lipschitz_sigma0) && std::isfinite(rep.lipschitz_b0);
    rep.passed = rep.degenerate_on_gamma && rep.lipschitz_finite;
    return rep;
}

/// Whether (X, Y) satisfies
///   -(3/eps) I <= diag(X, -Y) <= (3/eps) [[I, -I], [-I, I]].
inline bool admissible_pair(const Mat& X, const Mat& Y, double eps, double tol = 1e-10) {
    const auto n = X.rows();
    const double c = 3.0 / eps;
    Mat block = Mat::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = X;
    block.bottomRightCorner(n, n) = -Y;
    Mat upper(2 * n, 2 * n);
    upper << Mat::Identity(n, n), -Mat::Identity(n, n), -Mat::Identity(n, n), Mat::Identity(n, n);
    upper *= c;
    return min_eigenvalue(block + c * Mat::Identity(2 * n, 2 * n)) >= -tol * c &&
           max_eigenvalue(block - upper) <= tol * c;
}

/// The quantity the structure condition bounds: F(y, p, Y) - F(x, p, X) with p = (x - y)/eps.
inline double structure_gap(const DriftDiffusionOperator& op, const Vec& x, const Vec& y, double eps, const Mat& X,
                            const Mat& Y) {
    const Vec p = (x - y) / eps;
    return eval_F(op, y, p, Y) - eval_F(op, x, p, X);
}

/// Empirical modulus m_R for the structure condition on B_R.
///
/// For each (x, y, eps) the matrix pairs are diagonal with entries on the
/// boundary curve t = c s / (c - s), c = 3/eps, of the admissible set, where
/// the diffusion part of the gap is largest; the table is indexed by
/// |x - y| + |x - y|^2 / eps.
inline ModulusTable check_F1_standard_form(const DriftDiffusionOperator& op, double R,
                                           const std::vector<double>& eps_list, const std::vector<ModulusPair>& pairs,
                                           int matrices_per_pair = 16, int bins = 8, unsigned seed = 13,
                                           double tol = 1e-10) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ModulusSample> samples;
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
    const int n = op.dim;
    for (const auto& pr : pairs) {
        if (pr.x.norm() > R || pr.y.norm() > R) throw std::invalid_argument("check_F1_standard_form: pair outside B_R");
        const double d = (pr.x - pr.y).norm();
        for (double eps : eps_list) {
            const double c = 3.0 / eps;
            const double rho = d + d * d / eps;
            double worst = 0.0;
            for (int k = 0; k < matrices_per_pair; ++k) {
                Mat X = Mat::Zero(n, n), Y = Mat::Zero(n, n);
                for (int i = 0; i < n; ++i) {
                    const double s = -c + 1.5 * c * u(rng);  // s in [-c, c/2]
                    X(i, i) = s;
                    Y(i, i) = c * s / (c - s);
                }
                worst = std::max(worst, structure_gap(op, pr.x, pr.y, eps, X, Y));
            }
            samples.push_back({rho, worst});
            rmin = std::min(rmin, rho);
            rmax = std::max(rmax, rho);
        }
    }
    if (samples.empty() || !(rmax > 0.0)) return build_modulus_table({}, 1.0, 2.0, bins, tol);
    return build_modulus_table(samples, rmin * 0.999, rmax * 1.001, bins, tol);
}

struct F2Report {
    bool passed = true;
    double max_abs_deviation = 0.0;
};

/// F(x, theta xi, theta X) = theta F(x, xi, X) on random samples.
template <class Evaluator>
F2Report check_F2_homogeneity(const Evaluator& F, int dim, const std::vector<Vec>& x_samples,
                              const std::vector<double>& thetas, unsigned seed = 17, double tol = 1e-12) {
    F2Report rep;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    for (const Vec& x : x_samples) {
        Vec xi(dim);
        for (int i = 0; i < dim; ++i) xi[i] = g(rng);
        const Mat X = detail::random_symmetric(rng, dim, 1.0);
        const double base = F(x, xi, X);
        for (double th : thetas) {
            const double dev = std::abs(F(x, th * xi, th * X) - th * base);
            rep.max_abs_deviation = std::max(rep.max_abs_deviation, dev);
            if (dev > tol * (1.0 + std::abs(th * base))) rep.passed = false;
        }
    }
    return rep;
}

}  // namespace viscompare
