#pragma once

#include "viscompare/growth.hpp"
#include "viscompare/modulus.hpp"
#include "viscompare/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace viscompare {

/// H(x, xi) = <A(x) xi, xi>^{q/2}
struct PowerHamiltonian {
    MatrixField A;
    double q = 2.0;
};

/// H(x, xi) = a(x) |xi|^q; convex where a > 0, concave where a < 0, zero on {a = 0}.
struct SignedScalarHamiltonian {
    ScalarField a;
    double q = 2.0;
};

/// Any q-homogeneous evaluator supplied as a closure.
struct CustomHamiltonian {
    std::function<double(const Vec&, const Vec&)> value;
    double q = 2.0;
    std::string name = "custom";
};

using ConvexPiece = std::variant<PowerHamiltonian, CustomHamiltonian>;

/// H(x, xi) = min_k H_k(x, xi) over convex pieces sharing the exponent q.
struct MinConvexHamiltonian {
    std::vector<ConvexPiece> components;
    double q = 2.0;
};

/// H(x, xi) = min_beta max_alpha ( |sigma^T xi|^2 - |tau^T xi|^2 ) over finite index sets.
struct GameHamiltonian {
    int alpha_count = 1;
    int beta_count = 1;
    std::function<Mat(const Vec&, int alpha, int beta)> sigma;
    std::function<Mat(const Vec&, int alpha, int beta)> tau;
};

using Hamiltonian =
    std::variant<PowerHamiltonian, SignedScalarHamiltonian, MinConvexHamiltonian, GameHamiltonian, CustomHamiltonian>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Structural homogeneity degree of H (the game form is quadratic).
inline double exponent(const Hamiltonian& h) {
    return std::visit(overloaded{[](const GameHamiltonian&) { return 2.0; }, [](const auto& v) { return v.q; }}, h);
}

inline double eval_power(const PowerHamiltonian& h, const Vec& x, const Vec& xi) {
    const Mat A = evaluate_at(h.A, x);
    const double s = xi.dot(A * xi);
    if (s >= 0.0) return std::pow(s, 0.5 * h.q);
    const double half = 0.5 * h.q;
    if (half == std::floor(half)) return std::pow(s, half);
    // Rounding noise on a PSD form is treated as zero.
    if (s >= -1e-14 * (1.0 + A.cwiseAbs().maxCoeff()) * xi.squaredNorm()) return 0.0;
    throw EvaluationError("power Hamiltonian: <A xi, xi> < 0 with non-integer q/2 (A not positive semidefinite)",
                          x);
}

inline double eval_piece(const ConvexPiece& p, const Vec& x, const Vec& xi) {
    return std::visit(overloaded{[&](const PowerHamiltonian& h) { return eval_power(h, x, xi); },
                                 [&](const CustomHamiltonian& h) { return h.value(x, xi); }},
                      p);
}

struct MinConvexValue {
    double value;
    int index;
};

inline MinConvexValue eval_min_convex(const MinConvexHamiltonian& h, const Vec& x, const Vec& xi) {
    if (h.components.empty()) throw std::invalid_argument("min-convex Hamiltonian has no components");
    MinConvexValue best{eval_piece(h.components[0], x, xi), 0};
    for (std::size_t k = 1; k < h.components.size(); ++k) {
        const double v = eval_piece(h.components[k], x, xi);
        if (v < best.value) best = {v, static_cast<int>(k)};  // lowest index wins ties
    }
    return best;
}

struct GameValue {
    double value;
    int beta;
    int alpha;
};

inline double game_payoff(const GameHamiltonian& g, const Vec& x, const Vec& xi, int alpha, int beta) {
    const Mat s = g.sigma(x, alpha, beta);
    const Mat t = g.tau(x, alpha, beta);
    return (s.transpose() * xi).squaredNorm() - (t.transpose() * xi).squaredNorm();
}

/// min over beta of max over alpha, lowest index on ties, with the saddle witness.
inline GameValue eval_game(const GameHamiltonian& g, const Vec& x, const Vec& xi) {
    if (g.alpha_count < 1 || g.beta_count < 1) throw std::invalid_argument("game Hamiltonian: empty index set");
    GameValue best{std::numeric_limits<double>::infinity(), -1, -1};
    for (int b = 0; b < g.beta_count; ++b) {
        double inner = -std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int a = 0; a < g.alpha_count; ++a) {
            const double v = game_payoff(g, x, xi, a, b);
            if (v > inner) {
                inner = v;
                arg = a;
            }
        }
        if (inner < best.value) best = {inner, b, arg};
    }
    return best;
}

inline double eval(const Hamiltonian& h, const Vec& x, const Vec& xi) {
    return std::visit(overloaded{[&](const PowerHamiltonian& p) { return eval_power(p, x, xi); },
                                 [&](const SignedScalarHamiltonian& s) {
                                     return evaluate_at(s.a, x) * std::pow(xi.norm(), s.q);
                                 },
                                 [&](const MinConvexHamiltonian& m) { return eval_min_convex(m, x, xi).value; },
                                 [&](const GameHamiltonian& g) { return eval_game(g, x, xi).value; },
                                 [&](const CustomHamiltonian& c) { return c.value(x, xi); }},
                      h);
}

namespace detail {

inline Vec fd_gradient_xi(const std::function<double(const Vec&)>& f, const Vec& xi) {
    Vec g(xi.size());
    const double step = 1e-6 * (1.0 + xi.norm());
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        Vec p = xi, m = xi;
        p[i] += step;
        m[i] -= step;
        g[i] = (f(p) - f(m)) / (2.0 * step);
    }
    return g;
}

inline Vec power_gradient(const PowerHamiltonian& h, const Vec& x, const Vec& xi) {
    const Mat A = evaluate_at(h.A, x);
    const double s = xi.dot(A * xi);
    if (xi.squaredNorm() == 0.0 || s <= 0.0) return Vec::Zero(xi.size());
    return 0.5 * h.q * std::pow(s, 0.5 * h.q - 1.0) * (A + A.transpose()) * xi;
}

inline Vec piece_gradient(const ConvexPiece& p, const Vec& x, const Vec& xi) {
    return std::visit(overloaded{[&](const PowerHamiltonian& h) { return power_gradient(h, x, xi); },
                                 [&](const CustomHamiltonian& h) {
                                     return fd_gradient_xi([&](const Vec& z) { return h.value(x, z); }, xi);
                                 }},
                      p);
}

}  // namespace detail

/// D_xi H(x, xi); for min/min-max forms, the gradient of the active piece.
inline Vec grad_xi(const Hamiltonian& h, const Vec& x, const Vec& xi) {
    return std::visit(
        overloaded{[&](const PowerHamiltonian& p) { return detail::power_gradient(p, x, xi); },
                   [&](const SignedScalarHamiltonian& s) -> Vec {
                       const double n = xi.norm();
                       if (n == 0.0) return Vec::Zero(xi.size());
                       return s.q * evaluate_at(s.a, x) * std::pow(n, s.q - 2.0) * xi;
                   },
                   [&](const MinConvexHamiltonian& m) {
                       const auto w = eval_min_convex(m, x, xi);
                       return detail::piece_gradient(m.components[static_cast<std::size_t>(w.index)], x, xi);
                   },
                   [&](const GameHamiltonian& g) -> Vec {
                       const auto w = eval_game(g, x, xi);
                       const Mat s = g.sigma(x, w.alpha, w.beta);
                       const Mat t = g.tau(x, w.alpha, w.beta);
                       return 2.0 * (s * s.transpose() - t * t.transpose()) * xi;
                   },
                   [&](const CustomHamiltonian& c) {
                       return detail::fd_gradient_xi([&](const Vec& z) { return c.value(x, z); }, xi);
                   }},
        h);
}

// ---------------------------------------------------------------------------
// Hypothesis checkers
// ---------------------------------------------------------------------------

struct ConvexityReport {
    bool passed = true;
    double worst_violation = 0.0;  // max of H(mid) - interpolated value
    Vec witness_x, witness_xi1, witness_xi2;
    double witness_t = 0.0;
    int samples = 0;
};

/// Midpoint-type convexity test of xi -> H(x, xi) on the given samples.
inline ConvexityReport check_H1_convexity(const Hamiltonian& h, const std::vector<Vec>& x_samples,
                                          const std::vector<std::pair<Vec, Vec>>& xi_pairs,
                                          const std::vector<double>& t_samples, double tol = 1e-10) {
    ConvexityReport rep;
    rep.worst_violation = -std::numeric_limits<double>::infinity();
    for (double t : t_samples)
        if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("check_H1_convexity: t must lie in (0,1)");
    for (const Vec& x : x_samples) {
        for (const auto& [a, b] : xi_pairs) {
            const double ha = eval(h, x, a), hb = eval(h, x, b);
            for (double t : t_samples) {
                const double chord = t * ha + (1.0 - t) * hb;
                const double mid = eval(h, x, t * a + (1.0 - t) * b);
                const double viol = mid - chord;
                ++rep.samples;
                if (viol > rep.worst_violation) {
                    rep.worst_violation = viol;
                    rep.witness_x = x;
                    rep.witness_xi1 = a;
                    rep.witness_xi2 = b;
                    rep.witness_t = t;
                }
                if (viol > tol * (1.0 + std::abs(chord))) rep.passed = false;
            }
        }
    }
    if (rep.samples == 0) rep.worst_violation = 0.0;
    return rep;
}

struct BoundsReport {
    bool passed = true;
    double worst_lower_slack = std::numeric_limits<double>::infinity();  // min of H - delta |xi|^q
    double worst_upper_slack = std::numeric_limits<double>::infinity();  // min of C0 |xi|^q - H
    Vec lower_witness_x, lower_witness_xi;
    Vec upper_witness_x, upper_witness_xi;
};

/// delta(x)|xi|^q <= H(x, xi) <= C0 |xi|^q on (x, xi) samples.
inline BoundsReport check_H2_bounds(const Hamiltonian& h, const ScalarField& delta, double C0,
                                    const std::vector<std::pair<Vec, Vec>>& samples, double tol = 1e-10) {
    BoundsReport rep;
    const double q = exponent(h);
    for (const auto& [x, xi] : samples) {
        const double d = evaluate_at(delta, x);
        if (!(d > 0.0)) throw std::invalid_argument("check_H2_bounds: delta must be positive at " + format_point(x));
        const double nq = std::pow(xi.norm(), q);
        const double v = eval(h, x, xi);
        const double lo = v - d * nq, hi = C0 * nq - v;
        if (lo < rep.worst_lower_slack) {
            rep.worst_lower_slack = lo;
            rep.lower_witness_x = x;
            rep.lower_witness_xi = xi;
        }
        if (hi < rep.worst_upper_slack) {
            rep.worst_upper_slack = hi;
            rep.upper_witness_x = x;
            rep.upper_witness_xi = xi;
        }
        const double scale = tol * (1.0 + std::abs(v));
        if (lo < -scale || hi < -scale) rep.passed = false;
    }
    return rep;
}

struct HomogeneityReport {
    bool passed = true;
    double max_rel_deviation = 0.0;
    Vec witness_x, witness_xi;
    double witness_theta = 0.0;
};

/// max relative deviation of H(x, theta xi) from theta^q H(x, xi).
inline HomogeneityReport check_H3_homogeneity(const Hamiltonian& h, const std::vector<std::pair<Vec, Vec>>& samples,
                                              const std::vector<double>& thetas, double tol = 1e-12) {
    HomogeneityReport rep;
    const double q = exponent(h);
    for (double th : thetas)
        if (!(th >= 0.0)) throw std::invalid_argument("check_H3_homogeneity: theta must be nonnegative");
    for (const auto& [x, xi] : samples) {
        const double base = eval(h, x, xi);
        for (double th : thetas) {
            const double lhs = eval(h, x, th * xi);
            const double rhs = std::pow(th, q) * base;
            const double scale = std::max({std::abs(lhs), std::abs(rhs), std::numeric_limits<double>::min()});
            const double dev = (lhs == rhs) ? 0.0 : std::abs(lhs - rhs) / scale;
            if (dev > rep.max_rel_deviation) {
                rep.max_rel_deviation = dev;
                rep.witness_x = x;
                rep.witness_xi = xi;
                rep.witness_theta = th;
            }
        }
    }
    rep.passed = rep.max_rel_deviation <= tol;
    return rep;
}

struct ModulusPair {
    Vec x, y, xi;
};

/// Pairs (x, y) in B_R whose distances cover [d_min, 2R) log-uniformly, with random xi.
inline std::vector<ModulusPair> make_modulus_pairs(int dim, double R, int count, unsigned seed = 7,
                                                   double d_min = 1e-4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> logd(std::log(d_min * R), std::log(2.0 * R));
    std::vector<ModulusPair> out;
    out.reserve(static_cast<std::size_t>(count));
    auto random_in_ball = [&](double radius) {
        Vec v(dim);
        do {
            for (int i = 0; i < dim; ++i) v[i] = u(rng);
        } while (v.squaredNorm() > 1.0);
        return (radius * v).eval();
    };
    auto random_unit = [&] {
        Vec v(dim);
        do {
            for (int i = 0; i < dim; ++i) v[i] = u(rng);
        } while (v.squaredNorm() < 1e-6 || v.squaredNorm() > 1.0);
        return (v / v.norm()).eval();
    };
    int guard = 0;
    while (static_cast<int>(out.size()) < count && guard++ < 100 * count) {
        const Vec x = random_in_ball(R);
        const double d = std::exp(logd(rng));
        const Vec y = x + d * random_unit();
        if (y.norm() >= R) continue;
        out.push_back({x, y, random_unit() * (0.5 + 0.5 * (u(rng) + 1.0))});
    }
    return out;
}

/// Tabulates sup |H(x,xi) - H(y,xi)| / |xi|^q against |x - y|.
inline ModulusTable check_H4_modulus(const Hamiltonian& h, double R, const std::vector<ModulusPair>& pairs,
                                     int bins = 8, double tol = 1e-12) {
    const double q = exponent(h);
    std::vector<ModulusSample> s;
    s.reserve(pairs.size());
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (const auto& p : pairs) {
        if (p.x.norm() > R || p.y.norm() > R)
            throw std::invalid_argument("check_H4_modulus: sample outside B_R");
        const double n = p.xi.norm();
        if (n == 0.0) throw std::invalid_argument("check_H4_modulus: xi must be nonzero");
        const double d = (p.x - p.y).norm();
        s.push_back({d, std::abs(eval(h, p.x, p.xi) - eval(h, p.y, p.xi)) / std::pow(n, q)});
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if (s.empty() || !(dmax > 0.0)) return build_modulus_table({}, 1.0, 2.0, bins, tol);
    return build_modulus_table(s, std::max(dmin, 1e-300) * 0.999, dmax * 1.001, bins, tol);
}

struct H2PrimeWitness {
    Vec x;
    std::vector<int> alpha_for_beta;  // -1 where no alpha achieves S - T >= delta I
    int beta_x = -1;                  // -1 where no beta bounds |S| by C0
};

struct H2PrimeReport {
    bool passed = true;
    bool condition_ii = true;
    bool condition_iii = true;
    std::vector<H2PrimeWitness> witnesses;
    std::string failure;
};

/// For every x and beta: some alpha with lambda_min(S - T) >= delta(x);
/// for every x: some beta with max_alpha |S| <= C0.
inline H2PrimeReport check_H2prime(const GameHamiltonian& g, const ScalarField& delta, double C0,
                                   const std::vector<Vec>& x_samples, double tol = 1e-12) {
    if (g.alpha_count < 1 || g.beta_count < 1) throw std::invalid_argument("check_H2prime: empty index set");
    H2PrimeReport rep;
    for (const Vec& x : x_samples) {
        H2PrimeWitness w;
        w.x = x;
        const double d = evaluate_at(delta, x);
        if (!(d > 0.0)) {
            rep.passed = false;
            if (rep.failure.empty()) rep.failure = "(i) delta not positive at " + format_point(x);
        }
        for (int b = 0; b < g.beta_count; ++b) {
            int found = -1;
            for (int a = 0; a < g.alpha_count && found < 0; ++a) {
                const Mat s = g.sigma(x, a, b), t = g.tau(x, a, b);
                if (min_eigenvalue(s * s.transpose() - t * t.transpose()) >= d - tol) found = a;
            }
            w.alpha_for_beta.push_back(found);
            if (found < 0) {
                rep.condition_ii = false;
                if (rep.failure.empty())
                    rep.failure = "(ii) no alpha with S - T >= delta I for beta " + std::to_string(b) + " at " +
                                  format_point(x);
            }
        }
        for (int b = 0; b < g.beta_count && w.beta_x < 0; ++b) {
            double worst = 0.0;
            for (int a = 0; a < g.alpha_count; ++a) {
                const Mat s = g.sigma(x, a, b);
                worst = std::max(worst, spectral_norm_symmetric(s * s.transpose()));
            }
            if (worst <= C0 + tol) w.beta_x = b;
        }
        if (w.beta_x < 0) {
            rep.condition_iii = false;
            if (rep.failure.empty()) rep.failure = "(iii) no beta with sup_alpha |S| <= C0 at " + format_point(x);
        }
        rep.witnesses.push_back(std::move(w));
    }
    rep.passed = rep.passed && rep.condition_ii && rep.condition_iii;
    return rep;
}

/// Zero set and sign regions of a(x) on a sample grid.
struct GammaPartition {
    std::vector<Vec> gamma_points;
    std::vector<Vec> omega_plus;
    std::vector<Vec> omega_minus;
    std::vector<std::size_t> gamma_indices, plus_indices, minus_indices;
    /// 1D only: zeros of a located by bisection between consecutive grid points of opposite sign.
    std::vector<double> bracketed_zeros;
    double tol = 0.0;
};

/// Partitions the grid by the sign of a; |a| <= tol goes to Gamma.
/// A negative tol selects the default 1e-10 (1 + max |a| on the grid).
inline GammaPartition compute_gamma(const SignedScalarHamiltonian& h, const std::vector<Vec>& grid,
                                    double tol = -1.0) {
    if (grid.empty()) throw std::invalid_argument("compute_gamma: empty grid");
    std::vector<double> a(grid.size());
    double amax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        a[i] = evaluate_at(h.a, grid[i]);
        amax = std::max(amax, std::abs(a[i]));
    }
    GammaPartition p;
    p.tol = tol < 0.0 ? 1e-10 * (1.0 + amax) : tol;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(a[i]) <= p.tol) {
            p.gamma_points.push_back(grid[i]);
            p.gamma_indices.push_back(i);
        } else if (a[i] > 0.0) {
            p.omega_plus.push_back(grid[i]);
            p.plus_indices.push_back(i);
        } else {
            p.omega_minus.push_back(grid[i]);
            p.minus_indices.push_back(i);
        }
    }
    if (grid.front().size() == 1) {
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            if (std::abs(a[i]) <= p.tol || std::abs(a[i + 1]) <= p.tol) continue;
            if ((a[i] > 0.0) == (a[i + 1] > 0.0)) continue;
            double lo = grid[i][0], hi = grid[i + 1][0], flo = a[i];
            for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * (1.0 + std::abs(lo)); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = h.a(Vec::Constant(1, mid));
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            p.bracketed_zeros.push_back(0.5 * (lo + hi));
        }
    }
    return p;
}

struct A4Report {
    bool passed = true;
    bool unbounded = false;
    double C1_estimate = 0.0;  // smallest constant feasible on the samples
    Vec witness_x, witness_center;
};

/// |H(x, xi)| <= C1 |x - x0|^q |xi|^q for x in B_r(x0), x0 in Gamma.
inline A4Report check_A4(const Hamiltonian& h, const std::vector<Vec>& gamma_points, double r, double C1_candidate,
                         int shells = 24, int directions = 16, double tol = 1e-9) {
    A4Report rep;
    const double q = exponent(h);
    for (const Vec& x0 : gamma_points) {
        const int dim = static_cast<int>(x0.size());
        const auto dirs = sphere_directions(dim, directions);
        double ratio_outer = 0.0, ratio_inner = 0.0;
        for (int s = 0; s < shells; ++s) {
            const double d = r * std::pow(1e-6, static_cast<double>(s) / (shells - 1));
            double shell_max = 0.0;
            for (const Vec& u : dirs) {
                const Vec x = x0 + d * u;
                for (const Vec& xi : dirs) {
                    const double ratio = std::abs(eval(h, x, xi)) / std::pow(d, q);
                    shell_max = std::max(shell_max, ratio);
                    if (ratio > rep.C1_estimate) {
                        rep.C1_estimate = ratio;
                        rep.witness_x = x;
                        rep.witness_center = x0;
                    }
                }
            }
            if (s == 0) ratio_outer = shell_max;
            if (s == shells - 1) ratio_inner = shell_max;
        }
        if (ratio_inner > 10.0 * ratio_outer + tol) rep.unbounded = true;
    }
    rep.passed = !rep.unbounded && rep.C1_estimate <= C1_candidate * (1.0 + tol) + tol;
    return rep;
}

/// min over the window of lambda_min(A(x))^{q/2}, a candidate delta for a power Hamiltonian.
inline double estimate_delta(const PowerHamiltonian& h, const std::vector<Vec>& window) {
    double d = std::numeric_limits<double>::infinity();
    for (const Vec& x : window) d = std::min(d, std::pow(std::max(min_eigenvalue(evaluate_at(h.A, x)), 0.0), 0.5 * h.q));
    return d;
}

/// max over window points and unit directions of H(x, xi), a candidate C0.
inline double estimate_C0(const Hamiltonian& h, int dim, const std::vector<Vec>& window, int directions = 64) {
    double c = 0.0;
    if (const auto* p = std::get_if<PowerHamiltonian>(&h)) {
        for (const Vec& x : window) c = std::max(c, std::pow(std::max(max_eigenvalue(evaluate_at(p->A, x)), 0.0), 0.5 * p->q));
        return c;
    }
    const auto dirs = sphere_directions(dim, directions);
    for (const Vec& x : window)
        for (const Vec& xi : dirs) c = std::max(c, eval(h, x, xi));
    return c;
}

}  // namespace viscompare
