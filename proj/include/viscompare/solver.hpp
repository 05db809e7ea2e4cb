#pragma once

#include "viscompare/barrier.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/growth.hpp"
#include "viscompare/hamiltonian.hpp"
#include "viscompare/problem.hpp"
#include "viscompare/types.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace viscompare {

/// Axis-aligned truncation box, N in {1, 2}.
struct Box {
    Vec center;
    Vec half_width;

    Box() = default;
    Box(Vec c, Vec hw) : center(std::move(c)), half_width(std::move(hw)) {
        if (center.size() != half_width.size() || center.size() < 1 || center.size() > 2)
            throw std::invalid_argument("Box: dimension must be 1 or 2");
        if ((half_width.array() <= 0.0).any()) throw std::invalid_argument("Box: half_width must be positive");
    }

    static Box interval(double a, double b) {
        return {Vec::Constant(1, 0.5 * (a + b)), Vec::Constant(1, 0.5 * (b - a))};
    }
    static Box square(double half, double cx = 0.0, double cy = 0.0) {
        Vec c(2);
        c << cx, cy;
        return {c, Vec::Constant(2, half)};
    }

    int dim() const { return static_cast<int>(center.size()); }
};

/// Uniform tensor grid with an odd number of nodes per axis; x-index runs fastest.
struct Grid {
    int dim = 1;
    std::array<int, 2> n{1, 1};
    double h = 0.0;
    Vec lower;

    std::size_t size() const { return static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]); }
    std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i + n[0] * j); }
    std::array<int, 2> coords(std::size_t idx) const {
        const int i = static_cast<int>(idx % static_cast<std::size_t>(n[0]));
        return {i, static_cast<int>(idx / static_cast<std::size_t>(n[0]))};
    }
    Vec node(std::size_t idx) const {
        const auto c = coords(idx);
        Vec x(dim);
        for (int k = 0; k < dim; ++k) x[k] = lower[k] + h * c[static_cast<std::size_t>(k)];
        return x;
    }
    bool on_boundary(std::size_t idx) const {
        const auto c = coords(idx);
        for (int k = 0; k < dim; ++k) {
            const int ck = c[static_cast<std::size_t>(k)];
            if (ck == 0 || ck == n[static_cast<std::size_t>(k)] - 1) return true;
        }
        return false;
    }
    std::size_t center_index() const { return index(n[0] / 2, n[1] / 2); }
    std::ptrdiff_t stride(int axis) const { return axis == 0 ? 1 : n[0]; }
    /// Index of the node closest to x.
    std::size_t nearest(const Vec& x) const {
        std::array<int, 2> c{0, 0};
        for (int k = 0; k < dim; ++k) {
            const int m = n[static_cast<std::size_t>(k)];
            c[static_cast<std::size_t>(k)] =
                std::clamp(static_cast<int>(std::lround((x[k] - lower[k]) / h)), 0, m - 1);
        }
        return index(c[0], c[1]);
    }
};

/// Requires 2 half_width / h to be an even integer on every axis, so the center is a node.
inline Grid make_grid(const Box& box, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("make_grid: h must be positive");
    Grid g;
    g.dim = box.dim();
    g.h = h;
    g.lower = box.center - box.half_width;
    for (int k = 0; k < g.dim; ++k) {
        const double m = 2.0 * box.half_width[k] / h;
        const long mi = std::lround(m);
        if (std::abs(m - static_cast<double>(mi)) > 1e-9 * std::max(1.0, m) || mi < 2 || mi % 2 != 0)
            throw std::invalid_argument("make_grid: box width must be an even multiple of h on every axis");
        g.n[static_cast<std::size_t>(k)] = static_cast<int>(mi) + 1;
    }
    return g;
}

enum class BoundaryMode { ExplicitFunction, BarrierCap, CandidateTrace };

inline const char* to_string(BoundaryMode m) {
    switch (m) {
        case BoundaryMode::ExplicitFunction: return "explicit";
        case BoundaryMode::BarrierCap: return "barrier";
        case BoundaryMode::CandidateTrace: return "trace";
    }
    return "explicit";
}

struct BoundaryCondition {
    BoundaryMode mode = BoundaryMode::ExplicitFunction;
    ScalarField g;
    std::string label;
};

inline BoundaryCondition explicit_boundary(ScalarField g, std::string label = "g") {
    return {BoundaryMode::ExplicitFunction, std::move(g), std::move(label)};
}

inline BoundaryCondition trace_boundary(const SmoothCandidate& c) {
    return {BoundaryMode::CandidateTrace, c.value, c.name};
}

inline BoundaryCondition barrier_boundary(const BarrierParams& params) {
    return {BoundaryMode::BarrierCap, [params](const Vec& x) { return eval_barrier(params, x).value; }, "Phi"};
}

struct DiscreteField {
    Grid grid;
    std::vector<double> values;
    BoundaryMode boundary_mode = BoundaryMode::ExplicitFunction;

    double h() const { return grid.h; }
    Vec node(std::size_t i) const { return grid.node(i); }
    double at_center() const { return values[grid.center_index()]; }
};

struct SchemeConfig {
    std::vector<double> lf_floor;  // per axis lower bound for the Lax-Friedrichs coefficient
    std::vector<double> lf_fixed;  // per axis; empty selects automatic tuning
    double lf_safety = 1.2;
    double damping = 0.0;  // smallest Newton step; 0 selects 0.5 with a Hamiltonian and 1 without
    int max_iters = 100;
    int max_outer = 40;
    double tol_residual = 1e-9;
    bool policy_iteration = true;
};

struct SolveReport {
    bool success = false;
    int iterations = 0;
    int outer_iterations = 0;
    int policy_iterations = 0;
    double final_residual_norm = std::numeric_limits<double>::infinity();
    std::vector<double> residual_history;
    std::vector<double> policy_residual_history;
    bool monotonicity_certificate = false;
    std::vector<double> lf;
    std::vector<double> lf_required;
    double wall_time = 0.0;
    std::string diagnostic;
};

struct SolveResult {
    DiscreteField field;
    SolveReport report;
};

/// Nodal coefficients of the scheme
///   lambda U - sum_k d_k D2_k U - c D2_diag U + upwind(b . DU) + H(x, Dc U) - sum_k lf_k h/2 D2_k U = f.
struct DiscreteOperator {
    ProblemSpec problem;
    Grid grid;
    double lambda = 1.0;
    std::vector<Vec> nodes;
    std::vector<double> f;
    std::vector<std::array<double, 2>> diffusion_axis;  // a_kk - |a_12|
    std::vector<double> diffusion_cross;                // a_12
    std::vector<std::array<double, 2>> drift;
};

inline DiscreteOperator discretize_grid(const ProblemSpec& problem, const Grid& grid) {
    if (problem.dim != grid.dim) throw std::invalid_argument("discretize: problem and box dimensions differ");
    DiscreteOperator op;
    op.problem = problem;
    op.grid = grid;
    op.lambda = problem.lambda;
    const std::size_t n = grid.size();
    op.nodes.reserve(n);
    op.f.resize(n);
    op.diffusion_axis.assign(n, {0.0, 0.0});
    op.diffusion_cross.assign(n, 0.0);
    op.drift.assign(n, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) {
        const Vec x = grid.node(i);
        op.nodes.push_back(x);
        op.f[i] = evaluate_at(problem.f, x);
        const Mat a = problem.op.diffusion(x);
        const Vec b = evaluate_at(problem.op.b, x);
        const double scale = 1e-12 * (1.0 + a.cwiseAbs().maxCoeff());
        const double cross = grid.dim == 2 ? 0.5 * (a(0, 1) + a(1, 0)) : 0.0;
        for (int k = 0; k < grid.dim; ++k) {
            const double d = a(k, k) - std::abs(cross);
            if (d < -scale)
                throw DiscretizationError(grid.dim == 1 ? "negative diffusion coefficient"
                                                        : "diffusion not diagonally dominant; no monotone stencil",
                                          x, 0.0);
            op.diffusion_axis[i][static_cast<std::size_t>(k)] = std::max(d, 0.0);
            op.drift[i][static_cast<std::size_t>(k)] = b[k];
        }
        op.diffusion_cross[i] = std::abs(cross) <= scale ? 0.0 : cross;
    }
    return op;
}

inline DiscreteOperator discretize(const ProblemSpec& problem, const Box& box, double h) {
    return discretize_grid(problem, make_grid(box, h));
}

namespace detail {

struct RowEntry {
    std::size_t col;
    double value;
};

// Frozen (alpha, beta) per node and the payoff matrix S - T there.
struct Policy {
    std::vector<int> alpha;
    std::vector<int> beta;
    std::vector<Mat> M;
};

inline const GameHamiltonian* as_game(const ProblemSpec& p) {
    return p.H ? std::get_if<GameHamiltonian>(&*p.H) : nullptr;
}

inline Policy make_policy(const DiscreteOperator& op, const std::vector<double>& u) {
    const auto* g = as_game(op.problem);
    Policy pol;
    const std::size_t n = op.grid.size();
    pol.alpha.assign(n, -1);
    pol.beta.assign(n, -1);
    pol.M.assign(n, Mat());
    const double h = op.grid.h;
    for (std::size_t i = 0; i < n; ++i) {
        if (op.grid.on_boundary(i)) continue;
        Vec xi(op.grid.dim);
        for (int k = 0; k < op.grid.dim; ++k) {
            const auto s = op.grid.stride(k);
            xi[k] = (u[i + static_cast<std::size_t>(s)] - u[i - static_cast<std::size_t>(s)]) / (2.0 * h);
        }
        const auto w = eval_game(*g, op.nodes[i], xi);
        pol.alpha[i] = w.alpha;
        pol.beta[i] = w.beta;
        const Mat s = g->sigma(op.nodes[i], w.alpha, w.beta), t = g->tau(op.nodes[i], w.alpha, w.beta);
        pol.M[i] = s * s.transpose() - t * t.transpose();
    }
    return pol;
}

// Per-axis |dH/dxi| bound at one gradient: all pieces of a min-convex H and all
// index pairs of a game count, so the bound holds for whichever piece is active.
inline Vec hp_bound(const Hamiltonian& H, const Vec& x, const Vec& xi) {
    return std::visit(overloaded{[&](const MinConvexHamiltonian& m) {
                                     Vec out = Vec::Zero(xi.size());
                                     for (const auto& piece : m.components)
                                         out = out.cwiseMax(piece_gradient(piece, x, xi).cwiseAbs());
                                     return out;
                                 },
                                 [&](const GameHamiltonian& g) {
                                     Vec out = Vec::Zero(xi.size());
                                     for (int b = 0; b < g.beta_count; ++b)
                                         for (int a = 0; a < g.alpha_count; ++a) {
                                             const Mat s = g.sigma(x, a, b), t = g.tau(x, a, b);
                                             const Vec p = 2.0 * (s * s.transpose() - t * t.transpose()) * xi;
                                             out = out.cwiseMax(p.cwiseAbs());
                                         }
                                     return out;
                                 },
                                 [&](const auto&) { return Vec(grad_xi(H, x, xi).cwiseAbs()); }},
                      H);
}

// Interior-node residual; appends Jacobian entries when row != nullptr.
inline double node_residual(const DiscreteOperator& op, const std::vector<double>& u, std::size_t i,
                            const std::vector<double>& lf, const Policy* pol, std::vector<RowEntry>* row) {
    const Grid& g = op.grid;
    const double h = g.h, h2 = h * h;
    const double u0 = u[i];
    double r = op.lambda * u0 - op.f[i];
    double diag = op.lambda;
    std::array<std::size_t, 2> up{}, dn{};
    std::array<double, 2> cup{0.0, 0.0}, cdn{0.0, 0.0};
    Vec xi(g.dim);
    for (int k = 0; k < g.dim; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const auto s = static_cast<std::size_t>(g.stride(k));
        up[ks] = i + s;
        dn[ks] = i - s;
        const double uu = u[up[ks]], ud = u[dn[ks]];
        const double d = op.diffusion_axis[i][ks];
        const double L = lf.empty() ? 0.0 : lf[ks];
        const double second = uu - 2.0 * u0 + ud;
        r -= (d / h2 + L / (2.0 * h)) * second;
        cup[ks] -= d / h2 + L / (2.0 * h);
        cdn[ks] -= d / h2 + L / (2.0 * h);
        diag += 2.0 * d / h2 + L / h;
        const double b = op.drift[i][ks];
        if (b > 0.0) {
            r += b * (u0 - ud) / h;
            diag += b / h;
            cdn[ks] -= b / h;
        } else if (b < 0.0) {
            r += b * (uu - u0) / h;
            diag -= b / h;
            cup[ks] += b / h;
        }
        xi[k] = (uu - ud) / (2.0 * h);
    }
    std::size_t dp = 0, dm = 0;
    double cc = 0.0;
    if (g.dim == 2 && op.diffusion_cross[i] != 0.0) {
        const double c = op.diffusion_cross[i];
        const auto off = static_cast<std::size_t>(c > 0.0 ? 1 + g.n[0] : g.n[0] - 1);
        dp = c > 0.0 ? i + off : i - off;  // (+,+) or (+,-)
        dm = c > 0.0 ? i - off : i + off;  // (-,-) or (-,+)
        cc = std::abs(c) / h2;
        r -= cc * (u[dp] + u[dm] - 2.0 * u0);
        diag += 2.0 * cc;
    }
    if (op.problem.H) {
        double Hv;
        Vec p;
        if (pol) {
            const Mat& M = pol->M[i];
            Hv = xi.dot(M * xi);
            p = 2.0 * M * xi;
        } else {
            Hv = eval(*op.problem.H, op.nodes[i], xi);
            p = row ? grad_xi(*op.problem.H, op.nodes[i], xi) : Vec();
        }
        r += Hv;
        if (row)
            for (int k = 0; k < g.dim; ++k) {
                cup[static_cast<std::size_t>(k)] += p[k] / (2.0 * h);
                cdn[static_cast<std::size_t>(k)] -= p[k] / (2.0 * h);
            }
    }
    if (row) {
        row->clear();
        row->push_back({i, diag});
        for (int k = 0; k < g.dim; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            row->push_back({up[ks], cup[ks]});
            row->push_back({dn[ks], cdn[ks]});
        }
        if (cc != 0.0) {
            row->push_back({dp, -cc});
            row->push_back({dm, -cc});
        }
    }
    return r;
}

inline std::vector<double> scheme_residual(const DiscreteOperator& op, const std::vector<double>& u,
                                           const std::vector<double>& bnd, const std::vector<double>& lf,
                                           const Policy* pol) {
    std::vector<double> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        r[i] = op.grid.on_boundary(i) ? u[i] - bnd[i] : node_residual(op, u, i, lf, pol, nullptr);
    return r;
}

inline double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double t : v) m = std::max(m, std::abs(t));
    return m;
}

// Per-axis sup of |dH/dxi| over central, forward and backward gradients at interior nodes.
inline std::vector<double> lf_required(const DiscreteOperator& op, const std::vector<double>& u) {
    const Grid& g = op.grid;
    std::vector<double> req(static_cast<std::size_t>(g.dim), 0.0);
    if (!op.problem.H) return req;
    const double h = g.h;
    const int combos = g.dim == 1 ? 3 : 9;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (g.on_boundary(i)) continue;
        std::array<std::array<double, 3>, 2> d{};
        for (int k = 0; k < g.dim; ++k) {
            const auto s = static_cast<std::size_t>(g.stride(k));
            const auto ks = static_cast<std::size_t>(k);
            d[ks] = {(u[i + s] - u[i - s]) / (2.0 * h), (u[i + s] - u[i]) / h, (u[i] - u[i - s]) / h};
        }
        for (int c = 0; c < combos; ++c) {
            Vec xi(g.dim);
            xi[0] = d[0][static_cast<std::size_t>(c % 3)];
            if (g.dim == 2) xi[1] = d[1][static_cast<std::size_t>(c / 3)];
            const Vec b = hp_bound(*op.problem.H, op.nodes[i], xi);
            for (int k = 0; k < g.dim; ++k) req[static_cast<std::size_t>(k)] = std::max(req[static_cast<std::size_t>(k)], b[k]);
        }
    }
    return req;
}

inline bool solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                              std::vector<double>& d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (b[i - 1] == 0.0) return false;
        const double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    if (b[n - 1] == 0.0) return false;
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
    return true;
}

// Newton direction: solves J delta = -R.
inline bool newton_direction(const DiscreteOperator& op, const std::vector<double>& u, const std::vector<double>& R,
                             const std::vector<double>& lf, const Policy* pol, std::vector<double>& delta) {
    const std::size_t n = u.size();
    std::vector<RowEntry> row;
    delta.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) delta[i] = -R[i];
    if (op.grid.dim == 1) {
        std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (op.grid.on_boundary(i)) continue;
            node_residual(op, u, i, lf, pol, &row);
            for (const auto& e : row) {
                if (e.col == i) b[i] = e.value;
                else if (e.col + 1 == i) a[i] = e.value;
                else c[i] = e.value;
            }
        }
        return solve_tridiagonal(a, b, c, delta);
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n * 7);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<int>(i);
        if (op.grid.on_boundary(i)) {
            trips.emplace_back(ii, ii, 1.0);
            continue;
        }
        node_residual(op, u, i, lf, pol, &row);
        for (const auto& e : row) trips.emplace_back(ii, static_cast<int>(e.col), e.value);
    }
    Eigen::SparseMatrix<double> J(static_cast<int>(n), static_cast<int>(n));
    J.setFromTriplets(trips.begin(), trips.end());
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) return false;
    Eigen::Map<const Vec> rhs(delta.data(), static_cast<Eigen::Index>(n));
    const Vec sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return false;
    for (std::size_t i = 0; i < n; ++i) delta[i] = sol[static_cast<Eigen::Index>(i)];
    return true;
}

struct NewtonOutcome {
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    std::string diagnostic;
};

inline NewtonOutcome newton(const DiscreteOperator& op, std::vector<double>& u, const std::vector<double>& bnd,
                            const std::vector<double>& lf, const Policy* pol, const SchemeConfig& cfg,
                            double min_step, SolveReport& rep) {
    NewtonOutcome out;
    std::vector<double> delta, trial(u.size());
    for (int it = 0;; ++it) {
        const auto R = scheme_residual(op, u, bnd, lf, pol);
        const double norm = sup_norm(R);
        rep.residual_history.push_back(norm);
        out.residual = norm;
        if (!std::isfinite(norm)) {
            out.diagnostic = "residual not finite";
            return out;
        }
        if (norm <= cfg.tol_residual) {
            out.converged = true;
            return out;
        }
        if (it >= cfg.max_iters) {
            out.diagnostic = "max_iters exceeded with residual " + std::to_string(norm);
            return out;
        }
        if (!newton_direction(op, u, R, lf, pol, delta)) {
            out.diagnostic = "singular Newton system";
            return out;
        }
        double t = 1.0;
        bool accepted = false;
        while (t >= min_step) {
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + t * delta[i];
            const double tn = sup_norm(scheme_residual(op, trial, bnd, lf, pol));
            if (std::isfinite(tn) && tn < (1.0 - 1e-4 * t) * norm) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted)
            for (std::size_t i = 0; i < u.size(); ++i) trial[i] = u[i] + min_step * delta[i];
        u.swap(trial);
        ++rep.iterations;
    }
}

// Transfinite interpolation of the boundary values into the interior.
inline std::vector<double> interpolate_boundary(const Grid& g, const std::vector<double>& bnd) {
    std::vector<double> u = bnd;
    const int nx = g.n[0], ny = g.n[1];
    if (g.dim == 1) {
        const double a = bnd[0], b = bnd[static_cast<std::size_t>(nx - 1)];
        for (int i = 1; i < nx - 1; ++i) u[static_cast<std::size_t>(i)] = a + (b - a) * i / (nx - 1.0);
        return u;
    }
    auto B = [&](int i, int j) { return bnd[g.index(i, j)]; };
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            const double s = i / (nx - 1.0), t = j / (ny - 1.0);
            u[g.index(i, j)] = (1 - s) * B(0, j) + s * B(nx - 1, j) + (1 - t) * B(i, 0) + t * B(i, ny - 1) -
                               ((1 - s) * (1 - t) * B(0, 0) + s * (1 - t) * B(nx - 1, 0) +
                                (1 - s) * t * B(0, ny - 1) + s * t * B(nx - 1, ny - 1));
        }
    return u;
}

inline bool certify_monotone(const DiscreteOperator& op, const std::vector<double>& u, const std::vector<double>& lf,
                             const std::vector<double>& req) {
    for (std::size_t k = 0; k < req.size(); ++k)
        if (lf[k] < req[k] * (1.0 - 1e-12)) return false;
    std::vector<RowEntry> row;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (op.grid.on_boundary(i)) continue;
        node_residual(op, u, i, lf, nullptr, &row);
        for (const auto& e : row)
            if (e.col != i && e.value > 1e-12 * (1.0 + std::abs(row.front().value))) return false;
    }
    return true;
}

}  // namespace detail

/// Solves the discrete equations with Dirichlet values `bnd` (full-size; interior entries ignored).
inline SolveResult solve_discrete(const DiscreteOperator& op, const std::vector<double>& bnd, const SchemeConfig& cfg,
                                  const std::vector<double>* initial = nullptr,
                                  BoundaryMode mode = BoundaryMode::ExplicitFunction) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid& g = op.grid;
    const auto dim = static_cast<std::size_t>(g.dim);
    if (bnd.size() != g.size()) throw std::invalid_argument("solve: boundary vector size mismatch");
    if (!cfg.lf_fixed.empty() && cfg.lf_fixed.size() != dim)
        throw std::invalid_argument("solve: lf_fixed needs one value per axis");
    if (!cfg.lf_floor.empty() && cfg.lf_floor.size() != dim)
        throw std::invalid_argument("solve: lf_floor needs one value per axis");
    if (cfg.damping < 0.0 || cfg.damping > 1.0) throw std::invalid_argument("solve: damping must lie in (0,1]");
    const double min_step = cfg.damping > 0.0 ? cfg.damping : (op.problem.H ? 0.5 : 1.0);

    SolveResult res;
    SolveReport& rep = res.report;
    std::vector<double> u = initial ? *initial : detail::interpolate_boundary(g, bnd);
    if (u.size() != g.size()) throw std::invalid_argument("solve: initial guess size mismatch");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (g.on_boundary(i)) u[i] = bnd[i];

    const bool fixed = !cfg.lf_fixed.empty();
    auto floor_of = [&](std::size_t k) { return cfg.lf_floor.empty() ? 0.0 : cfg.lf_floor[k]; };
    std::vector<double> lf(dim, 0.0);
    if (fixed) lf = cfg.lf_fixed;
    else {
        const auto req = detail::lf_required(op, u);
        for (std::size_t k = 0; k < dim; ++k) lf[k] = std::max(floor_of(k), cfg.lf_safety * req[k]);
    }

    const bool use_policy = cfg.policy_iteration && detail::as_game(op.problem) != nullptr;
    detail::Policy pol;
    if (use_policy) pol = detail::make_policy(op, u);

    detail::NewtonOutcome inner;
    bool settled = false;
    for (int outer = 0; outer < cfg.max_outer; ++outer) {
        ++rep.outer_iterations;
        inner = detail::newton(op, u, bnd, lf, use_policy ? &pol : nullptr, cfg, min_step, rep);
        bool changed = false;
        if (use_policy) {
            ++rep.policy_iterations;
            rep.policy_residual_history.push_back(detail::sup_norm(detail::scheme_residual(op, u, bnd, lf, nullptr)));
            auto next = detail::make_policy(op, u);
            if (next.alpha != pol.alpha || next.beta != pol.beta) {
                pol = std::move(next);
                changed = true;
            }
        }
        if (!fixed) {
            const auto req = detail::lf_required(op, u);
            for (std::size_t k = 0; k < dim; ++k) {
                const double need = std::max(floor_of(k), cfg.lf_safety * req[k]);
                const bool too_small = need > lf[k] * (1.0 + 1e-12);
                const bool too_large = outer < 10 && lf[k] > 1.05 * need;
                if (too_small || too_large) {
                    lf[k] = need;
                    changed = true;
                }
            }
        }
        if (!changed) {
            settled = true;
            break;
        }
    }

    const auto R = detail::scheme_residual(op, u, bnd, lf, nullptr);
    rep.final_residual_norm = detail::sup_norm(R);
    rep.lf = lf;
    rep.lf_required = detail::lf_required(op, u);
    rep.monotonicity_certificate = detail::certify_monotone(op, u, lf, rep.lf_required);
    rep.success = settled && rep.final_residual_norm <= cfg.tol_residual;
    if (!rep.success) {
        if (!inner.diagnostic.empty()) rep.diagnostic = inner.diagnostic;
        else if (!settled) rep.diagnostic = "outer iteration (dissipation/policy) did not settle";
        else rep.diagnostic = "final residual " + std::to_string(rep.final_residual_norm) + " above tolerance";
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.field.grid = g;
    res.field.values = std::move(u);
    res.field.boundary_mode = mode;
    return res;
}

inline std::vector<double> boundary_values(const Grid& g, const BoundaryCondition& bc) {
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g.on_boundary(i)) v[i] = evaluate_at(bc.g, g.node(i));
    return v;
}

inline SolveResult solve(const ProblemSpec& problem, const Box& box, double h, const BoundaryCondition& boundary,
                         const SchemeConfig& cfg = {}) {
    const auto op = discretize(problem, box, h);
    return solve_discrete(op, boundary_values(op.grid, boundary), cfg, nullptr, boundary.mode);
}

/// Nodal values of a function on the field's grid.
inline std::vector<double> sample(const Grid& g, const ScalarField& u) {
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) v[i] = evaluate_at(u, g.node(i));
    return v;
}

/// max over nodes of |U - u|.
inline double sup_error(const DiscreteField& U, const ScalarField& u) {
    double e = 0.0;
    for (std::size_t i = 0; i < U.values.size(); ++i) e = std::max(e, std::abs(U.values[i] - evaluate_at(u, U.grid.node(i))));
    return e;
}

struct ComparisonReport {
    bool ordered = true;
    std::size_t violations = 0;
    double min_gap = std::numeric_limits<double>::infinity();  // min of u_high - u_low
    double max_gap = -std::numeric_limits<double>::infinity();
    double center_gap = 0.0;
    Vec witness;  // node of the largest violation
    double tolerance = 0.0;
    std::vector<double> lf;
    bool certificate = false;
    SolveResult low;
    SolveResult high;
};

/// Solves the low and high problems with one common scheme and checks u_low <= u_high nodewise.
inline ComparisonReport comparison_check(const ProblemSpec& problem, const Box& box, double h, const ScalarField& f_low,
                                         const ScalarField& f_high, const BoundaryCondition& boundary_low,
                                         const BoundaryCondition& boundary_high, const SchemeConfig& cfg = {}) {
    ProblemSpec lo = problem, hi = problem;
    lo.f = f_low;
    hi.f = f_high;
    const auto op_lo = discretize(lo, box, h), op_hi = discretize(hi, box, h);
    const auto& g = op_lo.grid;
    const auto b_lo = boundary_values(g, boundary_low), b_hi = boundary_values(g, boundary_high);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (op_lo.f[i] > op_hi.f[i]) throw std::invalid_argument("comparison_check: f_low > f_high at " + format_point(g.node(i)));
        if (g.on_boundary(i) && b_lo[i] > b_hi[i])
            throw std::invalid_argument("comparison_check: boundary_low > boundary_high at " + format_point(g.node(i)));
    }
    ComparisonReport rep;
    SchemeConfig c = cfg;
    std::vector<double> lf;
    if (c.lf_fixed.empty()) {
        const auto a = solve_discrete(op_lo, b_lo, c), b = solve_discrete(op_hi, b_hi, c);
        lf.resize(a.report.lf.size());
        for (std::size_t k = 0; k < lf.size(); ++k) lf[k] = std::max(a.report.lf[k], b.report.lf[k]);
        c.lf_fixed = lf;
        rep.low = solve_discrete(op_lo, b_lo, c, &a.field.values);
        rep.high = solve_discrete(op_hi, b_hi, c, &b.field.values);
    } else {
        lf = c.lf_fixed;
        rep.low = solve_discrete(op_lo, b_lo, c);
        rep.high = solve_discrete(op_hi, b_hi, c);
    }
    rep.lf = lf;
    rep.certificate = rep.low.report.monotonicity_certificate && rep.high.report.monotonicity_certificate;
    rep.tolerance = 2.0 * c.tol_residual / std::max(problem.lambda, 1e-300) + 1e-12;
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gap = rep.high.field.values[i] - rep.low.field.values[i];
        rep.min_gap = std::min(rep.min_gap, gap);
        rep.max_gap = std::max(rep.max_gap, gap);
        if (gap < -rep.tolerance) {
            ++rep.violations;
            if (-gap > worst) {
                worst = -gap;
                rep.witness = g.node(i);
            }
        }
    }
    rep.center_gap = rep.high.field.values[g.center_index()] - rep.low.field.values[g.center_index()];
    rep.ordered = rep.violations == 0;
    return rep;
}

struct GammaPinLevel {
    double h;
    double deviation;  // max over Gamma of |U - f/lambda| at the nearest node
    double value_at_first;
    SolveReport report;
};

struct GammaPinReport {
    bool vacuous = false;
    bool decreasing = false;
    bool passed = false;
    double final_deviation = 0.0;
    double tolerance = 0.0;
    std::vector<Vec> gamma;
    std::vector<GammaPinLevel> levels;
};

/// Refinement study of |U(x0) - f(x0)/lambda| at zero-set nodes x0 of a(x).
inline GammaPinReport gamma_pinning_check(const ProblemSpec& problem, const Box& box,
                                          const std::vector<double>& hs, const BoundaryCondition& boundary,
                                          const SchemeConfig& cfg = {}, double tolerance = 0.05) {
    const auto* sh = problem.H ? std::get_if<SignedScalarHamiltonian>(&*problem.H) : nullptr;
    if (!sh) throw std::invalid_argument("gamma_pinning_check: needs a sign-changing scalar Hamiltonian a(x)|xi|^q");
    if (hs.empty()) throw std::invalid_argument("gamma_pinning_check: no grid spacings");
    GammaPinReport rep;
    rep.tolerance = tolerance;
    const double hmin = *std::min_element(hs.begin(), hs.end());
    const auto fine = make_grid(box, hmin);
    std::vector<Vec> nodes;
    for (std::size_t i = 0; i < fine.size(); ++i) nodes.push_back(fine.node(i));
    const auto part = compute_gamma(*sh, nodes);
    rep.gamma = part.gamma_points;
    for (double z : part.bracketed_zeros) {
        const Vec x = Vec::Constant(1, z);
        const bool seen = std::any_of(rep.gamma.begin(), rep.gamma.end(),
                                      [&](const Vec& y) { return (y - x).norm() < 0.5 * hmin; });
        if (!seen) rep.gamma.push_back(x);
    }
    if (rep.gamma.empty()) {
        rep.vacuous = rep.passed = rep.decreasing = true;
        return rep;
    }
    for (double h : hs) {
        auto r = solve(problem, box, h, boundary, cfg);
        GammaPinLevel lvl{h, 0.0, 0.0, r.report};
        for (std::size_t k = 0; k < rep.gamma.size(); ++k) {
            const auto idx = r.field.grid.nearest(rep.gamma[k]);
            const Vec x0 = r.field.grid.node(idx);
            const double dev = std::abs(r.field.values[idx] - evaluate_at(problem.f, x0) / problem.lambda);
            lvl.deviation = std::max(lvl.deviation, dev);
            if (k == 0) lvl.value_at_first = r.field.values[idx];
        }
        rep.levels.push_back(std::move(lvl));
    }
    rep.decreasing = true;
    for (std::size_t k = 1; k < rep.levels.size(); ++k)
        if (!(rep.levels[k].deviation < rep.levels[k - 1].deviation)) rep.decreasing = false;
    rep.final_deviation = rep.levels.back().deviation;
    rep.passed = rep.decreasing && rep.final_deviation <= tolerance;
    return rep;
}

struct DemoSolution {
    std::string name;
    SmoothCandidate closed_form;
    SolveResult solve;
    double sup_error = 0.0;  // discrete solution vs closed form on the grid
    GrowthReport growth;     // closed form at r = q'
    bool in_uniqueness_class = false;
    bool bounded_below = false;
};

struct NonuniquenessReport {
    std::string example;
    std::string uniqueness_class;
    double lambda = 1.0;
    double t = 0.0;
    std::vector<DemoSolution> solutions;
    double sup_distance = 0.0;  // between the two discrete solutions
    bool distinct = false;
    bool exactly_one_in_class = false;
};

/// Solves one built-in example with the boundary traces of its two closed-form solutions.
/// example_id in {eq12, hje3, ex2}; t is used by hje3 only.
inline NonuniquenessReport nonuniqueness_demo(const std::string& example_id, const Box& box, double h,
                                              double lambda = 1.0, double t = 1.0, const SchemeConfig& cfg = {}) {
    NonuniquenessReport rep;
    rep.example = example_id;
    rep.lambda = lambda;
    ProblemSpec p;
    SmoothCandidate second;
    if (example_id == "eq12") {
        p = builtins::eq12(lambda);
        second = builtins::eq12_u2(lambda);
    } else if (example_id == "hje3") {
        p = builtins::hje3(lambda, t);
        second = builtins::hje3_u2(lambda, t);
        rep.t = t;
    } else if (example_id == "ex2") {
        if (lambda != 1.0) throw std::invalid_argument("nonuniqueness_demo: ex2 closed forms need lambda = 1");
        p = builtins::ex2(1.0);
        second = builtins::ex2_v2();
    } else {
        throw std::invalid_argument("nonuniqueness_demo: unknown example '" + example_id + "'");
    }
    SmoothCandidate first = builtins::zero(1);
    if (example_id == "ex2") first.name = "v1";
    const double qp = p.q_prime();
    rep.uniqueness_class = "S_" + std::to_string(static_cast<int>(std::lround(qp)));
    GrowthOptions gopts;
    for (const auto& c : {first, second}) {
        DemoSolution s;
        s.name = c.name;
        s.closed_form = c;
        s.solve = solve(p, box, h, trace_boundary(c), cfg);
        s.sup_error = sup_error(s.solve.field, c.value);
        s.growth = classify_growth(c.value, 1, GrowthExponent(qp), gopts);
        s.in_uniqueness_class = s.growth.in_S();
        s.bounded_below = classify_growth(c.value, 1, GrowthExponent(1.0), gopts).in_S_plus;
        rep.solutions.push_back(std::move(s));
    }
    const auto& a = rep.solutions[0].solve.field.values;
    const auto& b = rep.solutions[1].solve.field.values;
    for (std::size_t i = 0; i < a.size(); ++i) rep.sup_distance = std::max(rep.sup_distance, std::abs(a[i] - b[i]));
    rep.distinct = rep.sup_distance > 1e-3;
    rep.exactly_one_in_class = rep.solutions[0].in_uniqueness_class != rep.solutions[1].in_uniqueness_class;
    return rep;
}

}  // namespace viscompare
