#pragma once

#include "viscompare/barrier.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/problem.hpp"
#include "viscompare/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace viscompare {

struct SystemComponent {
    DriftDiffusionOperator op;
    std::optional<ExtremalOperator> extremal;
    std::optional<Hamiltonian> H;
    ScalarField f;

    ExtremalOperator extremal_operator() const { return extremal ? *extremal : canonical_extremal(op); }
};

/// F_k(x, r, xi, X) = -Tr(sigma_k sigma_k^T X) + <b_k, xi> + lambda r_k + coupling_k(r),
/// coupling(r) = C r + offset unless a custom coupling is supplied.
struct MonotoneSystem {
    std::string name = "system";
    int dim = 1;
    double lambda = 1.0;
    double q = 2.0;
    std::vector<SystemComponent> components;
    Mat coupling;  // m x m; empty means zero
    Vec offset;    // m; empty means zero
    std::function<Vec(const Vec&)> custom_coupling;

    int m() const { return static_cast<int>(components.size()); }

    Vec coupling_of(const Vec& r) const {
        if (custom_coupling) return custom_coupling(r);
        Vec c = coupling.size() ? Vec(coupling * r) : Vec(Vec::Zero(r.size()));
        if (offset.size()) c += offset;
        return c;
    }

    double F(int k, const Vec& x, const Vec& r, const Vec& xi, const Mat& X) const {
        const auto& comp = components[static_cast<std::size_t>(k)];
        return eval_F(comp.op, x, xi, X) + lambda * r[k] + coupling_of(r)[k];
    }

    double eval_H(int k, const Vec& x, const Vec& xi) const {
        const auto& comp = components[static_cast<std::size_t>(k)];
        return comp.H ? eval(*comp.H, x, xi) : 0.0;
    }

    double C(int k, int j) const { return coupling.size() ? coupling(k, j) : 0.0; }
    double offset_of(int k) const { return offset.size() ? offset[k] : 0.0; }

    void validate() const {
        if (m() < 1) throw std::invalid_argument("MonotoneSystem: no components");
        if (coupling.size() && (coupling.rows() != m() || coupling.cols() != m()))
            throw std::invalid_argument("MonotoneSystem: coupling must be m x m");
        if (offset.size() && offset.size() != m()) throw std::invalid_argument("MonotoneSystem: offset must have m entries");
    }
};

/// Lowest index attaining max_k v_k.
inline int lowest_argmax(const Vec& v) {
    int j = 0;
    for (int k = 1; k < v.size(); ++k)
        if (v[k] > v[j]) j = k;
    return j;
}

struct MSample {
    Vec r, s;
};

struct PointSample {
    Vec x, xi;
    Mat X;
};

inline std::vector<MSample> make_rs_samples(int m, int count, unsigned seed = 21, double scale = 3.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<MSample> out;
    while (static_cast<int>(out.size()) < count) {
        MSample s{Vec(m), Vec(m)};
        for (int k = 0; k < m; ++k) {
            s.r[k] = u(rng);
            s.s[k] = u(rng);
        }
        if ((s.r - s.s).maxCoeff() >= 0.0) out.push_back(std::move(s));
    }
    return out;
}

inline std::vector<PointSample> make_point_samples(int dim, int count, unsigned seed = 22, double R = 5.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-R, R);
    std::vector<PointSample> out;
    for (int i = 0; i < count; ++i) {
        PointSample p{Vec(dim), Vec(dim), Mat(dim, dim)};
        for (int k = 0; k < dim; ++k) {
            p.x[k] = u(rng);
            p.xi[k] = u(rng);
        }
        p.X = detail::random_symmetric(rng, dim, 1.0);
        out.push_back(std::move(p));
    }
    return out;
}

struct MReport {
    bool passed = true;
    int checked = 0;
    double worst_slack = std::numeric_limits<double>::infinity();  // min of F_j(r) - F_j(s) - lambda (r_j - s_j)
    Vec witness_r, witness_s, witness_x;
    int witness_j = -1;
};

/// (M): at the lowest j attaining max_k (r_k - s_k) >= 0,
/// F_j(x, r, xi, X) - F_j(x, s, xi, X) >= lambda (r_j - s_j).
inline MReport check_M(const MonotoneSystem& sys, const std::vector<MSample>& rs,
                       const std::vector<PointSample>& points, double tol = 1e-10) {
    sys.validate();
    MReport rep;
    for (const auto& p : rs) {
        const Vec d = p.r - p.s;
        if (d.maxCoeff() < 0.0) continue;
        const int j = lowest_argmax(d);
        for (const auto& pt : points) {
            const double slack = sys.F(j, pt.x, p.r, pt.xi, pt.X) - sys.F(j, pt.x, p.s, pt.xi, pt.X) - sys.lambda * d[j];
            ++rep.checked;
            const double scale = tol * (1.0 + std::abs(sys.lambda * d[j]));
            if (slack < rep.worst_slack) {
                rep.worst_slack = slack;
                if (slack < -scale) {
                    rep.witness_r = p.r;
                    rep.witness_s = p.s;
                    rep.witness_x = pt.x;
                    rep.witness_j = j;
                }
            }
            if (slack < -scale) rep.passed = false;
        }
    }
    return rep;
}

struct F2PrimeReport {
    bool passed = true;
    double max_abs_deviation = 0.0;
    double witness_theta = 0.0;
    int witness_component = -1;
};

/// F_k(x, theta r, theta xi, theta X) = theta F_k(x, r, xi, X) for theta >= 0.
inline F2PrimeReport check_F2prime(const MonotoneSystem& sys, const std::vector<MSample>& rs,
                                   const std::vector<PointSample>& points, const std::vector<double>& thetas,
                                   double tol = 1e-10) {
    sys.validate();
    F2PrimeReport rep;
    for (double th : thetas)
        if (th < 0.0) throw std::invalid_argument("check_F2prime: thetas must be nonnegative");
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& pt = points[i % points.size()];
        for (int k = 0; k < sys.m(); ++k) {
            const double base = sys.F(k, pt.x, rs[i].r, pt.xi, pt.X);
            for (double th : thetas) {
                const double lhs = sys.F(k, pt.x, th * rs[i].r, th * pt.xi, th * pt.X);
                const double dev = std::abs(lhs - th * base);
                if (dev > rep.max_abs_deviation) {
                    rep.max_abs_deviation = dev;
                    if (dev > tol * (1.0 + std::abs(lhs))) {
                        rep.witness_theta = th;
                        rep.witness_component = k;
                    }
                }
                if (dev > tol * (1.0 + std::abs(lhs))) rep.passed = false;
            }
        }
    }
    return rep;
}

namespace detail {

inline Vec candidate_values(const std::vector<SmoothCandidate>& u, const Vec& x) {
    Vec r(static_cast<Eigen::Index>(u.size()));
    for (std::size_t k = 0; k < u.size(); ++k) r[static_cast<Eigen::Index>(k)] = evaluate_at(u[k].value, x);
    return r;
}

inline void require_components(const MonotoneSystem& sys, const std::vector<SmoothCandidate>& u, int k) {
    sys.validate();
    if (static_cast<int>(u.size()) != sys.m()) throw std::invalid_argument("system: one candidate per component needed");
    if (k < 0 || k >= sys.m()) throw std::out_of_range("system: component index out of range");
}

}  // namespace detail

/// F_k(x, u(x), Du_k, D^2u_k) + H_k(x, Du_k): the f_k that makes u exact.
inline double system_manufactured_rhs(const MonotoneSystem& sys, const std::vector<SmoothCandidate>& u, int k,
                                      const Vec& x) {
    detail::require_components(sys, u, k);
    const auto& c = u[static_cast<std::size_t>(k)];
    const Vec g = evaluate_at(c.gradient, x);
    return sys.F(k, x, detail::candidate_values(u, x), g, evaluate_at(c.hessian, x)) + sys.eval_H(k, x, g);
}

/// F_k(x, u(x), Du_k, D^2u_k) + H_k(x, Du_k) - f_k(x).
inline double system_residual(const MonotoneSystem& sys, const std::vector<SmoothCandidate>& u, int k, const Vec& x) {
    return system_manufactured_rhs(sys, u, k, x) -
           evaluate_at(sys.components[static_cast<std::size_t>(k)].f, x);
}

/// Residual of mu u in F_k(x, w, Dw_k, D^2w_k) + mu^{1-q} H_k(x, Dw_k) = mu f_k.
inline double system_mu_residual(const MonotoneSystem& sys, const std::vector<SmoothCandidate>& u, double mu, int k,
                                 const Vec& x) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("system_mu_residual: mu must lie in (0,1)");
    detail::require_components(sys, u, k);
    const auto& c = u[static_cast<std::size_t>(k)];
    const Vec g = mu * evaluate_at(c.gradient, x);
    return sys.F(k, x, mu * detail::candidate_values(u, x), g, mu * evaluate_at(c.hessian, x)) +
           std::pow(mu, 1.0 - sys.q) * sys.eval_H(k, x, g) -
           mu * evaluate_at(sys.components[static_cast<std::size_t>(k)].f, x);
}

/// System with f_k manufactured from the candidates.
inline MonotoneSystem with_manufactured_rhs(MonotoneSystem sys, const std::vector<SmoothCandidate>& u) {
    const MonotoneSystem base = sys;
    for (int k = 0; k < sys.m(); ++k)
        sys.components[static_cast<std::size_t>(k)].f = [base, u, k](const Vec& x) {
            return system_manufactured_rhs(base, u, k, x);
        };
    return sys;
}

struct ComponentGap {
    double value;
    int argmax;
};

/// w(x) = max_k (mu u_k - v_k)(x), lowest index on ties.
inline ComponentGap max_component_gap(const std::vector<SmoothCandidate>& u, const std::vector<SmoothCandidate>& v,
                                      double mu, const Vec& x) {
    if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("max_component_gap: mu must lie in (0,1)");
    if (u.empty() || u.size() != v.size()) throw std::invalid_argument("max_component_gap: component count mismatch");
    ComponentGap g{-std::numeric_limits<double>::infinity(), -1};
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double w = mu * evaluate_at(u[k].value, x) - evaluate_at(v[k].value, x);
        if (w > g.value) {
            g.value = w;
            g.argmax = static_cast<int>(k);
        }
    }
    return g;
}

inline double system_extremal_residual(const MonotoneSystem& sys, const BarrierParams& params, double w_value,
                                       const Vec& w_grad, const Mat& w_hess, const Vec& x) {
    std::vector<ExtremalOperator> ext;
    std::vector<ScalarField> f;
    for (const auto& c : sys.components) {
        ext.push_back(c.extremal_operator());
        f.push_back(c.f);
    }
    return system_extremal_residual(sys.lambda, ext, f, params, w_value, w_grad, w_hess, x);
}

struct CommonConstantsReport {
    bool common = true;
    std::vector<double> q;
    std::vector<double> C0;
    std::string note;
};

/// Flags components whose exponents or upper constants differ; the comparison
/// result for systems is stated for common constants only.
inline CommonConstantsReport common_constants(const MonotoneSystem& sys, const std::vector<Vec>& window) {
    CommonConstantsReport rep;
    for (const auto& c : sys.components) {
        rep.q.push_back(c.H ? exponent(*c.H) : sys.q);
        rep.C0.push_back(c.H ? estimate_C0(*c.H, sys.dim, window) : 0.0);
    }
    auto differ = [](const std::vector<double>& v) {
        return std::any_of(v.begin(), v.end(), [&](double t) { return std::abs(t - v.front()) > 1e-12 * (1.0 + std::abs(t)); });
    };
    if (differ(rep.q)) rep.note += "exponents differ across components; ";
    if (differ(rep.C0)) rep.note += "upper constants differ across components; ";
    rep.common = rep.note.empty();
    if (!rep.common) rep.note += "comparison result not claimed";
    return rep;
}

struct SystemSolveResult {
    bool success = false;
    int sweeps = 0;
    std::vector<DiscreteField> fields;
    std::vector<SolveReport> reports;  // last inner solve per component
    std::vector<double> residual_history;  // sup over components after each sweep
    std::string diagnostic;
};

namespace detail {

inline ProblemSpec component_problem(const MonotoneSystem& sys, int k) {
    const auto& c = sys.components[static_cast<std::size_t>(k)];
    ProblemSpec p;
    p.name = sys.name + "[" + std::to_string(k) + "]";
    p.dim = sys.dim;
    p.lambda = sys.lambda + sys.C(k, k);
    p.op = c.op;
    p.extremal = c.extremal;
    p.H = c.H;
    p.q = sys.q;
    p.f = c.f;
    return p;
}

}  // namespace detail

/// Gauss-Seidel over components: component k is solved by the scalar solver with
/// C_kk absorbed into the zeroth-order term and the other components frozen.
inline SystemSolveResult solve_system(const MonotoneSystem& sys, const Box& box, double h,
                                      const std::vector<BoundaryCondition>& boundary, const SchemeConfig& cfg = {},
                                      int max_sweeps = 50) {
    sys.validate();
    if (sys.custom_coupling) throw std::invalid_argument("solve_system: needs a linear coupling");
    const int m = sys.m();
    if (static_cast<int>(boundary.size()) != m) throw std::invalid_argument("solve_system: one boundary per component");
    SystemSolveResult res;
    std::vector<DiscreteOperator> ops;
    std::vector<std::vector<double>> bnd, f0, u;
    std::vector<SchemeConfig> cfgs(static_cast<std::size_t>(m), cfg);
    for (int k = 0; k < m; ++k) {
        ops.push_back(discretize(detail::component_problem(sys, k), box, h));
        bnd.push_back(boundary_values(ops.back().grid, boundary[static_cast<std::size_t>(k)]));
        f0.push_back(ops.back().f);
    }
    const Grid& g = ops.front().grid;
    u.assign(static_cast<std::size_t>(m), {});
    res.reports.resize(static_cast<std::size_t>(m));

    auto coupled_f = [&](int k) {
        auto f = f0[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < f.size(); ++i) {
            double s = sys.offset_of(k);
            for (int j = 0; j < m; ++j)
                if (j != k) s += sys.C(k, j) * u[static_cast<std::size_t>(j)][i];
            f[i] -= s;
        }
        return f;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        ++res.sweeps;
        for (int k = 0; k < m; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            if (u[ks].empty()) u[ks] = detail::interpolate_boundary(g, bnd[ks]);
        }
        for (int k = 0; k < m; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            ops[ks].f = coupled_f(k);
            const std::vector<double>* init = sweep == 0 ? nullptr : &u[ks];
            auto r = solve_discrete(ops[ks], bnd[ks], cfgs[ks], init, boundary[ks].mode);
            u[ks] = r.field.values;
            if (cfg.lf_fixed.empty()) cfgs[ks].lf_floor = r.report.lf;
            res.reports[ks] = std::move(r.report);
        }
        double worst = 0.0;
        for (int k = 0; k < m; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            ops[ks].f = coupled_f(k);
            worst = std::max(worst, detail::sup_norm(detail::scheme_residual(ops[ks], u[ks], bnd[ks],
                                                                             res.reports[ks].lf, nullptr)));
        }
        res.residual_history.push_back(worst);
        if (worst <= cfg.tol_residual) {
            res.success = true;
            break;
        }
        if (res.residual_history.size() >= 5) {
            const auto n = res.residual_history.size();
            if (res.residual_history[n - 1] > 0.999 * res.residual_history[n - 5]) {
                res.diagnostic = "residual stagnated at " + std::to_string(worst);
                break;
            }
        }
    }
    if (!res.success && res.diagnostic.empty())
        res.diagnostic = "max sweeps reached with residual " + std::to_string(res.residual_history.back());
    for (int k = 0; k < m; ++k) {
        DiscreteField fld;
        fld.grid = g;
        fld.values = u[static_cast<std::size_t>(k)];
        fld.boundary_mode = boundary[static_cast<std::size_t>(k)].mode;
        res.fields.push_back(std::move(fld));
    }
    return res;
}

namespace builtins {

/// Two copies of lambda u - u'' + |u'|^2 coupled by c (r_k - mean(r)); f_k = 0 unless given.
inline MonotoneSystem system2(double lambda = 1.0, double c = 1.0) {
    MonotoneSystem s;
    s.name = "system2";
    s.dim = 1;
    s.lambda = lambda;
    s.q = 2.0;
    for (int k = 0; k < 2; ++k) s.components.push_back({laplacian(1), std::nullopt, euclidean_power(1, 2.0), constant_field(0.0)});
    s.coupling = Mat(2, 2);
    s.coupling << 0.5 * c, -0.5 * c, -0.5 * c, 0.5 * c;
    return s;
}

/// c (r_k - mean(r)) for m components.
inline Mat mean_coupling(int m, double c) {
    return c * (Mat::Identity(m, m) - Mat::Constant(m, m, 1.0 / m));
}

}  // namespace builtins

}  // namespace viscompare
