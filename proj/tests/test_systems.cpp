#include "viscompare/systems.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/residual.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace viscompare;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

SmoothCandidate trig(bool use_sin) {
    if (use_sin)
        return make_candidate(
            "sin", [](const Vec& x) { return std::sin(x[0]); },
            [](const Vec& x) { return Vec(Vec::Constant(1, std::cos(x[0]))); },
            [](const Vec& x) { return Mat(Mat::Constant(1, 1, -std::sin(x[0]))); });
    return make_candidate(
        "cos", [](const Vec& x) { return std::cos(x[0]); },
        [](const Vec& x) { return Vec(Vec::Constant(1, -std::sin(x[0]))); },
        [](const Vec& x) { return Mat(Mat::Constant(1, 1, -std::cos(x[0]))); });
}

SmoothCandidate constant(double c) {
    return make_candidate(
        "c", [c](const Vec&) { return c; }, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
        [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); });
}

SmoothCandidate quad(double a, double d) {
    return make_candidate(
        "quad", [a, d](const Vec& x) { return a * x[0] * x[0] + d; },
        [a](const Vec& x) { return Vec(Vec::Constant(1, 2 * a * x[0])); },
        [a](const Vec&) { return Mat(Mat::Constant(1, 1, 2 * a)); });
}

MonotoneSystem decoupled(int m, double lambda = 1.0) {
    MonotoneSystem s = builtins::system2(lambda, 0.0);
    s.components.resize(static_cast<std::size_t>(m), s.components.front());
    s.coupling = Mat::Zero(m, m);
    return s;
}

}  // namespace

TEST(CheckM, DecoupledPassesWithEquality) {
    const auto s = decoupled(3);
    const auto r = check_M(s, make_rs_samples(3, 300), make_point_samples(1, 20));
    EXPECT_TRUE(r.passed);
    EXPECT_NEAR(r.worst_slack, 0.0, 1e-12);
    EXPECT_EQ(r.checked, 300 * 20);
}

TEST(CheckM, MeanCouplingPasses) {
    auto s = decoupled(3);
    s.coupling = builtins::mean_coupling(3, 2.0);
    const auto r = check_M(s, make_rs_samples(3, 1000), make_point_samples(1, 20));
    EXPECT_TRUE(r.passed);
    EXPECT_GE(r.worst_slack, -1e-12);
}

TEST(CheckM, NegativeZerothOrderFails) {
    auto s = decoupled(2, 1.5);
    s.coupling = -2.0 * s.lambda * Mat::Identity(2, 2);
    const auto r = check_M(s, make_rs_samples(2, 100), make_point_samples(1, 10));
    EXPECT_FALSE(r.passed);
    EXPECT_GE(r.witness_j, 0);
    EXPECT_EQ(r.witness_r.size(), 2);
    // Witness j attains max (r - s), lowest index on ties.
    const Vec d = r.witness_r - r.witness_s;
    EXPECT_EQ(d[r.witness_j], d.maxCoeff());
}

TEST(CheckF2Prime, Examples) {
    auto s = builtins::system2();
    const auto rs = make_rs_samples(2, 50);
    const auto pts = make_point_samples(1, 10);
    const auto r = check_F2prime(s, rs, pts, {0.0, 0.5, 2.0, 10.0});
    EXPECT_TRUE(r.passed);
    EXPECT_LE(r.max_abs_deviation, 1e-9);
    for (int k = 0; k < 2; ++k) EXPECT_EQ(s.F(k, v1(0.3), Vec::Zero(2), Vec::Zero(1), Mat::Zero(1, 1)), 0.0);

    s.offset = Vec::Constant(2, 0.5);
    const auto bad = check_F2prime(s, rs, pts, {2.0});
    EXPECT_FALSE(bad.passed);
    EXPECT_EQ(bad.witness_theta, 2.0);
    EXPECT_THROW(check_F2prime(s, rs, pts, {-1.0}), std::invalid_argument);
}

TEST(SystemResidual, Examples) {
    const auto d = decoupled(2);
    const auto u2 = builtins::eq12_u2();
    for (const Vec& x : line_grid(-10, 10, 41))
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(system_residual(d, {u2, u2}, k, x), 0.0, 1e-12 * (1 + x.squaredNorm()));

    // Coupling c (r_k - mean r) vanishes on equal candidates.
    const auto s = builtins::system2(1.0, 3.0);
    for (const Vec& x : line_grid(-10, 10, 41))
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(system_residual(s, {u2, u2}, k, x), 0.0, 1e-12 * (1 + x.squaredNorm()));

    const std::vector<SmoothCandidate> pair{trig(true), trig(false)};
    const auto m = with_manufactured_rhs(s, pair);
    for (const Vec& x : line_grid(-3, 3, 31)) {
        // Oracle for k = 0: lambda sin + sin + cos^2 + (3/2)(sin - cos).
        const double sx = std::sin(x[0]), cx = std::cos(x[0]);
        EXPECT_NEAR(m.components[0].f(x), 2 * sx + cx * cx + 1.5 * (sx - cx), 1e-13);
        for (int k = 0; k < 2; ++k) EXPECT_NEAR(system_residual(m, pair, k, x), 0.0, 1e-13);
    }
    EXPECT_THROW(system_residual(s, {u2}, 0, v1(0)), std::invalid_argument);
    EXPECT_THROW(system_residual(s, {u2, u2}, 2, v1(0)), std::out_of_range);
}

TEST(SystemResidual, MuScalingIdentity) {
    const auto s = with_manufactured_rhs(builtins::system2(1.0, 2.0), {trig(true), trig(false)});
    const std::vector<SmoothCandidate> c{quad(0.3, -1), quad(-0.2, 0.5)};
    for (double mu : {0.3, 0.7, 0.95})
        for (const Vec& x : line_grid(-3, 3, 25))
            for (int k = 0; k < 2; ++k) {
                const double r = system_residual(s, c, k, x);
                EXPECT_NEAR(system_mu_residual(s, c, mu, k, x), mu * r, 1e-12 * (1 + std::abs(r)));
            }
}

TEST(ComponentGap, Examples) {
    const std::vector<SmoothCandidate> u{trig(true), trig(false)};
    EXPECT_NEAR(max_component_gap(u, u, 1 - 1e-9, v1(0.4)).value, 0.0, 1e-8);

    const double mu = 0.5;
    const auto g = max_component_gap({constant(4.0), constant(2.0)}, {constant(1.0), constant(1.0)}, mu, v1(0));
    EXPECT_EQ(g.value, 1.0);
    EXPECT_EQ(g.argmax, 0);
    // Tie goes to the lowest index.
    EXPECT_EQ(max_component_gap({constant(2.0), constant(2.0)}, {constant(0.0), constant(0.0)}, mu, v1(0)).argmax, 0);

    // Crossing: mu x - 0 vs 0 - 0 switches at x = 0.
    const auto lin = make_candidate(
        "x", [](const Vec& x) { return x[0]; }, [](const Vec&) { return Vec(Vec::Ones(1)); },
        [](const Vec&) { return Mat(Mat::Zero(1, 1)); });
    for (const Vec& x : line_grid(-1, 1, 201)) {
        const auto c = max_component_gap({lin, constant(0.0)}, {constant(0.0), constant(0.0)}, mu, x);
        EXPECT_EQ(c.argmax, x[0] > 0 ? 0 : (x[0] < 0 ? 1 : 0));
        EXPECT_DOUBLE_EQ(c.value, std::max(mu * x[0], 0.0));
    }
    EXPECT_THROW(max_component_gap(u, u, 1.0, v1(0)), std::domain_error);
}

TEST(ComponentGap, LipschitzInValues) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int i = 0; i < 200; ++i) {
        const double a = U(rng), b = U(rng), c = U(rng), d = U(rng), e = U(rng);
        const auto g1 = max_component_gap({constant(a), constant(b)}, {constant(c), constant(d)}, 0.6, v1(0));
        const auto g2 = max_component_gap({constant(a + e), constant(b)}, {constant(c), constant(d)}, 0.6, v1(0));
        EXPECT_LE(std::abs(g1.value - g2.value), std::abs(e) + 1e-15);
    }
}

TEST(SingleComponent, ReducesToScalar) {
    auto s = decoupled(1);
    const auto p = builtins::eq12();
    const auto c = quad(0.3, 0.1);
    s.components[0].f = [](const Vec& x) { return std::sin(x[0]); };
    ProblemSpec ps = p;
    ps.f = s.components[0].f;
    for (const Vec& x : line_grid(-3, 3, 13)) {
        EXPECT_DOUBLE_EQ(system_residual(s, {c}, 0, x), pde_residual(ps, c, x));
        EXPECT_NEAR(system_mu_residual(s, {c}, 0.4, 0, x), mu_subsolution_residual(ps, c, 0.4, x), 1e-14);
    }
    const BarrierParams params = construct_barrier(ps, 0.9, BarrierWindow{100, 201});
    const auto phi = eval_barrier(params, v1(1.0));
    EXPECT_DOUBLE_EQ(system_extremal_residual(s, params, phi.value, phi.gradient, phi.hessian, v1(1.0)),
                     extremal_residual(ps, params, phi.value, phi.gradient, phi.hessian, v1(1.0)));

    const auto box = Box::interval(-2, 2);
    const auto bc = explicit_boundary(constant_field(0.5));
    const auto sys = solve_system(s, box, 0.05, {bc});
    const auto sc = solve(ps, box, 0.05, bc);
    ASSERT_TRUE(sys.success);
    for (std::size_t i = 0; i < sc.field.values.size(); ++i) EXPECT_NEAR(sys.fields[0].values[i], sc.field.values[i], 1e-9);
}

TEST(CommonConstants, Flags) {
    const auto s = builtins::system2();
    const auto w = line_grid(-10, 10, 21);
    EXPECT_TRUE(common_constants(s, w).common);
    auto t = s;
    t.components[1].H = PowerHamiltonian{constant_matrix_field(Mat::Constant(1, 1, 2.0)), 2.0};
    const auto r = common_constants(t, w);
    EXPECT_FALSE(r.common);
    EXPECT_NE(r.note.find("upper constants"), std::string::npos);
}

TEST(SolveSystem, DecoupledMatchesScalarSolves) {
    auto s = decoupled(2);
    s.components[0].f = constant_field(1.0);
    s.components[1].f = [](const Vec& x) { return std::cos(x[0]); };
    const auto box = Box::interval(-2, 2);
    const std::vector<BoundaryCondition> bcs{explicit_boundary(constant_field(0.0)), explicit_boundary(constant_field(1.0))};
    const auto r = solve_system(s, box, 0.05, bcs);
    ASSERT_TRUE(r.success) << r.diagnostic;
    for (int k = 0; k < 2; ++k) {
        ProblemSpec p = builtins::eq12();
        p.f = s.components[static_cast<std::size_t>(k)].f;
        const auto sc = solve(p, box, 0.05, bcs[static_cast<std::size_t>(k)]);
        for (std::size_t i = 0; i < sc.field.values.size(); ++i)
            EXPECT_NEAR(r.fields[static_cast<std::size_t>(k)].values[i], sc.field.values[i], 1e-9);
    }
}

TEST(SolveSystem, ManufacturedPairConvergesFirstOrder) {
    const std::vector<SmoothCandidate> pair{quad(0.25, 1.0), quad(-0.1, 0.5)};
    const auto s = with_manufactured_rhs(builtins::system2(1.0, 1.0), pair);
    const auto box = Box::interval(-2, 2);
    std::vector<double> errs;
    for (double h : {0.1, 0.05, 0.025}) {
        const auto r = solve_system(s, box, h, {trace_boundary(pair[0]), trace_boundary(pair[1])});
        ASSERT_TRUE(r.success) << r.diagnostic;
        for (std::size_t n = 1; n < r.residual_history.size(); ++n)
            EXPECT_LE(r.residual_history[n], r.residual_history[n - 1] * (1 + 1e-9));
        errs.push_back(std::max(sup_error(r.fields[0], pair[0].value), sup_error(r.fields[1], pair[1].value)));
    }
    for (std::size_t k = 1; k < errs.size(); ++k) {
        EXPECT_GE(errs[k - 1] / errs[k], 1.5);
        EXPECT_LE(errs[k - 1] / errs[k], 2.5);
    }
}

TEST(SolveSystem, OrderedDataGivesOrderedComponents) {
    auto s = builtins::system2(1.0, 1.0);
    s.components[0].f = constant_field(0.0);
    s.components[1].f = constant_field(1.0);
    const auto bc = explicit_boundary(constant_field(0.0));
    const auto r = solve_system(s, Box::interval(-3, 3), 0.05, {bc, bc});
    ASSERT_TRUE(r.success);
    for (std::size_t i = 0; i < r.fields[0].values.size(); ++i) EXPECT_LE(r.fields[0].values[i], r.fields[1].values[i] + 1e-9);
}

TEST(SolveSystem, Validation) {
    const auto s = builtins::system2();
    const auto bc = explicit_boundary(constant_field(0.0));
    EXPECT_THROW(solve_system(s, Box::interval(-1, 1), 0.1, {bc}), std::invalid_argument);
    auto c = s;
    c.custom_coupling = [](const Vec& r) { return Vec(r.array().square()); };
    EXPECT_THROW(solve_system(c, Box::interval(-1, 1), 0.1, {bc, bc}), std::invalid_argument);
}
