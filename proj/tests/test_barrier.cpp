#include "viscompare/barrier.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/residual.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace viscompare;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

const BarrierWindow small_window{1e3, 2001};

// lambda u + |u'|^2 = f in R, no diffusion or drift.
ProblemSpec pure_hamiltonian(double lambda, ScalarField f) {
    ProblemSpec p = builtins::eq13(1, 2.0, std::move(f), lambda);
    p.name = "pure";
    p.op = {1, constant_matrix_field(Mat::Zero(1, 1)), zero_vector_field(1)};
    return p;
}

ProblemSpec without_h(ProblemSpec p) {
    p.H.reset();
    p.C0.reset();
    return p;
}

}  // namespace

TEST(BetaMu, Examples) {
    EXPECT_DOUBLE_EQ(beta_mu(0.5, 2.0, 1.0), 4.0);
    EXPECT_NEAR(beta_mu(1e-12, 2.0, 1.0), 2.0, 1e-10);
    EXPECT_EQ(beta_mu(0.3, 3.0, 0.0), 0.0);
    EXPECT_THROW(beta_mu(1.0, 2.0, 1.0), std::domain_error);
    EXPECT_THROW(beta_mu(0.0, 2.0, 1.0), std::domain_error);
}

TEST(BetaMu, BlowsUpAsMuToOne) {
    double prev = 0.0;
    for (double mu : {0.5, 0.9, 0.99, 0.999}) {
        const double b = beta_mu(mu, 2.0, 1.0);
        EXPECT_GT(b, prev);
        prev = b;
    }
    EXPECT_GT(prev, 1e3);
}

TEST(ConstructBarrier, StepTwoConstants) {
    const auto p = construct_barrier(builtins::eq13(), 0.5, small_window);
    EXPECT_DOUBLE_EQ(p.q_prime, 2.0);
    EXPECT_DOUBLE_EQ(p.C0_prime, 8.0);
    EXPECT_DOUBLE_EQ(p.eps, 0.25);
    EXPECT_DOUBLE_EQ(p.alpha, 1.0 / 32.0);
    EXPECT_DOUBLE_EQ(p.eps_prime, 1.0 / 128.0);
    EXPECT_DOUBLE_EQ(p.beta_mu, 4.0);
    EXPECT_TRUE(p.chain_holds());
    EXPECT_GE(p.C1, p.C_eps_prime / p.lambda + 1.0);
}

TEST(ConstructBarrier, ZeroDataGivesUnitC1) {
    const auto p = construct_barrier(pure_hamiltonian(1.0, constant_field(0.0)), 0.9, small_window);
    EXPECT_EQ(p.C_eps, 0.0);
    EXPECT_EQ(p.C_eps_prime, 0.0);
    EXPECT_DOUBLE_EQ(p.C1, 1.0);
}

TEST(ConstructBarrier, SublinearRhsGivesFiniteConstants) {
    const auto prob = builtins::eq13(1, 2.0, [](const Vec& x) { return bracket(x); });
    const auto p = construct_barrier(prob, 0.9, BarrierWindow{1e3, 10001});
    EXPECT_TRUE(std::isfinite(p.C_eps_prime));
    EXPECT_TRUE(std::isfinite(p.C1));
    EXPECT_TRUE(p.chain_holds());
    EXPECT_TRUE(verify_strict(prob, p, small_window.points(1)).passed);
}

TEST(ConstructBarrier, ChainHoldsAcrossParameters) {
    for (double lambda : {0.25, 1.0, 4.0})
        for (double q : {1.5, 2.0, 3.0})
            for (double mu : {0.5, 0.9, 0.99}) {
                const auto p = construct_barrier(builtins::eq13(1, q, {}, lambda), mu, small_window);
                EXPECT_TRUE(p.chain_holds()) << lambda << ' ' << q << ' ' << mu;
                EXPECT_LE(p.alpha, 0.99);
                EXPECT_GT(p.alpha, 0.0);
            }
}

TEST(ConstructBarrier, RefusesSGData) {
    try {
        construct_barrier(builtins::hje3(), 0.5, small_window);
        FAIL() << "expected HypothesisError";
    } catch (const HypothesisError& e) {
        EXPECT_EQ(e.predicate(), "b0 not in S_1");
        EXPECT_NE(std::string(e.what()).find("large-lambda"), std::string::npos);
    }
    EXPECT_THROW(construct_barrier(builtins::eq13(), 1.0, small_window), std::domain_error);
    EXPECT_THROW(construct_barrier(without_h(builtins::eq13()), 0.5, small_window), std::invalid_argument);
}

TEST(EvalBarrier, Properties) {
    BarrierParams p;
    p.mu = 0.9;
    p.alpha = 0.5;
    p.C1 = 3.0;
    p.q_prime = 2.0;
    const auto at0 = eval_barrier(p, Vec::Zero(2));
    EXPECT_NEAR(at0.value, 0.1 * 3.5, 1e-15);
    EXPECT_EQ(at0.gradient.norm(), 0.0);
    for (double x : {-5.0, 0.0, 7.0}) {
        const auto b = eval_barrier(p, v1(x));
        EXPECT_NEAR(b.hessian(0, 0), 2 * 0.1 * 0.5, 1e-14);
        EXPECT_NEAR(b.value, 0.1 * (3.0 + 0.5 * (1 + x * x)), 1e-13);
    }
    for (double mu : {0.99, 0.9999}) {
        p.mu = mu;
        for (double x = -10; x <= 10; x += 1) EXPECT_LE(eval_barrier(p, v1(x)).value, (1 - mu) * (3.0 + 0.5 * 101) + 1e-15);
    }
}

TEST(ExtremalResidual, ZeroWitnessIsZero) {
    const auto prob = pure_hamiltonian(1.0, constant_field(0.0));
    BarrierParams p;
    p.mu = 0.5;
    p.beta_mu = 4.0;
    EXPECT_EQ(extremal_residual(prob, p, 0.0, Vec::Zero(1), Mat::Zero(1, 1), v1(3.0)), 0.0);
}

TEST(ExtremalResidual, DifferenceOfClassicalSolutionsIsSubsolution) {
    const double lambda = 1.0, mu = 0.9;
    const auto prob = builtins::eq12(lambda);
    BarrierParams p;
    p.mu = mu;
    p.q = 2.0;
    p.beta_mu = beta_mu(mu, 2.0, 1.0);
    const auto u1 = builtins::zero(), u2 = builtins::eq12_u2(lambda);
    for (const Vec& x : line_grid(-10, 10, 401)) {
        const double w = mu * u2.value(x) - u1.value(x);
        const Vec g = mu * u2.gradient(x) - u1.gradient(x);
        const Mat h = mu * u2.hessian(x) - u1.hessian(x);
        EXPECT_LE(extremal_residual(prob, p, w, g, h, x), 1e-12);
    }
}

TEST(VerifyStrict, Examples) {
    const auto prob = builtins::eq13();
    const auto pts = small_window.points(1);
    for (double mu : {0.5, 0.9, 0.99}) {
        const auto p = construct_barrier(prob, mu, small_window);
        const auto r = verify_strict(prob, p, pts);
        EXPECT_TRUE(r.passed) << mu;
        EXPECT_GT(r.min_residual, 0.0);
    }

    // Zero data: residual lambda Phi - beta_mu |D Phi|^2 has closed-form minimum over s = <x>^2 >= 1:
    // (1-mu)[C1 + alpha s] - beta_mu (1-mu)^2 alpha^2 4 (s - 1) is affine in s with positive slope here.
    const auto zp = pure_hamiltonian(1.0, constant_field(0.0));
    const auto params = construct_barrier(zp, 0.9, small_window);
    const auto zr = verify_strict(zp, params, pts);
    EXPECT_TRUE(zr.passed);
    const double slope = 0.1 * params.alpha - params.beta_mu * 0.01 * params.alpha * params.alpha * 4.0;
    ASSERT_GT(slope, 0.0);
    EXPECT_NEAR(zr.min_residual, 0.1 * (params.C1 + params.alpha), 1e-12);
    EXPECT_NEAR(zr.argmin[0], 0.0, 1e-12);
}

TEST(VerifyStrict, StressRhsReportsArgmin) {
    auto prob = builtins::eq13(1, 2.0, [](const Vec& x) { return 10.0 * bracket_power(x, 2.0); });
    const auto p = construct_barrier(prob, 0.5, small_window);
    // Large positive f only helps the -(mu - 1) f term; flip the sign to stress it.
    prob.f = [](const Vec& x) { return -10.0 * bracket_power(x, 2.0); };
    const auto r = verify_strict(prob, p, small_window.points(1));
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.argmin.size(), 1);
    EXPECT_LT(r.min_residual, 0.0);
}

TEST(VerifyStrict, PassesForStrictProblems) {
    const std::vector<ProblemSpec> probs{builtins::eq13(), builtins::eq13(1, 3.0), builtins::eq12(2.0),
                                         builtins::eq13(1, 2.0, [](const Vec& x) { return std::sin(x[0]) - 2.0; })};
    for (const auto& prob : probs)
        for (double mu : {0.5, 0.99}) {
            const auto p = construct_barrier(prob, mu, small_window);
            EXPECT_TRUE(verify_strict(prob, p, small_window.points(1)).passed) << prob.name << ' ' << mu;
        }
    const auto ex1 = builtins::example1();
    const BarrierWindow w2{100, 101};
    const auto p = construct_barrier(ex1, 0.9, w2);
    EXPECT_TRUE(verify_strict(ex1, p, w2.points(2)).passed);
}

TEST(Lambda0, StrictDataNeedsNoLargeLambda) {
    const auto r = lambda0_for_SG(builtins::eq13(), 0.5, small_window);
    ASSERT_TRUE(r.found);
    double strict_rung = 0.0;
    for (double lam = 1.0 / 16.0; lam <= 1024.0 && strict_rung == 0.0; lam *= 2.0) {
        auto prob = builtins::eq13(1, 2.0, {}, lam);
        if (verify_strict(prob, construct_barrier(prob, 0.5, small_window), small_window.points(1)).passed)
            strict_rung = lam;
    }
    ASSERT_GT(strict_rung, 0.0);
    EXPECT_LE(r.lambda0, strict_rung);
}

TEST(Lambda0, TransportDrift) {
    const auto r = lambda0_for_SG(builtins::hje3(1.0, 1.0), 0.5, BarrierWindow{1e3, 4001});
    ASSERT_TRUE(r.found);
    EXPECT_TRUE(std::isfinite(r.lambda0));
    ASSERT_GE(r.rungs.size(), 2u);
    for (std::size_t k = 0; k + 1 < r.rungs.size(); ++k) EXPECT_FALSE(r.rungs[k].passed);
    EXPECT_TRUE(r.rungs.back().passed);
    EXPECT_EQ(r.rungs.back().lambda, r.lambda0);
}

TEST(Lambda0, BracketDiffusion) {
    const auto r = lambda0_for_SG(builtins::ex2(), 0.5, BarrierWindow{1e3, 4001});
    ASSERT_TRUE(r.found);
    EXPECT_TRUE(std::isfinite(r.lambda0));
}

TEST(Lambda0, NonincreasingWhenDriftShrinks) {
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {4.0, 2.0, 1.0, 0.5}) {
        const auto r = lambda0_for_SG(builtins::hje3(1.0, t), 0.5, small_window);
        ASSERT_TRUE(r.found) << t;
        EXPECT_LE(r.lambda0, prev) << t;
        prev = r.lambda0;
    }
}

TEST(LinearBarrier, ZeroData) {
    auto prob = without_h(pure_hamiltonian(1.0, constant_field(0.0)));
    const auto r = linear_case_barrier(prob, small_window);
    EXPECT_DOUBLE_EQ(r.params.alpha, 1.0);
    EXPECT_DOUBLE_EQ(r.params.C1, 1.0);
    EXPECT_TRUE(r.report.passed);
    EXPECT_TRUE(r.params.chain_holds());
}

TEST(LinearBarrier, SublinearRhs) {
    const auto prob = without_h(builtins::eq13(1, 2.0, [](const Vec& x) { return bracket(x); }));
    const auto r = linear_case_barrier(prob, small_window);
    EXPECT_TRUE(r.report.passed);
    EXPECT_TRUE(std::isfinite(r.params.C_eps));
}

TEST(LinearBarrier, SGCoefficientsNeedLargeLambda) {
    auto prob = without_h(builtins::hje3(1.0 / 16.0, 4.0));
    EXPECT_THROW(linear_case_barrier(prob, small_window), HypothesisError);
    const auto low = linear_case_barrier(prob, small_window, GrowthMode::Relaxed);
    EXPECT_FALSE(low.report.passed);
    const auto l0 = lambda0_for_SG(prob, 0.5, small_window);
    ASSERT_TRUE(l0.found);
    EXPECT_GT(l0.lambda0, prob.lambda);
    prob.lambda = l0.lambda0;
    EXPECT_TRUE(linear_case_barrier(prob, small_window, GrowthMode::Relaxed).report.passed);
}

TEST(SystemExtremalResidual, Examples) {
    const auto prob = builtins::eq13(1, 2.0, [](const Vec& x) { return std::sin(x[0]); });
    const auto params = construct_barrier(prob, 0.9, small_window);
    const auto ext = prob.extremal_operator();
    for (double x : {-3.0, 0.0, 2.5}) {
        const auto phi = eval_barrier(params, v1(x));
        const double scalar = extremal_residual(prob, params, phi.value, phi.gradient, phi.hessian, v1(x));
        EXPECT_DOUBLE_EQ(system_extremal_residual(prob.lambda, {ext}, {prob.f}, params, phi.value, phi.gradient,
                                                  phi.hessian, v1(x)),
                         scalar);
        EXPECT_DOUBLE_EQ(system_extremal_residual(prob.lambda, {ext, ext, ext}, {prob.f, prob.f, prob.f}, params,
                                                  phi.value, phi.gradient, phi.hessian, v1(x)),
                         scalar);
        // f1 < f2: the (1 - mu) f_k term is smallest for k = 1.
        const ScalarField f2 = [&](const Vec& y) { return prob.f(y) + 1.0; };
        EXPECT_DOUBLE_EQ(system_extremal_residual(prob.lambda, {ext, ext}, {prob.f, f2}, params, phi.value,
                                                  phi.gradient, phi.hessian, v1(x)),
                         scalar);
    }
    EXPECT_THROW(system_extremal_residual(1.0, {}, {}, params, 0.0, Vec::Zero(1), Mat::Zero(1, 1), v1(0)),
                 std::invalid_argument);
}

TEST(BarrierGrowth, SGButNotS) {
    const auto prob = builtins::eq13();
    for (double mu : {0.5, 0.9}) {
        const auto params = construct_barrier(prob, mu, small_window);
        const auto g = classify_growth([&](const Vec& x) { return eval_barrier(params, x).value; }, 1,
                                       GrowthExponent(params.q_prime));
        EXPECT_TRUE(g.in_SG());
        EXPECT_FALSE(g.in_S());
        EXPECT_NEAR(-g.shell_min_minus.back(), (1 - mu) * params.alpha, 1e-3);
    }
}
