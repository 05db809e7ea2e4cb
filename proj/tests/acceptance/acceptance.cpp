#include "viscompare/viscompare.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace viscompare;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool passed = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (passed) detail << what;
            passed = false;
        }
    }
};

Vec v1(double a) { return Vec::Constant(1, a); }

Mat random_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g;
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
}

GameHamiltonian table_game(std::vector<std::vector<Mat>> sig, std::vector<std::vector<Mat>> tau) {
    GameHamiltonian g;
    g.beta_count = static_cast<int>(sig.size());
    g.alpha_count = static_cast<int>(sig.front().size());
    g.sigma = [sig](const Vec&, int a, int b) { return sig[b][a]; };
    g.tau = [tau](const Vec&, int a, int b) { return tau[b][a]; };
    return g;
}

// p(x) = sum c_k x^k with analytic first and second derivatives.
SmoothCandidate polynomial(std::vector<double> c) {
    auto val = [c](double x, int d) {
        double s = 0.0;
        for (std::size_t k = static_cast<std::size_t>(d); k < c.size(); ++k) {
            double f = 1.0;
            for (int j = 0; j < d; ++j) f *= static_cast<double>(k - static_cast<std::size_t>(j));
            s += c[k] * f * std::pow(x, static_cast<double>(k) - d);
        }
        return s;
    };
    return make_candidate(
        "poly", [val](const Vec& x) { return val(x[0], 0); },
        [val](const Vec& x) { return Vec(Vec::Constant(1, val(x[0], 1))); },
        [val](const Vec& x) { return Mat(Mat::Constant(1, 1, val(x[0], 2))); });
}

SmoothCandidate cosine() {
    return make_candidate(
        "cos", [](const Vec& x) { return std::cos(x[0]); },
        [](const Vec& x) { return Vec(Vec::Constant(1, -std::sin(x[0]))); },
        [](const Vec& x) { return Mat(Mat::Constant(1, 1, -std::cos(x[0]))); });
}

SmoothCandidate square_1d() {
    return make_candidate(
        "x^2", [](const Vec& x) { return x[0] * x[0]; }, [](const Vec& x) { return Vec(Vec::Constant(1, 2 * x[0])); },
        [](const Vec&) { return Mat(Mat::Constant(1, 1, 2.0)); });
}

// sin x1 cos x2 on R^2.
SmoothCandidate sin_cos_2d() {
    return make_candidate(
        "sin*cos", [](const Vec& x) { return std::sin(x[0]) * std::cos(x[1]); },
        [](const Vec& x) {
            Vec g(2);
            g << std::cos(x[0]) * std::cos(x[1]), -std::sin(x[0]) * std::sin(x[1]);
            return g;
        },
        [](const Vec& x) {
            Mat H(2, 2);
            const double s = std::sin(x[0]) * std::cos(x[1]);
            H << -s, -std::cos(x[0]) * std::sin(x[1]), -std::cos(x[0]) * std::sin(x[1]), -s;
            return H;
        });
}

SmoothCandidate quad(double a, double d) {
    return make_candidate(
        "quad", [a, d](const Vec& x) { return a * x[0] * x[0] + d; },
        [a](const Vec& x) { return Vec(Vec::Constant(1, 2 * a * x[0])); },
        [a](const Vec&) { return Mat(Mat::Constant(1, 1, 2 * a)); });
}

bool ratios_first_order(const std::vector<double>& errs, std::ostringstream& os) {
    bool ok = true;
    for (std::size_t k = 1; k < errs.size(); ++k) {
        const double r = errs[k - 1] / errs[k];
        os << (k > 1 ? "," : "") << r;
        ok = ok && r >= 1.5 && r <= 2.5;
    }
    return ok;
}

// 1: closed-form residuals on [-10, 10].
Outcome closed_forms() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto grid = line_grid(-10, 10, 2001);
    double worst = 0.0;
    auto certify = [&](const ProblemSpec& p, const SmoothCandidate& u, const std::string& label) {
        const auto r = verify_solution(p, u, grid);
        worst = std::max(worst, r.max_abs_residual);
        o.require(r.max_abs_residual <= 1e-10, label + " residual " + std::to_string(r.max_abs_residual));
    };
    for (double lambda : {0.5, 1.0, 2.0}) {
        certify(builtins::eq12(lambda), builtins::zero(), "eq12 u1");
        certify(builtins::eq12(lambda), builtins::eq12_u2(lambda), "eq12 u2");
    }
    for (double t : {-1.0, -2.0}) {
        certify(builtins::hje3(1.0, t), builtins::zero(), "hje3 u1");
        certify(builtins::hje3(1.0, t), builtins::hje3_u2(1.0, t), "hje3 u2");
    }
    certify(builtins::ex2(), builtins::zero(), "ex2 v1");
    certify(builtins::ex2(), builtins::ex2_v2(), "ex2 v2");
    const double dt = seconds_since(t0);
    o.require(dt < 1.0, "runtime " + std::to_string(dt) + " s");
    o.detail << (o.passed ? "" : "; ") << "max residual " << worst << ", " << dt << " s";
    return o;
}

// 2: mu-scaling identity of the residual for model-form problems.
Outcome homogeneity_identity() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), mu_d(0.0, 1.0), x_d(-5.0, 5.0);
    const std::vector<ProblemSpec> probs{builtins::eq12(), builtins::eq13(1, 3.0, [](const Vec& x) { return std::cos(x[0]); }),
                                         builtins::hje3(1.0, 1.0), builtins::ex2()};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto& p = probs[static_cast<std::size_t>(i) % probs.size()];
        const auto c = polynomial({coef(rng), coef(rng), coef(rng), coef(rng)});
        double mu = mu_d(rng);
        while (!(mu > 0.0)) mu = mu_d(rng);
        const Vec x = v1(x_d(rng));
        const double r = pde_residual(p, c, x);
        const double dev = std::abs(mu_subsolution_residual(p, c, mu, x) - mu * r) / std::max(1.0, std::abs(r));
        worst = std::max(worst, dev);
    }
    o.require(worst <= 1e-12, "deviation " + std::to_string(worst));
    o.detail << (o.passed ? "" : "; ") << "max scaled deviation " << worst << " over 1000 triples";
    return o;
}

// 3: strict barrier for eq13 with q = 2, lambda = 1.
Outcome barrier_strictness() {
    Outcome o;
    const BarrierWindow window{1e3, 10001};
    const auto pts = window.points(1);
    const std::vector<std::pair<std::string, ScalarField>> fs{
        {"0", constant_field(0.0)},
        {"<x>", [](const Vec& x) { return bracket(x); }},
        {"5<x>", [](const Vec& x) { return 5.0 * bracket(x); }}};
    double least = std::numeric_limits<double>::infinity();
    for (const auto& [name, f] : fs)
        for (double mu : {0.5, 0.9, 0.99}) {
            const auto p = builtins::eq13(1, 2.0, f, 1.0);
            const auto params = construct_barrier(p, mu, window);
            const auto r = verify_strict(p, params, pts);
            const std::string tag = "f=" + name + " mu=" + std::to_string(mu);
            o.require(r.passed, tag + " min residual " + std::to_string(r.min_residual));
            o.require(params.chain_holds(), tag + " inequality chain");
            o.require(params.eps == 0.25 && params.alpha == 1.0 / 32.0 && params.C0_prime == 8.0,
                      tag + " constants eps " + std::to_string(params.eps) + " alpha " + std::to_string(params.alpha) +
                          " C0' " + std::to_string(params.C0_prime));
            least = std::min(least, r.min_residual);
        }
    o.detail << (o.passed ? "" : "; ") << "least min residual " << least << " over 9 barriers";
    return o;
}

// 4: lambda0 ladder on relaxed-growth data.
Outcome lambda0_ladder() {
    Outcome o;
    const BarrierWindow window{};
    const double mu = 0.5;
    const std::vector<ProblemSpec> probs{builtins::hje3(1.0, 1.0), builtins::ex2()};
    for (const auto& p : probs) {
        const auto rep = lambda0_for_SG(p, mu, window);
        o.require(rep.found && rep.lambda0 <= std::ldexp(1.0, 10), p.name + " lambda0 not found below 2^10");
        if (!rep.found) continue;
        ProblemSpec low = p;
        low.lambda = rep.lambda0 / 4.0;
        if (!low.C0 && low.has_hamiltonian()) low.C0 = estimate_C0(*low.H, low.dim, window.points(low.dim));
        const auto params = construct_barrier(low, mu, window, GrowthMode::Relaxed, {}, false);
        const auto r = verify_strict(low, params, window.points(low.dim));
        o.require(!r.passed, p.name + " still strict at lambda0/4");
        o.detail << (o.detail.tellp() > 0 ? ", " : "") << p.name << " lambda0 " << rep.lambda0 << " (min residual at lambda0/4 "
                 << r.min_residual << ")";
    }
    return o;
}

// 5: growth dichotomy of the two-solution examples.
Outcome growth_dichotomy() {
    Outcome o;
    const double lambda = 1.0;
    const auto gu = classify_growth(builtins::eq12_u2(lambda).value, 1, GrowthExponent(2.0));
    o.require(gu.in_S_minus && !gu.in_S_plus, "u2 not in S2- minus S2+");
    const double su = gu.shell_min_plus.back();
    o.require(gu.radii_used.back() == 1e4 && std::abs(su + lambda / 4.0) <= 1e-3, "u2 surrogate " + std::to_string(su));
    const auto gv = classify_growth(builtins::ex2_v2().value, 1, GrowthExponent(2.0));
    o.require(gv.in_SG() && !gv.in_S(), "v2 not in SG2 minus S2");
    const double sv = gv.shell_min_plus.back();
    o.require(gv.radii_used.back() == 1e4 && std::abs(sv - 0.25) <= 1e-3, "v2 surrogate " + std::to_string(sv));
    o.detail << (o.passed ? "" : "; ") << "u2 surrogate " << su << ", v2 surrogate " << sv;
    return o;
}

// 6: discrete comparison on random ordered data.
Outcome discrete_comparison() {
    Outcome o;
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
    std::size_t violations = 0;
    int certified = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const double a = u(rng), w = 0.5 + 2 * pos(rng), c = u(rng), s = pos(rng), d = pos(rng), e = pos(rng), g = 2 * u(rng);
        const ScalarField f_lo = [=](const Vec& x) { return s * bracket(x) + a * std::sin(w * x[0]) + c; };
        const ScalarField f_hi = [=](const Vec& x) { return f_lo(x) + d * (1 + std::cos(w * x[0])); };
        const auto p = builtins::eq13(1, 2.0, f_lo, 0.5 + pos(rng));
        const auto r = comparison_check(p, Box::interval(-5, 5), 0.02, f_lo, f_hi, explicit_boundary(constant_field(g)),
                                        explicit_boundary(constant_field(g + e)));
        violations += r.violations;
        certified += r.certificate ? 1 : 0;
        o.require(r.ordered, "instance " + std::to_string(inst) + " violates");
        o.require(r.certificate, "instance " + std::to_string(inst) + " uncertified");
    }
    o.detail << (o.passed ? "" : "; ") << violations << " violations, " << certified << "/50 certificates";
    return o;
}

// 7: first-order manufactured convergence.
Outcome manufactured_convergence() {
    Outcome o;
    struct Case {
        SmoothCandidate u;
        ProblemSpec p;
        Box box;
    };
    const std::vector<Case> cases{{cosine(), with_manufactured_rhs(builtins::eq13(), cosine()), Box::interval(-3, 3)},
                                  {square_1d(), with_manufactured_rhs(builtins::eq13(), square_1d()), Box::interval(-2, 2)},
                                  {sin_cos_2d(), with_manufactured_rhs(builtins::eq13(2), sin_cos_2d()), Box::square(1.0)}};
    for (const auto& c : cases) {
        std::vector<double> errs;
        double slowest = 0.0;
        for (double h : {0.1, 0.05, 0.025}) {
            const auto t0 = Clock::now();
            const auto r = solve(c.p, c.box, h, trace_boundary(c.u));
            slowest = std::max(slowest, seconds_since(t0));
            o.require(r.report.success, c.u.name + " solve failed at h=" + std::to_string(h));
            errs.push_back(sup_error(r.field, c.u.value));
        }
        std::ostringstream rs;
        const bool ok = ratios_first_order(errs, rs);
        o.require(ok, c.u.name + " ratios " + rs.str());
        o.require(slowest < 10.0, c.u.name + " solve took " + std::to_string(slowest) + " s");
        o.detail << (o.detail.tellp() > 0 ? "; " : "") << c.u.name << " ratios " << rs.str();
    }
    return o;
}

// 8: pinning on the zero set of a sign-switching coefficient.
Outcome gamma_pinning() {
    Outcome o;
    const auto p = builtins::signswitch();
    const auto r = gamma_pinning_check(p, Box::interval(-1, 1), {0.1, 0.05, 0.025},
                                       explicit_boundary(builtins::signswitch_solution()));
    o.require(!r.vacuous, "empty zero set");
    std::vector<double> dev;
    for (const auto& l : r.levels) dev.push_back(std::abs(l.value_at_first - 1.0));
    bool decreasing = dev.size() == 3;
    for (std::size_t k = 1; k < dev.size(); ++k) decreasing = decreasing && dev[k] < dev[k - 1];
    o.require(decreasing, "|u(0) - 1| not decreasing");
    o.require(!dev.empty() && dev.back() <= 0.05, "final |u(0) - 1| above 0.05");
    o.detail << (o.passed ? "" : "; ") << "|u(0) - 1|:";
    for (double d : dev) o.detail << ' ' << d;
    return o;
}

// 9: game Hamiltonian.
Outcome game_hamiltonian() {
    Outcome o;
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> size(1, 4);
    double worst_bf = 0.0, worst_dec = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const bool decoupled = pass == 1;
        for (int inst = 0; inst < 1000; ++inst) {
            const int N = 1 + inst % 2, na = size(rng), nb = size(rng), n = size(rng);
            std::vector<Mat> sb, ta;
            for (int b = 0; b < nb; ++b) sb.push_back(random_matrix(rng, N, n));
            for (int a = 0; a < na; ++a) ta.push_back(random_matrix(rng, N, n));
            std::vector<std::vector<Mat>> sig(nb, std::vector<Mat>(na)), tau = sig;
            for (int b = 0; b < nb; ++b)
                for (int a = 0; a < na; ++a) {
                    sig[b][a] = decoupled ? sb[b] : random_matrix(rng, N, n);
                    tau[b][a] = decoupled ? ta[a] : random_matrix(rng, N, n);
                }
            const Vec x = random_matrix(rng, N, 1), xi = random_matrix(rng, N, 1);
            const double h = eval(table_game(sig, tau), x, xi);
            if (!decoupled) {
                double best = std::numeric_limits<double>::infinity();
                for (int b = 0; b < nb; ++b) {
                    double inner = -std::numeric_limits<double>::infinity();
                    for (int a = 0; a < na; ++a)
                        inner = std::max(inner, (sig[b][a].transpose() * xi).squaredNorm() - (tau[b][a].transpose() * xi).squaredNorm());
                    best = std::min(best, inner);
                }
                worst_bf = std::max(worst_bf, std::abs(h - best) / (1 + std::abs(best)));
            } else {
                double smin = std::numeric_limits<double>::infinity(), tmin = smin;
                for (const Mat& s : sb) smin = std::min(smin, (s.transpose() * xi).squaredNorm());
                for (const Mat& t : ta) tmin = std::min(tmin, (t.transpose() * xi).squaredNorm());
                worst_dec = std::max(worst_dec, std::abs(h - (smin - tmin)) / (1 + std::abs(smin) + std::abs(tmin)));
            }
        }
    }
    o.require(worst_bf <= 1e-12, "brute force deviation " + std::to_string(worst_bf));
    o.require(worst_dec <= 1e-12, "decoupled identity deviation " + std::to_string(worst_dec));

    const auto g = builtins::game_hamiltonian();
    const double delta = 0.5;
    std::vector<Vec> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(random_matrix(rng, 2, 1));
    const auto rep = check_H2prime(g, constant_field(delta), 2.25, xs);
    o.require(rep.passed, "H2' check failed: " + rep.failure);
    int samples = 0;
    for (const auto& w : rep.witnesses)
        for (int k = 0; k < 20; ++k) {
            const Vec xi = random_matrix(rng, 2, 1);
            double lower = std::numeric_limits<double>::infinity();
            for (int b = 0; b < g.beta_count; ++b) {
                const int a = w.alpha_for_beta[static_cast<std::size_t>(b)];
                lower = std::min(lower, game_payoff(g, w.x, xi, a, b));
            }
            ++samples;
            o.require(lower >= delta * xi.squaredNorm() - 1e-12, "witness payoff below delta|xi|^2");
            o.require(eval(g, w.x, xi) >= lower - 1e-12, "H below witness payoff");
        }
    o.detail << (o.passed ? "" : "; ") << "brute force " << worst_bf << ", decoupled " << worst_dec << ", " << samples
             << " witness samples";
    return o;
}

// 10: monotone systems.
Outcome systems() {
    Outcome o;
    MonotoneSystem s = builtins::system2(1.0, 0.0);
    s.coupling = Mat::Zero(2, 2);
    s.components[0].f = constant_field(1.0);
    s.components[1].f = [](const Vec& x) { return std::cos(x[0]); };
    const auto box = Box::interval(-2, 2);
    const std::vector<BoundaryCondition> bcs{explicit_boundary(constant_field(0.0)), explicit_boundary(constant_field(1.0))};
    const auto sys = solve_system(s, box, 0.05, bcs);
    o.require(sys.success, "decoupled system failed: " + sys.diagnostic);
    double gap = 0.0;
    for (std::size_t k = 0; k < 2 && sys.success; ++k) {
        ProblemSpec p = builtins::eq12();
        p.f = s.components[k].f;
        const auto sc = solve(p, box, 0.05, bcs[k]);
        for (std::size_t i = 0; i < sc.field.values.size(); ++i)
            gap = std::max(gap, std::abs(sys.fields[k].values[i] - sc.field.values[i]));
    }
    o.require(gap == 0.0, "decoupled differs from scalar by " + std::to_string(gap));

    auto mean = builtins::system2(1.0, 0.0);
    mean.components.resize(3, mean.components.front());
    mean.coupling = builtins::mean_coupling(3, 2.0);
    const auto good = check_M(mean, make_rs_samples(3, 1000), make_point_samples(1, 20));
    o.require(good.passed, "(M) fails on mean coupling");
    auto bad = builtins::system2(1.5, 0.0);
    bad.coupling = -2.0 * bad.lambda * Mat::Identity(2, 2);
    const auto neg = check_M(bad, make_rs_samples(2, 100), make_point_samples(1, 10));
    o.require(!neg.passed && neg.witness_j >= 0 && neg.witness_r.size() == 2, "(M) misses the -2 lambda coupling");

    const std::vector<SmoothCandidate> pair{quad(0.25, 1.0), quad(-0.1, 0.5)};
    const auto ms = with_manufactured_rhs(builtins::system2(1.0, 1.0), pair);
    std::vector<double> errs;
    for (double h : {0.1, 0.05, 0.025}) {
        const auto r = solve_system(ms, box, h, {trace_boundary(pair[0]), trace_boundary(pair[1])});
        o.require(r.success, "manufactured pair failed at h=" + std::to_string(h));
        errs.push_back(std::max(sup_error(r.fields[0], pair[0].value), sup_error(r.fields[1], pair[1].value)));
    }
    std::ostringstream rs;
    o.require(ratios_first_order(errs, rs), "pair ratios " + rs.str());
    o.detail << (o.passed ? "" : "; ") << "decoupled gap " << gap << ", pair ratios " << rs.str();
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"closed-form certification", closed_forms},
        {"homogeneity identity", homogeneity_identity},
        {"barrier strictness", barrier_strictness},
        {"lambda0 ladder", lambda0_ladder},
        {"growth dichotomy", growth_dichotomy},
        {"discrete comparison", discrete_comparison},
        {"manufactured convergence", manufactured_convergence},
        {"gamma pinning", gamma_pinning},
        {"game hamiltonian", game_hamiltonian},
        {"monotone systems", systems},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail << "exception: " << e.what();
        }
        failures += o.passed ? 0 : 1;
        std::cout << (o.passed ? "PASS" : "FAIL") << ' ' << (i + 1) << ' ' << criteria[i].first << ": " << o.detail.str()
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
