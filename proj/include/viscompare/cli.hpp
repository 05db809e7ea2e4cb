#pragma once

#include "viscompare/report.hpp"
#include "viscompare/scenario.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace viscompare::cli {

using nlohmann::json;

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> s{"check-hypotheses", "classify-growth", "barrier",     "verify-classical",
                                            "solve",            "compare",         "gamma-pin",   "nonuniqueness",
                                            "system-solve"};
    return s;
}

struct Flags {
    std::string out;
    std::optional<double> h;
    std::vector<double> mu;
    std::vector<double> window;
    std::optional<double> tol;
};

class Runner {
public:
    Runner(Scenario s, Flags f, std::ostream& out) : s_(std::move(s)), flags_(std::move(f)), out_(out) {
        if (flags_.h) s_.h = *flags_.h;
        if (!flags_.mu.empty()) s_.mu = flags_.mu;
        if (!flags_.window.empty()) s_.growth.radii = flags_.window;
        dir_ = flags_.out.empty() ? s_.output : flags_.out;
    }

    /// Returns the failed predicate, empty on success.
    std::string run(const std::string& cmd) {
        std::filesystem::create_directories(dir_);
        report_ = {{"subcommand", cmd}, {"scenario", s_.id}};
        std::string failed;
        if (cmd == "check-hypotheses") failed = check_hypotheses_cmd();
        else if (cmd == "classify-growth") failed = classify_growth_cmd();
        else if (cmd == "barrier") failed = barrier_cmd();
        else if (cmd == "verify-classical") failed = verify_classical_cmd();
        else if (cmd == "solve") failed = solve_cmd();
        else if (cmd == "compare") failed = compare_cmd();
        else if (cmd == "gamma-pin") failed = gamma_pin_cmd();
        else if (cmd == "nonuniqueness") failed = nonuniqueness_cmd();
        else if (cmd == "system-solve") failed = system_solve_cmd();
        else throw std::invalid_argument("unknown subcommand '" + cmd + "'");
        report_["passed"] = failed.empty();
        if (!failed.empty()) report_["failed"] = failed;
        report::write_json(path("report.json"), report_);
        return failed;
    }

private:
    Scenario s_;
    Flags flags_;
    std::ostream& out_;
    std::string dir_;
    json report_;

    std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

    const ProblemSpec& problem() const {
        if (!s_.has_problem) throw ScenarioError("/problem", "this subcommand needs a scalar problem");
        return s_.problem;
    }

    const MonotoneSystem& system() const {
        if (!s_.system) throw ScenarioError("/system", "this subcommand needs a system");
        return *s_.system;
    }

    HypothesisOptions hyp_options() const {
        HypothesisOptions o;
        o.growth = s_.growth;
        o.window = s_.window;
        if (o.window.points_per_axis > 2001 && (s_.has_problem ? s_.problem.dim : 1) == 1) o.window.points_per_axis = 2001;
        return o;
    }

    std::string check_hypotheses_cmd() {
        const auto v = s_.system && !s_.has_problem ? check_hypotheses(*s_.system, hyp_options())
                                                   : check_hypotheses(problem(), hyp_options());
        report_["verdict"] = report::to_json(v);
        for (const auto& p : v.predicates) out_ << (p.passed ? "  pass " : "  FAIL ") << p.name << '\n';
        if (v.applies) {
            out_ << "verdict: " << v.theorem << " applies\n";
            return {};
        }
        if (!v.theorem.empty()) out_ << "route: " << v.theorem << " (not applicable)\n";
        return v.failed.empty() ? "no applicable theorem" : v.failed;
    }

    std::string classify_growth_cmd() {
        json res = json::object();
        auto add = [&](const std::string& name, const ScalarField& f, int dim, double r) {
            const auto g = classify_growth(f, dim, GrowthExponent(r), s_.growth);
            res[name] = report::to_json(g);
            out_ << name << " (r=" << r << "): S+ " << g.in_S_plus << " S- " << g.in_S_minus << " SG+ " << g.in_SG_plus
                 << " SG- " << g.in_SG_minus << '\n';
        };
        if (s_.has_problem) {
            const auto& p = s_.problem;
            const double qp = p.q_prime();
            add("f", p.f, p.dim, qp);
            const auto ext = p.extremal_operator();
            add("sigma0", [ext](const Vec& x) { return spectral_norm(evaluate_at(ext.sigma0, x)); }, p.dim, 1.0);
            add("b0", ext.b0, p.dim, 1.0);
            for (const auto& c : s_.candidates) add(c.candidate.name, c.candidate.value, p.dim, qp);
        } else {
            const auto& sys = system();
            for (int k = 0; k < sys.m(); ++k)
                add("f" + std::to_string(k), sys.components[static_cast<std::size_t>(k)].f, sys.dim, conjugate(sys.q));
        }
        report_["growth"] = res;
        return {};
    }

    void residual_csv(const std::string& name, const ProblemSpec& p, const BarrierParams& params) {
        const auto pts = params.window_points > 0 ? BarrierWindow{params.window_radius, params.window_points}.points(p.dim)
                                                  : s_.window.points(p.dim);
        const auto rep = verify_strict(p, params, pts, true);
        report::write_residual_csv(path(name), pts, rep.residuals);
    }

    std::string barrier_cmd() {
        const auto& p = problem();
        json entries = json::array();
        std::string failed;
        if (!p.has_hamiltonian()) {
            json e;
            GrowthMode mode = GrowthMode::Strict;
            LinearBarrierResult r;
            try {
                r = linear_case_barrier(p, s_.window, mode, 1.0, s_.growth);
            } catch (const HypothesisError& err) {
                mode = GrowthMode::Relaxed;
                e["strict_failure"] = err.predicate();
                r = linear_case_barrier(p, s_.window, mode, 1.0, s_.growth);
            }
            e["params"] = report::to_json(r.params);
            e["strictness"] = report::to_json(r.report);
            if (mode == GrowthMode::Relaxed) e["lambda0"] = report::to_json(lambda0_for_SG(p, 0.5, s_.window, s_.growth));
            residual_csv("residual_linear.csv", p, r.params);
            out_ << "linear barrier: min residual " << r.report.min_residual << '\n';
            if (!r.report.passed) failed = "verify_strict";
            entries.push_back(e);
        } else {
            for (double mu : s_.mu) {
                json e{{"mu", mu}};
                GrowthMode mode = GrowthMode::Strict;
                BarrierParams params;
                try {
                    params = construct_barrier(p, mu, s_.window, mode, s_.growth);
                } catch (const HypothesisError& err) {
                    mode = GrowthMode::Relaxed;
                    e["strict_failure"] = err.predicate();
                    params = construct_barrier(p, mu, s_.window, mode, s_.growth);
                }
                const auto rep = verify_strict(p, params, s_.window.points(p.dim));
                e["params"] = report::to_json(params);
                e["strictness"] = report::to_json(rep);
                std::string why;
                if (mode == GrowthMode::Relaxed) {
                    const auto l0 = lambda0_for_SG(p, mu, s_.window, s_.growth);
                    e["lambda0"] = report::to_json(l0);
                    out_ << "mu " << mu << ": relaxed, lambda0 " << l0.lambda0 << '\n';
                    std::ostringstream os;
                    os << " (lambda " << p.lambda << ", lambda0 " << l0.lambda0 << ")";
                    why = os.str();
                }
                out_ << "mu " << mu << ": min residual " << rep.min_residual << (rep.passed ? " (strict)" : " (not strict)")
                     << '\n';
                std::ostringstream name;
                name << "residual_mu" << mu << ".csv";
                residual_csv(name.str(), p, params);
                if (!rep.passed && failed.empty()) failed = "verify_strict" + why;
                entries.push_back(e);
            }
        }
        report_["barriers"] = entries;
        return failed;
    }

    std::string verify_classical_cmd() {
        const auto& p = problem();
        std::vector<CandidateSpec> cands = s_.candidates;
        if (s_.manufactured) cands.push_back({*s_.manufactured, SignClass::Solution});
        if (cands.empty()) return "candidates present";
        const auto grid = cube_grid(p.dim, s_.verify_radius, p.dim == 1 ? s_.verify_points : std::min(s_.verify_points, 201));
        json res = json::array();
        std::string failed;
        for (const auto& c : cands) {
            auto rep = verify_solution(p, c.candidate, grid, flags_.tol ? *flags_.tol : -1.0);
            json e = report::to_json(rep);
            if (c.expect) {
                e["expected"] = to_string(*c.expect);
                if (rep.classification != *c.expect && failed.empty()) failed = "classification of " + c.candidate.name;
            }
            out_ << c.candidate.name << ": " << to_string(rep.classification) << ", max |residual| " << rep.max_abs_residual
                 << '\n';
            report::write_residual_csv(path("residual_" + c.candidate.name + ".csv"), grid, rep.residuals);
            res.push_back(e);
        }
        report_["candidates"] = res;
        return failed;
    }

    std::string solve_cmd() {
        const auto& p = problem();
        const auto bc = resolve_boundary(s_, s_.boundary, &p, s_.mu.empty() ? 0.5 : s_.mu.front());
        const auto r = solve(p, s_.box, s_.h, bc, s_.scheme);
        report_["solve"] = report::to_json(r);
        report_["boundary"] = bc.label;
        if (s_.manufactured) report_["sup_error"] = report::num(sup_error(r.field, s_.manufactured->value));
        report::write_field_csv(path("field_u.csv"), r.field);
        out_ << "solve: " << (r.report.success ? "converged" : "failed") << ", residual " << r.report.final_residual_norm
             << ", u(center) " << r.field.at_center() << '\n';
        if (!r.report.success) return "solver convergence (" + r.report.diagnostic + ")";
        if (!r.report.monotonicity_certificate) return "monotonicity certificate";
        return {};
    }

    std::string compare_cmd() {
        const auto& p = problem();
        const auto low = resolve_boundary(s_, s_.boundary, &p, s_.mu.empty() ? 0.5 : s_.mu.front());
        BoundaryCondition high = low;
        const double db = s_.boundary_shift, df = s_.f_shift;
        high.g = [g = low.g, db](const Vec& x) { return g(x) + db; };
        const ScalarField f_high = [f = p.f, df](const Vec& x) { return f(x) + df; };
        const auto r = comparison_check(p, s_.box, s_.h, p.f, f_high, low, high, s_.scheme);
        report_["comparison"] = report::to_json(r);
        report::write_field_csv(path("field_low.csv"), r.low.field);
        report::write_field_csv(path("field_high.csv"), r.high.field);
        out_ << "compare: " << r.violations << " violations, min gap " << r.min_gap << ", certificate " << r.certificate
             << '\n';
        if (!r.low.report.success || !r.high.report.success) return "solver convergence";
        if (!r.ordered) return "nodewise order";
        if (!r.certificate) return "monotonicity certificate";
        return {};
    }

    std::string gamma_pin_cmd() {
        const auto& p = problem();
        const auto bc = resolve_boundary(s_, s_.boundary, &p);
        const double tol = flags_.tol ? *flags_.tol : s_.pin_tolerance;
        const auto r = gamma_pinning_check(p, s_.box, s_.levels, bc, s_.scheme, tol);
        report_["gamma_pin"] = report::to_json(r);
        for (const auto& l : r.levels) out_ << "h " << l.h << ": deviation " << l.deviation << '\n';
        if (r.vacuous) return "zero set inside box";
        if (!r.decreasing) return "deviation decreasing under refinement";
        if (!r.passed) return "final deviation <= tolerance";
        return {};
    }

    std::string nonuniqueness_cmd() {
        if (s_.builtin != "eq12" && s_.builtin != "hje3" && s_.builtin != "ex2")
            throw ScenarioError("/builtin", "nonuniqueness needs builtin eq12, hje3 or ex2");
        const auto r = nonuniqueness_demo(s_.builtin, s_.box, s_.h, s_.lambda, s_.t, s_.scheme);
        report_["nonuniqueness"] = report::to_json(r);
        for (const auto& sol : r.solutions) {
            report::write_field_csv(path("field_" + sol.name + ".csv"), sol.solve.field);
            out_ << sol.name << ": sup error " << sol.sup_error << ", in " << r.uniqueness_class << ": "
                 << (sol.in_uniqueness_class ? "yes" : "no") << '\n';
        }
        if (!r.distinct) return "solutions distinct";
        if (!r.exactly_one_in_class) return "exactly one solution in uniqueness class";
        return {};
    }

    std::string system_solve_cmd() {
        const auto& sys = system();
        std::vector<BoundaryCondition> bcs;
        for (int k = 0; k < sys.m(); ++k) {
            const auto uk = static_cast<std::size_t>(k);
            if (uk < s_.boundaries.size() && s_.boundaries[uk].type != "auto")
                bcs.push_back(resolve_boundary(s_, s_.boundaries[uk], nullptr));
            else if (uk < s_.system_manufactured.size())
                bcs.push_back(trace_boundary(s_.system_manufactured[uk]));
            else
                bcs.push_back(explicit_boundary(constant_field(0.0), "zero"));
        }
        const auto r = solve_system(sys, s_.box, s_.h, bcs, s_.scheme);
        report_["system"] = report::to_json(r);
        json errs = json::array();
        for (std::size_t k = 0; k < r.fields.size(); ++k) {
            report::write_field_csv(path("field_" + std::to_string(k) + ".csv"), r.fields[k]);
            if (k < s_.system_manufactured.size()) errs.push_back(report::num(sup_error(r.fields[k], s_.system_manufactured[k].value)));
        }
        if (!errs.empty()) report_["sup_errors"] = errs;
        out_ << "system: " << (r.success ? "converged" : "failed") << " after " << r.sweeps << " sweeps\n";
        if (!r.success) return "system convergence (" + r.diagnostic + ")";
        return {};
    }
};

/// Exit codes: 0 success, 1 failed predicate or solver diagnostic, 2 usage or scenario errors.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Comparison-principle checks, barriers and monotone solves for degenerate elliptic PDEs", "viscompare"};
    std::string cmd, file;
    Flags flags;
    double h = 0.0, tol = 0.0;
    app.set_help_flag("--help", "print this help and exit");
    app.add_option("subcommand", cmd, "one of: check-hypotheses, classify-growth, barrier, verify-classical, solve, "
                                      "compare, gamma-pin, nonuniqueness, system-solve")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    app.add_option("scenario", file, "scenario JSON file")->required();
    app.add_option("--out", flags.out, "output directory (default: the scenario's output field)");
    auto* h_opt = app.add_option("--h", h, "grid spacing")->check(CLI::PositiveNumber);
    app.add_option("--mu", flags.mu, "comma-separated mu values in (0,1)")->delimiter(',')->check(CLI::Range(0.0, 1.0));
    app.add_option("--window", flags.window, "comma-separated growth radii")->delimiter(',')->check(CLI::PositiveNumber);
    auto* tol_opt = app.add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    if (*h_opt) flags.h = h;
    if (*tol_opt) flags.tol = tol;
    for (double m : flags.mu)
        if (!(m > 0.0 && m < 1.0)) {
            err << "error: --mu values must lie strictly inside (0,1)\n";
            return 2;
        }

    Scenario s;
    try {
        s = load_scenario(file);
    } catch (const ScenarioError& e) {
        err << "error: " << file << ": " << e.what() << '\n';
        return 2;
    }
    try {
        Runner runner(std::move(s), flags, out);
        const std::string failed = runner.run(cmd);
        if (!failed.empty()) {
            err << "FAILED: " << failed << '\n';
            return 1;
        }
        return 0;
    } catch (const ScenarioError& e) {
        err << "error: " << file << ": " << e.what() << '\n';
        return 2;
    } catch (const HypothesisError& e) {
        err << "FAILED: " << e.predicate() << " (" << e.what() << ")\n";
        return 1;
    } catch (const DiscretizationError& e) {
        err << "FAILED: monotone discretization (" << e.what() << ")\n";
        return 1;
    } catch (const std::exception& e) {
        err << "FAILED: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace viscompare::cli
