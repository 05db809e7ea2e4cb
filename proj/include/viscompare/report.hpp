#pragma once

#include "viscompare/hypotheses.hpp"
#include "viscompare/residual.hpp"
#include "viscompare/solver.hpp"
#include "viscompare/systems.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// JSON and CSV serialization of reports. Wall-clock times are left out so that
// identical inputs give byte-identical output.
namespace viscompare::report {

using nlohmann::json;

inline json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline json vec(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
    return a;
}

inline json vec(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

inline json to_json(const GrowthReport& g) {
    return {{"r", num(g.r)},
            {"in_S_plus", g.in_S_plus},
            {"in_S_minus", g.in_S_minus},
            {"in_SG_plus", g.in_SG_plus},
            {"in_SG_minus", g.in_SG_minus},
            {"in_S", g.in_S()},
            {"in_SG", g.in_SG()},
            {"plus_inconclusive", g.plus_inconclusive},
            {"minus_inconclusive", g.minus_inconclusive},
            {"liminf_plus", num(g.liminf_plus)},
            {"liminf_minus", num(g.liminf_minus)},
            {"radii", vec(g.radii_used)},
            {"shell_min_plus", vec(g.shell_min_plus)},
            {"shell_min_minus", vec(g.shell_min_minus)},
            {"note", g.verdict_note}};
}

inline json to_json(const BarrierParams& p) {
    return {{"kind", p.kind == BarrierKind::Convex ? "convex" : "linear"},
            {"mode", p.mode == GrowthMode::Strict ? "strict" : "relaxed"},
            {"mu", num(p.mu)},
            {"q", num(p.q)},
            {"q_prime", num(p.q_prime)},
            {"lambda", num(p.lambda)},
            {"C0", num(p.C0)},
            {"C0_prime", num(p.C0_prime)},
            {"eps", num(p.eps)},
            {"eps_prime", num(p.eps_prime)},
            {"C_eps", num(p.C_eps)},
            {"C_eps_prime", num(p.C_eps_prime)},
            {"alpha", num(p.alpha)},
            {"C1", num(p.C1)},
            {"beta_mu", num(p.beta_mu)},
            {"c1_reference_term", num(p.c1_reference_term)},
            {"c1_deficit_term", num(p.c1_deficit_term)},
            {"window_radius", num(p.window_radius)},
            {"window_points", p.window_points},
            {"chain_holds", p.chain_holds()}};
}

inline json to_json(const StrictnessReport& r) {
    return {{"passed", r.passed}, {"min_residual", num(r.min_residual)}, {"argmin", vec(r.argmin)}};
}

inline json to_json(const Lambda0Report& r) {
    json rungs = json::array();
    for (const auto& g : r.rungs) rungs.push_back({{"lambda", num(g.lambda)}, {"min_residual", num(g.min_residual)}, {"passed", g.passed}});
    return {{"found", r.found}, {"lambda0", num(r.lambda0)}, {"rungs", rungs}, {"diagnostics", r.diagnostics}};
}

inline json to_json(const ResidualReport& r) {
    return {{"candidate", r.candidate},
            {"max_abs_residual", num(r.max_abs_residual)},
            {"argmax", vec(r.argmax)},
            {"min_residual", num(r.min_residual)},
            {"max_residual", num(r.max_residual)},
            {"tol", num(r.tol)},
            {"classification", to_string(r.classification)}};
}

inline json to_json(const SolveReport& r) {
    return {{"success", r.success},
            {"iterations", r.iterations},
            {"outer_iterations", r.outer_iterations},
            {"policy_iterations", r.policy_iterations},
            {"final_residual_norm", num(r.final_residual_norm)},
            {"residual_history", vec(r.residual_history)},
            {"policy_residual_history", vec(r.policy_residual_history)},
            {"monotonicity_certificate", r.monotonicity_certificate},
            {"lf", vec(r.lf)},
            {"lf_required", vec(r.lf_required)},
            {"diagnostic", r.diagnostic}};
}

inline json grid_json(const Grid& g) {
    json n = json::array();
    for (int k = 0; k < g.dim; ++k) n.push_back(g.n[static_cast<std::size_t>(k)]);
    return {{"dim", g.dim}, {"h", num(g.h)}, {"lower", vec(g.lower)}, {"nodes", n}};
}

inline json to_json(const SolveResult& r) {
    return {{"grid", grid_json(r.field.grid)},
            {"boundary_mode", to_string(r.field.boundary_mode)},
            {"value_at_center", num(r.field.at_center())},
            {"solver", to_json(r.report)}};
}

inline json to_json(const ComparisonReport& r) {
    return {{"ordered", r.ordered},
            {"violations", r.violations},
            {"min_gap", num(r.min_gap)},
            {"max_gap", num(r.max_gap)},
            {"center_gap", num(r.center_gap)},
            {"witness", vec(r.witness)},
            {"tolerance", num(r.tolerance)},
            {"lf", vec(r.lf)},
            {"certificate", r.certificate},
            {"low", to_json(r.low)},
            {"high", to_json(r.high)}};
}

inline json to_json(const GammaPinReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels)
        levels.push_back({{"h", num(l.h)},
                          {"deviation", num(l.deviation)},
                          {"value_at_first", num(l.value_at_first)},
                          {"solver", to_json(l.report)}});
    json gamma = json::array();
    for (const Vec& x : r.gamma) gamma.push_back(vec(x));
    return {{"vacuous", r.vacuous},
            {"decreasing", r.decreasing},
            {"passed", r.passed},
            {"final_deviation", num(r.final_deviation)},
            {"tolerance", num(r.tolerance)},
            {"gamma", gamma},
            {"levels", levels}};
}

inline json to_json(const NonuniquenessReport& r) {
    json sols = json::array();
    for (const auto& s : r.solutions)
        sols.push_back({{"name", s.name},
                        {"sup_error", num(s.sup_error)},
                        {"growth", to_json(s.growth)},
                        {"in_uniqueness_class", s.in_uniqueness_class},
                        {"bounded_below", s.bounded_below},
                        {"solve", to_json(s.solve)}});
    return {{"example", r.example},
            {"uniqueness_class", r.uniqueness_class},
            {"lambda", num(r.lambda)},
            {"t", num(r.t)},
            {"solutions", sols},
            {"sup_distance", num(r.sup_distance)},
            {"distinct", r.distinct},
            {"exactly_one_in_class", r.exactly_one_in_class}};
}

inline json to_json(const HypothesisVerdict& v) {
    json preds = json::array();
    for (const auto& p : v.predicates) preds.push_back({{"name", p.name}, {"passed", p.passed}, {"detail", p.detail}});
    json out = {{"theorem", v.theorem}, {"applies", v.applies}, {"failed", v.failed}, {"predicates", preds}, {"note", v.note}};
    if (v.lambda0 > 0.0) out["lambda0"] = num(v.lambda0);
    return out;
}

inline json to_json(const SystemSolveResult& r) {
    json reps = json::array();
    for (std::size_t k = 0; k < r.reports.size(); ++k) {
        json c = to_json(r.reports[k]);
        if (k < r.fields.size()) c["value_at_center"] = num(r.fields[k].at_center());
        reps.push_back(c);
    }
    return {{"success", r.success},
            {"sweeps", r.sweeps},
            {"components", reps},
            {"residual_history", vec(r.residual_history)},
            {"diagnostic", r.diagnostic}};
}

/// nlohmann objects are key-sorted; the indent is fixed.
inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const char* axis_name(int k) { return k == 0 ? "x" : "y"; }

/// Columns: node coordinates, value.
inline void write_field_csv(const std::string& path, const DiscreteField& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (int k = 0; k < f.grid.dim; ++k) out << axis_name(k) << ',';
    out << "value\n";
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const Vec x = f.node(i);
        for (int k = 0; k < f.grid.dim; ++k) out << format_number(x[k]) << ',';
        out << format_number(f.values[i]) << '\n';
    }
}

/// Columns: point coordinates, residual.
inline void write_residual_csv(const std::string& path, const std::vector<Vec>& points, const std::vector<double>& r) {
    if (points.size() != r.size()) throw std::invalid_argument("write_residual_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const int dim = points.empty() ? 1 : static_cast<int>(points.front().size());
    for (int k = 0; k < dim; ++k) out << axis_name(k) << ',';
    out << "residual\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        for (int k = 0; k < dim; ++k) out << format_number(points[i][k]) << ',';
        out << format_number(r[i]) << '\n';
    }
}

}  // namespace viscompare::report
