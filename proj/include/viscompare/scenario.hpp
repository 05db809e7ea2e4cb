#pragma once

#include "viscompare/barrier.hpp"
#include "viscompare/builtins.hpp"
#include "viscompare/polynomial.hpp"
#include "viscompare/residual.hpp"
#include "viscompare/solver.hpp"
#include "viscompare/systems.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace viscompare {

struct CandidateSpec {
    SmoothCandidate candidate;
    std::optional<SignClass> expect;
};

struct BoundarySpec {
    std::string type = "auto";  // auto | function | trace | barrier | exact
    FieldExpr value;
    std::string candidate;
};

struct Scenario {
    std::string id;
    std::string builtin;
    bool has_problem = false;
    ProblemSpec problem;
    std::optional<MonotoneSystem> system;
    std::vector<CandidateSpec> candidates;
    std::optional<SmoothCandidate> manufactured;
    std::vector<SmoothCandidate> system_manufactured;
    GrowthOptions growth;
    BarrierWindow window;
    double verify_radius = 10.0;
    int verify_points = 2001;
    Box box = Box::interval(-5.0, 5.0);
    double h = 0.05;
    std::vector<double> levels{0.1, 0.05, 0.025};
    std::vector<double> mu{0.5, 0.9, 0.99};
    BoundarySpec boundary;
    std::vector<BoundarySpec> boundaries;
    double f_shift = 1.0;
    double boundary_shift = 0.0;
    SchemeConfig scheme;
    double lambda = 1.0;
    double t = 1.0;
    double pin_tolerance = 0.05;
    std::string output = "out";
};

namespace detail {

inline const nlohmann::json& member(const nlohmann::json& j, const char* key, const std::string& path) {
    if (!j.contains(key)) throw ScenarioError(path + "/" + key, "missing");
    return j.at(key);
}

inline double number_or(const nlohmann::json& j, const char* key, double dflt, const std::string& path) {
    return j.contains(key) ? require_number(j.at(key), path + "/" + key) : dflt;
}

inline int int_or(const nlohmann::json& j, const char* key, int dflt, const std::string& path) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_number_integer()) throw ScenarioError(path + "/" + key, "expected an integer");
    return j.at(key).get<int>();
}

inline std::string string_or(const nlohmann::json& j, const char* key, const std::string& dflt, const std::string& path) {
    if (!j.contains(key)) return dflt;
    if (!j.at(key).is_string()) throw ScenarioError(path + "/" + key, "expected a string");
    return j.at(key).get<std::string>();
}

inline std::vector<double> number_list(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array()) throw ScenarioError(path, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(require_number(j[i], path + "/" + std::to_string(i)));
    return v;
}

inline Mat number_matrix(const nlohmann::json& j, int dim, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ScenarioError(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
    Mat m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        const std::string rp = path + "/" + std::to_string(r);
        if (!row.is_array() || static_cast<int>(row.size()) != dim) throw ScenarioError(rp, "expected " + std::to_string(dim) + " entries");
        for (int c = 0; c < dim; ++c) m(r, c) = require_number(row[static_cast<std::size_t>(c)], rp + "/" + std::to_string(c));
    }
    return m;
}

inline MatrixField matrix_field(const nlohmann::json& j, int dim, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ScenarioError(path, "expected " + std::to_string(dim) + " rows");
    std::vector<FieldExpr> entries;
    for (int r = 0; r < dim; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        const std::string rp = path + "/" + std::to_string(r);
        if (!row.is_array() || static_cast<int>(row.size()) != dim) throw ScenarioError(rp, "expected " + std::to_string(dim) + " entries");
        for (int c = 0; c < dim; ++c) entries.push_back(parse_field(row[static_cast<std::size_t>(c)], dim, rp + "/" + std::to_string(c)));
    }
    return [entries, dim](const Vec& x) {
        Mat m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) m(r, c) = entries[static_cast<std::size_t>(r * dim + c)].value(x);
        return m;
    };
}

inline VectorField vector_field(const nlohmann::json& j, int dim, const std::string& path) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) throw ScenarioError(path, "expected " + std::to_string(dim) + " entries");
    std::vector<FieldExpr> entries;
    for (int k = 0; k < dim; ++k) entries.push_back(parse_field(j[static_cast<std::size_t>(k)], dim, path + "/" + std::to_string(k)));
    return [entries, dim](const Vec& x) {
        Vec v(dim);
        for (int k = 0; k < dim; ++k) v[k] = entries[static_cast<std::size_t>(k)].value(x);
        return v;
    };
}

// sigma with sigma sigma^T = D via the symmetric square root.
inline MatrixField sqrt_of(MatrixField D) {
    return [D](const Vec& x) {
        const Mat d = D(x);
        const Mat s = 0.5 * (d + d.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(s);
        const double scale = 1e-12 * (1.0 + s.cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() < -scale) throw EvaluationError("diffusion matrix not positive semidefinite", x);
        const Vec root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return Mat(es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose());
    };
}

inline PowerHamiltonian parse_power(const nlohmann::json& j, int dim, double q, const std::string& path) {
    PowerHamiltonian p;
    p.q = q;
    p.A = j.contains("A") ? matrix_field(j.at("A"), dim, path + "/A") : constant_matrix_field(Mat::Identity(dim, dim));
    return p;
}

inline Hamiltonian parse_hamiltonian(const nlohmann::json& j, int dim, const std::string& path) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
    const std::string type = string_or(j, "type", "power", path);
    const double q = number_or(j, "q", 2.0, path);
    if (!(q > 1.0)) throw ScenarioError(path + "/q", "exponent must exceed 1");
    if (type == "power") return parse_power(j, dim, q, path);
    if (type == "signed") {
        return SignedScalarHamiltonian{parse_field(member(j, "a", path), dim, path + "/a").as_field(), q};
    }
    if (type == "minconvex") {
        const auto& comps = member(j, "components", path);
        if (!comps.is_array() || comps.empty()) throw ScenarioError(path + "/components", "expected a nonempty array");
        MinConvexHamiltonian h;
        h.q = q;
        for (std::size_t i = 0; i < comps.size(); ++i)
            h.components.push_back(parse_power(comps[i], dim, q, path + "/components/" + std::to_string(i)));
        return h;
    }
    if (type == "game") {
        if (q != 2.0) throw ScenarioError(path + "/q", "game Hamiltonians are quadratic");
        GameHamiltonian g;
        auto table = [&](const char* key) {
            const std::string p = path + "/" + key;
            const auto& t = member(j, key, path);
            if (!t.is_array() || t.empty()) throw ScenarioError(p, "expected [beta][alpha] matrices");
            std::vector<std::vector<Mat>> out;
            for (std::size_t b = 0; b < t.size(); ++b) {
                const auto& row = t[b];
                if (!row.is_array() || row.empty()) throw ScenarioError(p + "/" + std::to_string(b), "expected alpha matrices");
                out.emplace_back();
                for (std::size_t a = 0; a < row.size(); ++a)
                    out.back().push_back(number_matrix(row[a], dim, p + "/" + std::to_string(b) + "/" + std::to_string(a)));
            }
            return out;
        };
        const auto sig = table("sigma"), tau = table("tau");
        g.beta_count = static_cast<int>(sig.size());
        g.alpha_count = static_cast<int>(sig.front().size());
        for (const auto& row : sig)
            if (static_cast<int>(row.size()) != g.alpha_count) throw ScenarioError(path + "/sigma", "ragged index table");
        if (tau.size() != sig.size()) throw ScenarioError(path + "/tau", "shape must match sigma");
        for (const auto& row : tau)
            if (static_cast<int>(row.size()) != g.alpha_count) throw ScenarioError(path + "/tau", "shape must match sigma");
        g.sigma = [sig](const Vec&, int a, int b) { return sig[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]; };
        g.tau = [tau](const Vec&, int a, int b) { return tau[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)]; };
        return g;
    }
    throw ScenarioError(path + "/type", "unknown Hamiltonian type '" + type + "' (power, signed, minconvex, game)");
}

// Fills operator/H/f fields present in j on top of p.
inline void apply_problem_fields(ProblemSpec& p, const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
    if (j.contains("dim")) {
        p.dim = int_or(j, "dim", 1, path);
        if (p.dim < 1) throw ScenarioError(path + "/dim", "must be positive");
        p.op.dim = p.dim;
        if (!j.contains("sigma") && !j.contains("diffusion")) p.op.sigma = constant_matrix_field(Mat::Zero(p.dim, p.dim));
        if (!j.contains("b")) p.op.b = zero_vector_field(p.dim);
        if (!j.contains("f")) p.f = constant_field(0.0);
    }
    const int dim = p.dim;
    if (j.contains("lambda")) {
        p.lambda = require_number(j.at("lambda"), path + "/lambda");
        if (!(p.lambda > 0.0)) throw ScenarioError(path + "/lambda", "must be positive");
    }
    if (j.contains("sigma") && j.contains("diffusion")) throw ScenarioError(path, "give sigma or diffusion, not both");
    if (j.contains("sigma")) p.op.sigma = matrix_field(j.at("sigma"), dim, path + "/sigma");
    if (j.contains("diffusion")) p.op.sigma = sqrt_of(matrix_field(j.at("diffusion"), dim, path + "/diffusion"));
    if (j.contains("b")) p.op.b = vector_field(j.at("b"), dim, path + "/b");
    if (j.contains("H")) {
        if (j.at("H").is_null()) p.H.reset();
        else p.H = parse_hamiltonian(j.at("H"), dim, path + "/H");
        p.C0.reset();
    }
    if (j.contains("q")) p.q = require_number(j.at("q"), path + "/q");
    if (p.H) p.q = exponent(*p.H);
    if (j.contains("f")) p.f = parse_field(j.at("f"), dim, path + "/f").as_field();
    if (j.contains("C0")) p.C0 = require_number(j.at("C0"), path + "/C0");
    if (j.contains("extremal")) {
        const auto& e = j.at("extremal");
        const std::string ep = path + "/extremal";
        ExtremalOperator ext = canonical_extremal(p.op);
        if (e.contains("sigma0")) ext.sigma0 = matrix_field(e.at("sigma0"), dim, ep + "/sigma0");
        if (e.contains("b0")) ext.b0 = parse_field(e.at("b0"), dim, ep + "/b0").as_field();
        p.extremal = ext;
    }
}

inline ProblemSpec builtin_problem(const std::string& name, const nlohmann::json& params, Scenario& s) {
    const std::string pp = "/params";
    const double lambda = number_or(params, "lambda", 1.0, pp);
    const double q = number_or(params, "q", name == "signswitch" ? 3.0 : 2.0, pp);
    const int dim = int_or(params, "dim", 1, pp);
    s.lambda = lambda;
    s.t = number_or(params, "t", 1.0, pp);
    if (name == "eq12") return builtins::eq12(lambda);
    if (name == "eq13") return builtins::eq13(dim, q, {}, lambda);
    if (name == "hje3") return builtins::hje3(lambda, s.t);
    if (name == "ex2") return builtins::ex2(lambda);
    if (name == "example1") return builtins::example1(lambda, q);
    if (name == "signswitch") return builtins::signswitch(lambda, q);
    if (name == "minconvex") return builtins::minconvex(lambda);
    if (name == "game") return builtins::game(lambda);
    throw ScenarioError("/builtin", "unknown built-in '" + name + "'");
}

inline void add_builtin_candidates(Scenario& s) {
    auto add = [&](SmoothCandidate c) { s.candidates.push_back({std::move(c), SignClass::Solution}); };
    if (s.builtin == "eq12") {
        add(builtins::zero(1));
        add(builtins::eq12_u2(s.lambda));
    } else if (s.builtin == "hje3") {
        add(builtins::zero(1));
        add(builtins::hje3_u2(s.lambda, s.t));
    } else if (s.builtin == "ex2" && s.lambda == 1.0) {
        auto v1 = builtins::zero(1);
        v1.name = "v1";
        add(v1);
        add(builtins::ex2_v2());
    }
}

inline SignClass parse_sign_class(const std::string& v, const std::string& path) {
    if (v == "solution") return SignClass::Solution;
    if (v == "subsolution") return SignClass::Subsolution;
    if (v == "supersolution") return SignClass::Supersolution;
    if (v == "neither") return SignClass::Neither;
    throw ScenarioError(path, "unknown classification '" + v + "'");
}

inline BoundarySpec parse_boundary(const nlohmann::json& j, int dim, const std::string& path) {
    BoundarySpec b;
    if (j.is_number() || (j.is_object() && !j.contains("type"))) {
        b.type = "function";
        b.value = parse_field(j, dim, path);
        return b;
    }
    if (!j.is_object()) throw ScenarioError(path, "expected a boundary object");
    b.type = string_or(j, "type", "auto", path);
    if (b.type == "function") b.value = parse_field(member(j, "value", path), dim, path + "/value");
    else if (b.type == "trace") b.candidate = string_or(j, "candidate", "", path);
    else if (b.type != "barrier" && b.type != "exact" && b.type != "auto")
        throw ScenarioError(path + "/type", "unknown boundary type '" + b.type + "' (function, trace, barrier, exact)");
    return b;
}

inline MonotoneSystem parse_system(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ScenarioError(path, "expected an object");
    if (j.contains("builtin")) {
        const std::string name = string_or(j, "builtin", "", path);
        if (name != "system2") throw ScenarioError(path + "/builtin", "unknown built-in system '" + name + "'");
        return builtins::system2(number_or(j, "lambda", 1.0, path), number_or(j, "c", 1.0, path));
    }
    MonotoneSystem s;
    s.name = string_or(j, "name", "system", path);
    s.dim = int_or(j, "dim", 1, path);
    s.lambda = number_or(j, "lambda", 1.0, path);
    s.q = number_or(j, "q", 2.0, path);
    const auto& comps = member(j, "components", path);
    if (!comps.is_array() || comps.empty()) throw ScenarioError(path + "/components", "expected a nonempty array");
    for (std::size_t k = 0; k < comps.size(); ++k) {
        ProblemSpec p;
        p.dim = s.dim;
        p.op = {s.dim, constant_matrix_field(Mat::Zero(s.dim, s.dim)), zero_vector_field(s.dim)};
        p.f = constant_field(0.0);
        apply_problem_fields(p, comps[k], path + "/components/" + std::to_string(k));
        s.components.push_back({p.op, p.extremal, p.H, p.f});
    }
    const int m = s.m();
    if (j.contains("coupling")) s.coupling = number_matrix(j.at("coupling"), m, path + "/coupling");
    if (j.contains("offset")) {
        const auto v = number_list(j.at("offset"), path + "/offset");
        if (static_cast<int>(v.size()) != m) throw ScenarioError(path + "/offset", "needs one entry per component");
        s.offset = Eigen::Map<const Vec>(v.data(), m);
    }
    return s;
}

}  // namespace detail

/// Builds a scenario from parsed JSON; throws ScenarioError naming the offending field.
inline Scenario scenario_from_json(const nlohmann::json& j) {
    using namespace detail;
    if (!j.is_object()) throw ScenarioError("", "scenario must be a JSON object");
    static const std::set<std::string> known{"id",       "builtin",  "params", "problem",    "system",   "candidates",
                                             "manufactured", "window", "verify", "grid",     "mu",       "boundary",
                                             "boundaries", "compare", "solver", "output",   "description", "pin_tolerance"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw ScenarioError("/" + it.key(), "unknown field");
    Scenario s;
    s.id = string_or(j, "id", "", "");
    if (s.id.empty()) throw ScenarioError("/id", "missing");
    s.builtin = string_or(j, "builtin", "", "");
    const nlohmann::json params = j.contains("params") ? j.at("params") : nlohmann::json::object();
    if (!params.is_object()) throw ScenarioError("/params", "expected an object");

    if (!s.builtin.empty() && s.builtin != "system2") {
        s.problem = builtin_problem(s.builtin, params, s);
        s.has_problem = true;
    }
    if (j.contains("problem")) {
        if (!s.has_problem) {
            s.problem = ProblemSpec{};
            s.problem.name = s.id;
            s.problem.dim = 1;
            s.problem.op = {1, constant_matrix_field(Mat::Zero(1, 1)), zero_vector_field(1)};
            s.problem.f = constant_field(0.0);
        }
        apply_problem_fields(s.problem, j.at("problem"), "/problem");
        s.has_problem = true;
        s.lambda = s.problem.lambda;
    }
    if (s.builtin == "system2") s.system = builtins::system2(number_or(params, "lambda", 1.0, "/params"), number_or(params, "c", 1.0, "/params"));
    if (j.contains("system")) s.system = parse_system(j.at("system"), "/system");
    if (!s.has_problem && !s.system) throw ScenarioError("/problem", "scenario needs a builtin, a problem or a system");

    const int dim = s.has_problem ? s.problem.dim : s.system->dim;
    if (s.has_problem) add_builtin_candidates(s);
    if (j.contains("candidates")) {
        const auto& cs = j.at("candidates");
        if (!cs.is_array()) throw ScenarioError("/candidates", "expected an array");
        for (std::size_t i = 0; i < cs.size(); ++i) {
            const std::string p = "/candidates/" + std::to_string(i);
            const std::string name = string_or(cs[i], "name", "c" + std::to_string(i), p);
            CandidateSpec c{parse_field(member(cs[i], "value", p), dim, p + "/value").as_candidate(name), std::nullopt};
            if (cs[i].contains("expect")) c.expect = parse_sign_class(string_or(cs[i], "expect", "", p), p + "/expect");
            s.candidates.push_back(std::move(c));
        }
    }
    if (j.contains("manufactured")) {
        const auto& m = j.at("manufactured");
        if (s.system) {
            if (!m.is_array() || static_cast<int>(m.size()) != s.system->m())
                throw ScenarioError("/manufactured", "expected one field per component");
            for (std::size_t k = 0; k < m.size(); ++k)
                s.system_manufactured.push_back(parse_field(m[k], dim, "/manufactured/" + std::to_string(k)).as_candidate("u*" + std::to_string(k)));
            *s.system = with_manufactured_rhs(*s.system, s.system_manufactured);
        } else {
            s.manufactured = parse_field(m, dim, "/manufactured").as_candidate("u*");
            s.problem = with_manufactured_rhs(s.problem, *s.manufactured);
        }
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        if (w.contains("radii")) s.growth.radii = number_list(w.at("radii"), "/window/radii");
        s.growth.samples_per_radius = int_or(w, "samples", s.growth.samples_per_radius, "/window");
        s.growth.tol = number_or(w, "tol", s.growth.tol, "/window");
        s.window.radius = number_or(w, "radius", s.window.radius, "/window");
        s.window.points_per_axis = int_or(w, "points", dim == 1 ? s.window.points_per_axis : 201, "/window");
    } else if (dim > 1) {
        s.window.points_per_axis = 201;
    }
    if (j.contains("verify")) {
        s.verify_radius = number_or(j.at("verify"), "radius", s.verify_radius, "/verify");
        s.verify_points = int_or(j.at("verify"), "points", s.verify_points, "/verify");
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (g.contains("box")) {
            const auto& b = g.at("box");
            if (!b.is_array() || static_cast<int>(b.size()) != dim) throw ScenarioError("/grid/box", "expected one [lo, hi] pair per axis");
            Vec c(dim), hw(dim);
            for (int k = 0; k < dim; ++k) {
                const auto v = number_list(b[static_cast<std::size_t>(k)], "/grid/box/" + std::to_string(k));
                if (v.size() != 2 || !(v[1] > v[0])) throw ScenarioError("/grid/box/" + std::to_string(k), "expected [lo, hi] with lo < hi");
                c[k] = 0.5 * (v[0] + v[1]);
                hw[k] = 0.5 * (v[1] - v[0]);
            }
            s.box = Box(c, hw);
        } else if (dim == 2) {
            s.box = Box::square(1.0);
        }
        s.h = number_or(g, "h", s.h, "/grid");
        if (g.contains("levels")) s.levels = number_list(g.at("levels"), "/grid/levels");
    } else if (dim == 2) {
        s.box = Box::square(1.0);
    }
    if (j.contains("mu")) s.mu = number_list(j.at("mu"), "/mu");
    if (j.contains("boundary")) s.boundary = parse_boundary(j.at("boundary"), dim, "/boundary");
    if (j.contains("boundaries")) {
        const auto& b = j.at("boundaries");
        if (!b.is_array()) throw ScenarioError("/boundaries", "expected an array");
        for (std::size_t k = 0; k < b.size(); ++k) s.boundaries.push_back(parse_boundary(b[k], dim, "/boundaries/" + std::to_string(k)));
    }
    if (j.contains("compare")) {
        s.f_shift = number_or(j.at("compare"), "f_shift", s.f_shift, "/compare");
        s.boundary_shift = number_or(j.at("compare"), "boundary_shift", s.boundary_shift, "/compare");
        if (s.f_shift < 0.0 || s.boundary_shift < 0.0) throw ScenarioError("/compare", "shifts must be nonnegative");
    }
    if (j.contains("solver")) {
        const auto& c = j.at("solver");
        s.scheme.tol_residual = number_or(c, "tol", s.scheme.tol_residual, "/solver");
        s.scheme.max_iters = int_or(c, "max_iters", s.scheme.max_iters, "/solver");
        s.scheme.damping = number_or(c, "damping", s.scheme.damping, "/solver");
        s.scheme.lf_safety = number_or(c, "lf_safety", s.scheme.lf_safety, "/solver");
        if (c.contains("policy_iteration")) {
            if (!c.at("policy_iteration").is_boolean()) throw ScenarioError("/solver/policy_iteration", "expected true or false");
            s.scheme.policy_iteration = c.at("policy_iteration").get<bool>();
        }
    }
    s.pin_tolerance = number_or(j, "pin_tolerance", s.pin_tolerance, "");
    s.output = string_or(j, "output", "out/" + s.id, "");
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("", "cannot open scenario file '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError("", std::string("JSON syntax error: ") + e.what());
    }
    return scenario_from_json(j);
}

/// Resolves a boundary spec against the scenario's candidates.
inline BoundaryCondition resolve_boundary(const Scenario& s, const BoundarySpec& b, const ProblemSpec* p,
                                          double mu = 0.5) {
    if (b.type == "function") return explicit_boundary(b.value.as_field(), "function");
    if (b.type == "trace") {
        if (b.candidate == "u*" && s.manufactured) return trace_boundary(*s.manufactured);
        for (const auto& c : s.candidates)
            if (c.candidate.name == b.candidate) return trace_boundary(c.candidate);
        throw ScenarioError("/boundary/candidate", "no candidate named '" + b.candidate + "'");
    }
    if (b.type == "barrier") {
        if (!p) throw ScenarioError("/boundary/type", "barrier boundary needs a scalar problem");
        if (p->has_hamiltonian()) return barrier_boundary(construct_barrier(*p, mu, s.window, GrowthMode::Relaxed, s.growth, false));
        return barrier_boundary(linear_case_barrier(*p, s.window, GrowthMode::Relaxed, 1.0, s.growth, false).params);
    }
    if (b.type == "exact") {
        if (s.builtin != "signswitch") throw ScenarioError("/boundary/type", "exact boundary data exists for signswitch only");
        return {BoundaryMode::CandidateTrace, builtins::signswitch_solution(s.lambda), "exact"};
    }
    if (s.manufactured) return trace_boundary(*s.manufactured);
    if (s.builtin == "signswitch") return {BoundaryMode::CandidateTrace, builtins::signswitch_solution(s.lambda), "exact"};
    return explicit_boundary(constant_field(0.0), "zero");
}

}  // namespace viscompare
