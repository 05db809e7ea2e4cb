#pragma once

#include "viscompare/growth.hpp"
#include "viscompare/problem.hpp"
#include "viscompare/types.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace viscompare {

/// Scenario schema violation; `path` is a JSON pointer to the offending field.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

struct Monomial {
    std::vector<int> powers;
    double coeff = 0.0;
};

/// sum_a c_a x^a + s <x>^p, with analytic derivatives.
struct FieldExpr {
    int dim = 1;
    std::vector<Monomial> terms;
    double bracket_scale = 0.0;
    double bracket_power = 0.0;

    double value(const Vec& x) const {
        double v = 0.0;
        for (const auto& t : terms) {
            double m = t.coeff;
            for (int k = 0; k < dim; ++k) m *= std::pow(x[k], t.powers[static_cast<std::size_t>(k)]);
            v += m;
        }
        if (bracket_scale != 0.0) v += bracket_scale * viscompare::bracket_power(x, bracket_power);
        return v;
    }

    Vec gradient(const Vec& x) const {
        Vec g = Vec::Zero(dim);
        for (const auto& t : terms)
            for (int i = 0; i < dim; ++i) {
                const int pi = t.powers[static_cast<std::size_t>(i)];
                if (pi == 0) continue;
                double m = t.coeff * pi;
                for (int k = 0; k < dim; ++k) m *= std::pow(x[k], t.powers[static_cast<std::size_t>(k)] - (k == i ? 1 : 0));
                g[i] += m;
            }
        if (bracket_scale != 0.0) g += bracket_scale * bracket_power_derivatives(x, bracket_power).gradient;
        return g;
    }

    Mat hessian(const Vec& x) const {
        Mat H = Mat::Zero(dim, dim);
        for (const auto& t : terms)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) {
                    std::vector<int> p = t.powers;
                    double c = t.coeff * p[static_cast<std::size_t>(i)];
                    if (c == 0.0) continue;
                    --p[static_cast<std::size_t>(i)];
                    c *= p[static_cast<std::size_t>(j)];
                    if (c == 0.0) continue;
                    --p[static_cast<std::size_t>(j)];
                    for (int k = 0; k < dim; ++k) c *= std::pow(x[k], p[static_cast<std::size_t>(k)]);
                    H(i, j) += c;
                }
        if (bracket_scale != 0.0) H += bracket_scale * bracket_power_derivatives(x, bracket_power).hessian;
        return H;
    }

    bool is_zero() const {
        if (bracket_scale != 0.0) return false;
        for (const auto& t : terms)
            if (t.coeff != 0.0) return false;
        return true;
    }

    ScalarField as_field() const {
        const FieldExpr self = *this;
        return [self](const Vec& x) { return self.value(x); };
    }

    SmoothCandidate as_candidate(std::string name) const {
        const FieldExpr self = *this;
        return make_candidate(
            std::move(name), [self](const Vec& x) { return self.value(x); },
            [self](const Vec& x) { return self.gradient(x); }, [self](const Vec& x) { return self.hessian(x); });
    }
};

inline FieldExpr constant_expr(int dim, double c) {
    FieldExpr e;
    e.dim = dim;
    if (c != 0.0) e.terms.push_back({std::vector<int>(static_cast<std::size_t>(dim), 0), c});
    return e;
}

namespace detail {

inline double require_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw ScenarioError(path, "expected a number");
    return j.get<double>();
}

inline std::vector<int> parse_multi_index(const std::string& key, int dim, const std::string& path) {
    std::vector<int> p;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        int v = -1;
        try {
            v = std::stoi(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || v < 0)
            throw ScenarioError(path, "multi-index key '" + key + "' must be comma-separated nonnegative integers");
        p.push_back(v);
    }
    if (static_cast<int>(p.size()) != dim)
        throw ScenarioError(path, "multi-index key '" + key + "' needs " + std::to_string(dim) + " entries");
    return p;
}

}  // namespace detail

/// A number, or an object mixing multi-index keys ("2" or "1,0") with the named
/// entries "const": c, "zero": true and "bracket": {"scale": s, "power": p}.
inline FieldExpr parse_field(const nlohmann::json& j, int dim, const std::string& path) {
    if (j.is_number()) return constant_expr(dim, j.get<double>());
    if (!j.is_object()) throw ScenarioError(path, "expected a number or a coefficient table");
    FieldExpr e;
    e.dim = dim;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const std::string sub = path + "/" + key;
        if (key == "zero") {
            if (!it->is_boolean()) throw ScenarioError(sub, "expected true or false");
        } else if (key == "const") {
            const double c = detail::require_number(*it, sub);
            e.terms.push_back({std::vector<int>(static_cast<std::size_t>(dim), 0), c});
        } else if (key == "bracket") {
            if (!it->is_object()) throw ScenarioError(sub, "expected {\"scale\": s, \"power\": p}");
            e.bracket_scale = it->contains("scale") ? detail::require_number((*it)["scale"], sub + "/scale") : 1.0;
            if (!it->contains("power")) throw ScenarioError(sub + "/power", "missing");
            e.bracket_power = detail::require_number((*it)["power"], sub + "/power");
        } else {
            e.terms.push_back({detail::parse_multi_index(key, dim, sub), detail::require_number(*it, sub)});
        }
    }
    return e;
}

}  // namespace viscompare
