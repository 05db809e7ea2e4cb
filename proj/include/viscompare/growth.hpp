#pragma once

#include "viscompare/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace viscompare {

/// Growth order r > 0 of a class S_r / SG_r.
class GrowthExponent {
public:
    explicit GrowthExponent(double r) : r_(r) {
        if (!(r > 0.0) || !std::isfinite(r)) throw std::domain_error("growth exponent must be positive");
    }
    double value() const { return r_; }

private:
    double r_;
};

/// <x> = (1 + |x|^2)^{1/2}.
inline double bracket(const Vec& x) { return std::sqrt(1.0 + x.squaredNorm()); }

inline double bracket_power(const Vec& x, double q_prime) { return std::pow(bracket(x), q_prime); }

struct BracketDerivatives {
    Vec gradient;
    Mat hessian;
};

/// Gradient and Hessian of <x>^{q'}:
///   D <x>^{q'}   = q' <x>^{q'-2} x
///   D^2 <x>^{q'} = q' <x>^{q'-4} (<x>^2 I + (q'-2) x x^T)
inline BracketDerivatives bracket_power_derivatives(const Vec& x, double q_prime) {
    const double b2 = 1.0 + x.squaredNorm();
    const double b = std::sqrt(b2);
    const auto n = x.size();
    BracketDerivatives d;
    d.gradient = q_prime * std::pow(b, q_prime - 2.0) * x;
    d.hessian = q_prime * std::pow(b, q_prime - 4.0) *
                (b2 * Mat::Identity(n, n) + (q_prime - 2.0) * x * x.transpose());
    return d;
}

/// Conjugate exponent q' with 1/q + 1/q' = 1.
inline double conjugate(double q) {
    if (!(q > 1.0)) throw std::domain_error("conjugate exponent requires q > 1, got " + std::to_string(q));
    return q / (q - 1.0);
}

struct GrowthOptions {
    std::vector<double> radii{10.0, 1e2, 1e3, 1e4};
    int samples_per_radius = 64;
    double tol = 1e-9;
};

/// Estimated membership of a scalar field in S_r^{+-} and SG_r^{+-}.
///
/// liminf_plus / liminf_minus are the shell infima of +h/|x|^r and -h/|x|^r at
/// the largest radius, clamped at 0 when the corresponding S-membership is
/// reported. The raw per-radius infima are kept in shell_min_plus/minus.
struct GrowthReport {
    double r = 0.0;
    bool in_S_plus = false;
    bool in_S_minus = false;
    bool in_SG_plus = false;
    bool in_SG_minus = false;
    bool plus_inconclusive = false;
    bool minus_inconclusive = false;
    double liminf_plus = 0.0;
    double liminf_minus = 0.0;
    std::vector<double> radii_used;
    std::vector<double> shell_min_plus;
    std::vector<double> shell_min_minus;
    std::string verdict_note;

    bool in_S() const { return in_S_plus && in_S_minus; }
    bool in_SG() const { return in_SG_plus && in_SG_minus; }
};

/// Deterministic quasi-uniform directions on the unit sphere of R^dim.
inline std::vector<Vec> sphere_directions(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(Vec::Constant(1, -1.0));
        dirs.push_back(Vec::Constant(1, 1.0));
        return dirs;
    }
    count = std::max(count, 1);
    dirs.reserve(static_cast<std::size_t>(count));
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            const double t = 2.0 * std::numbers::pi * k / count;
            Vec d(2);
            d << std::cos(t), std::sin(t);
            dirs.push_back(d);
        }
    } else if (dim == 3) {
        // Fibonacci lattice
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int k = 0; k < count; ++k) {
            const double z = 1.0 - 2.0 * (k + 0.5) / count;
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec d(3);
            d << rho * std::cos(golden * k), rho * std::sin(golden * k), z;
            dirs.push_back(d);
        }
    } else {
        std::mt19937_64 rng(0x5eed5eedULL + static_cast<unsigned>(dim));
        std::normal_distribution<double> g;
        for (int k = 0; k < count; ++k) {
            Vec d(dim);
            for (int i = 0; i < dim; ++i) d[i] = g(rng);
            dirs.push_back(d / d.norm());
        }
    }
    return dirs;
}

namespace detail {

struct SignVerdict {
    bool in_S = false;
    bool in_SG = false;
    bool inconclusive = false;
    double liminf = 0.0;
};

// Decides one sign from the sequence of shell infima m_i = inf (+-h)/R_i^r.
inline SignVerdict judge_sign(const std::vector<double>& m, double tol) {
    SignVerdict v;
    const double last = m.back();
    v.liminf = last;
    const bool finite = std::all_of(m.begin(), m.end(), [](double t) { return std::isfinite(t); });
    if (!finite) {
        v.inconclusive = true;
        return v;
    }

    // Negative infima shrinking geometrically toward 0: the ratio to |x|^r vanishes.
    constexpr double decay_ratio = 0.75;
    bool decaying = false;
    if (m.size() >= 2 && last < 0.0) {
        const std::size_t n = m.size();
        const std::size_t from = n >= 3 ? n - 3 : n - 2;
        decaying = true;
        for (std::size_t i = from; i + 1 < n; ++i) {
            if (!(m[i] < 0.0) || !(std::abs(m[i + 1]) <= decay_ratio * std::abs(m[i]))) decaying = false;
        }
    }
    v.in_S = last >= -tol || decaying;
    if (v.in_S) {
        v.liminf = std::max(last, 0.0);
        v.in_SG = true;
        return v;
    }

    bool stabilized = true;
    if (m.size() >= 2) {
        const double prev = m[m.size() - 2];
        const double scale = std::max(std::abs(last), std::abs(prev));
        stabilized = scale == 0.0 || std::abs(last - prev) < 0.1 * scale;
    }
    v.in_SG = stabilized;
    // Clear blow-up toward -infinity is a negative verdict; anything else is left open.
    const bool diverging = m.size() >= 2 && last < 2.0 * m[m.size() - 2] && m[m.size() - 2] < 0.0;
    v.inconclusive = !stabilized && !diverging;
    return v;
}

}  // namespace detail

/// Samples +-h(x)/|x|^r on spheres |x| = R for the given radii and classifies h.
///
/// liminf at infinity is replaced by the shell infimum at the largest radius;
/// the result is an estimate on a bounded window, never a proof.
template <class Field>
GrowthReport classify_growth(const Field& h, int dim, GrowthExponent r, const GrowthOptions& opts = {}) {
    if (opts.radii.empty()) throw std::invalid_argument("classify_growth: radii must be nonempty");
    for (std::size_t i = 0; i < opts.radii.size(); ++i) {
        if (!(opts.radii[i] > 0.0)) throw std::invalid_argument("classify_growth: radii must be positive");
        if (i > 0 && !(opts.radii[i] > opts.radii[i - 1]))
            throw std::invalid_argument("classify_growth: radii must be strictly increasing");
    }

    GrowthReport rep;
    rep.r = r.value();
    rep.radii_used = opts.radii;
    const auto dirs = sphere_directions(dim, opts.samples_per_radius);
    for (double R : opts.radii) {
        const double scale = std::pow(R, r.value());
        double lo_plus = std::numeric_limits<double>::infinity();
        double lo_minus = std::numeric_limits<double>::infinity();
        // Reduction in sample order keeps reports bit-reproducible.
        for (const Vec& d : dirs) {
            const Vec x = R * d;
            const double v = evaluate_at(h, x);
            lo_plus = std::min(lo_plus, v / scale);
            lo_minus = std::min(lo_minus, -v / scale);
        }
        rep.shell_min_plus.push_back(lo_plus);
        rep.shell_min_minus.push_back(lo_minus);
    }

    const auto plus = detail::judge_sign(rep.shell_min_plus, opts.tol);
    const auto minus = detail::judge_sign(rep.shell_min_minus, opts.tol);
    rep.in_S_plus = plus.in_S;
    rep.in_SG_plus = plus.in_SG;
    rep.plus_inconclusive = plus.inconclusive;
    rep.liminf_plus = plus.liminf;
    rep.in_S_minus = minus.in_S;
    rep.in_SG_minus = minus.in_SG;
    rep.minus_inconclusive = minus.inconclusive;
    rep.liminf_minus = minus.liminf;

    std::ostringstream note;
    note << "estimated on " << dirs.size() << " directions per shell at radii up to " << opts.radii.back()
         << "; membership is a bounded-window estimate, not a proof";
    if (rep.plus_inconclusive) note << "; SG+ inconclusive (shell infima not stabilized)";
    if (rep.minus_inconclusive) note << "; SG- inconclusive (shell infima not stabilized)";
    rep.verdict_note = note.str();
    return rep;
}

}  // namespace viscompare
