#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace viscompare {

/// Empirical modulus of continuity: sup of a nonnegative gap over geometric
/// bins of a distance-like variable.
struct ModulusTable {
    std::vector<double> bin_upper;
    std::vector<double> values;  // sup of gap in the bin, 0 for empty bins
    std::vector<int> counts;
    bool passed = false;
    std::string note;

    double max_value() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
};

struct ModulusSample {
    double distance;
    double gap;
};

/// Bins samples by distance into `bins` geometric bins on [d_min, d_max] and
/// judges whether the table tends to 0 as the distance tends to 0.
inline ModulusTable build_modulus_table(const std::vector<ModulusSample>& samples, double d_min, double d_max,
                                        int bins, double tol) {
    ModulusTable t;
    bins = std::max(bins, 2);
    const double ratio = std::pow(d_max / d_min, 1.0 / bins);
    double edge = d_min;
    for (int i = 0; i < bins; ++i) {
        edge *= ratio;
        t.bin_upper.push_back(edge);
    }
    t.bin_upper.back() = d_max;
    t.values.assign(static_cast<std::size_t>(bins), 0.0);
    t.counts.assign(static_cast<std::size_t>(bins), 0);
    for (const auto& s : samples) {
        if (!(s.distance > 0.0)) continue;
        auto it = std::lower_bound(t.bin_upper.begin(), t.bin_upper.end(), s.distance);
        if (it == t.bin_upper.end()) continue;
        const auto k = static_cast<std::size_t>(it - t.bin_upper.begin());
        t.values[k] = std::max(t.values[k], std::max(s.gap, 0.0));
        t.counts[k] += 1;
    }

    std::vector<double> filled;
    for (std::size_t k = 0; k < t.values.size(); ++k)
        if (t.counts[k] > 0) filled.push_back(t.values[k]);
    if (filled.empty()) {
        t.passed = false;
        t.note = "no samples fell into the distance bins";
        return t;
    }
    const double top = *std::max_element(filled.begin(), filled.end());
    if (top <= tol) {
        t.passed = true;
        t.note = "modulus identically zero on the samples";
        return t;
    }
    bool monotone = true;
    for (std::size_t k = 0; k + 1 < filled.size(); ++k)
        if (filled[k] > 1.1 * filled[k + 1] + tol) monotone = false;
    const bool vanishing = filled.front() <= 0.5 * filled.back() + tol;
    t.passed = monotone && vanishing;
    t.note = !monotone ? "table not nondecreasing in distance"
             : !vanishing ? "table does not decay toward 0 at small distances"
                          : "table nondecreasing and decaying toward 0";
    return t;
}

}  // namespace viscompare
