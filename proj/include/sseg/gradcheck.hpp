#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sseg/rng.hpp"
#include "sseg/tensor.hpp"

// Central finite-difference oracle for gradient checks. 64-bit only: the
// 1e-4 step is far below float precision.

namespace sseg {

struct FiniteDiffReport {
    double max_rel_error = 0;
    std::vector<double> rel_errors;

    double fraction_within(double tol) const {
        if (rel_errors.empty()) return 1.0;
        std::size_t ok = 0;
        for (double e : rel_errors)
            if (e < tol) ++ok;
        return static_cast<double>(ok) / static_cast<double>(rel_errors.size());
    }
};

// f re-evaluates the scalar function at the given parameter values;
// analytic_grads[i] must match params[i] in shape. Coordinates are sampled
// uniformly across the concatenated parameter vector.
inline FiniteDiffReport finite_diff_check(
    const std::function<double(const std::vector<Tensor64>&)>& f,
    std::vector<Tensor64> params, const std::vector<Tensor64>& analytic_grads, double h,
    std::size_t samples, Rng& rng) {
    std::size_t total = 0;
    for (const auto& p : params) total += p.numel();

    FiniteDiffReport report;
    report.rel_errors.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        std::size_t flat = static_cast<std::size_t>(rng.below(total));
        std::size_t pi = 0;
        while (flat >= params[pi].numel()) {
            flat -= params[pi].numel();
            ++pi;
        }
        const double saved = params[pi][flat];
        params[pi][flat] = saved + h;
        const double fp = f(params);
        params[pi][flat] = saved - h;
        const double fm = f(params);
        params[pi][flat] = saved;

        const double cd = (fp - fm) / (2 * h);
        const double an = analytic_grads[pi][flat];
        const double rel =
            std::abs(an - cd) / std::max({std::abs(an), std::abs(cd), 1e-8});
        report.rel_errors.push_back(rel);
        report.max_rel_error = std::max(report.max_rel_error, rel);
    }
    return report;
}

}  // namespace sseg
