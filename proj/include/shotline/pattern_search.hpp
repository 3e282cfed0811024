#pragma once

#include <Eigen/Dense>

#include <utility>

namespace shotline {

struct PatternSearchOptions {
    double initial_step = 1.0;
    double shrink = 0.5;
    int max_iterations = 40;  // full coordinate sweeps
    double min_step = 0.0;
    int max_evaluations = 1 << 30;
};

struct PatternSearchResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

/// Coordinate-wise compass search minimizing f.
///
/// Each sweep tries +step then -step along every coordinate and keeps any
/// strict improvement; a sweep without improvement multiplies the step by
/// `shrink`. `project` maps a trial point back into the feasible set (clamp
/// for boxes, wrap for the periodic domain) before it is evaluated.
template <class F, class Project>
PatternSearchResult pattern_search(F&& f, Eigen::VectorXd x0, double f0,
                                   const PatternSearchOptions& opt, Project&& project) {
    PatternSearchResult res{std::move(x0), f0, 0};
    double step = opt.initial_step;
    const Eigen::Index d = res.x.size();
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (step < opt.min_step || res.evaluations >= opt.max_evaluations) break;
        bool improved = false;
        for (Eigen::Index i = 0; i < d; ++i) {
            for (const double sign : {1.0, -1.0}) {
                if (res.evaluations >= opt.max_evaluations) break;
                Eigen::VectorXd trial = res.x;
                trial[i] += sign * step;
                trial = project(std::move(trial));
                if (trial[i] == res.x[i]) continue;  // pinned at a bound
                const double v = f(trial);
                ++res.evaluations;
                if (v < res.value) {
                    res.x = std::move(trial);
                    res.value = v;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= opt.shrink;
    }
    return res;
}

}  // namespace shotline
