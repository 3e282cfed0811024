#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace shotline {

struct NelderMeadOptions {
    double initial_step = 1.0;
    int max_evaluations = 400;
    double f_tolerance = 1e-6;  // spread of simplex values
    double x_tolerance = 1e-3;  // simplex diameter, infinity norm
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
};

/// Nelder-Mead simplex minimization with standard coefficients (1, 2, 0.5,
/// 0.5). Every trial vertex goes through `project` so box constraints hold.
template <class F, class Project>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opt,
                             Project&& project) {
    const Eigen::Index n = x0.size();
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> val;
    int evals = 0;
    const auto eval = [&](const Eigen::VectorXd& x) {
        ++evals;
        const double v = f(x);
        return std::isnan(v) ? HUGE_VAL : v;
    };

    pts.push_back(project(x0));
    val.push_back(eval(pts[0]));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x = pts[0];
        x[i] += opt.initial_step;
        x = project(std::move(x));
        if (x[i] == pts[0][i]) {  // pinned at the upper bound: step down instead
            x[i] -= opt.initial_step;
            x = project(std::move(x));
        }
        val.push_back(eval(x));
        pts.push_back(std::move(x));
    }

    std::vector<std::size_t> order(pts.size());
    while (evals < opt.max_evaluations) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return val[a] < val[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[order.size() - 2];

        double diameter = 0.0;
        for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
        if (val[worst] - val[best] <= opt.f_tolerance * (1.0 + std::abs(val[best])) &&
            diameter <= opt.x_tolerance)
            break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
        centroid /= static_cast<double>(n);

        const Eigen::VectorXd xr = project(Eigen::VectorXd(centroid + (centroid - pts[worst])));
        const double fr = eval(xr);
        if (fr < val[best]) {
            const Eigen::VectorXd xe = project(Eigen::VectorXd(centroid + 2.0 * (centroid - pts[worst])));
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                val[worst] = fe;
            } else {
                pts[worst] = xr;
                val[worst] = fr;
            }
            continue;
        }
        if (fr < val[second]) {
            pts[worst] = xr;
            val[worst] = fr;
            continue;
        }
        const bool outside = fr < val[worst];
        const Eigen::VectorXd xc = outside ? project(Eigen::VectorXd(centroid + 0.5 * (xr - centroid)))
                                           : project(Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid)));
        const double fc = eval(xc);
        if (fc < std::min(fr, val[worst])) {
            pts[worst] = xc;
            val[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = project(Eigen::VectorXd(pts[best] + 0.5 * (pts[i] - pts[best])));
            val[i] = eval(pts[i]);
        }
    }
    const auto it = std::min_element(val.begin(), val.end());
    const auto idx = static_cast<std::size_t>(it - val.begin());
    return {pts[idx], val[idx], evals};
}

}  // namespace shotline
