#pragma once

#include "shotline/common.hpp"
#include "shotline/gp.hpp"
#include "shotline/pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace shotline {

/// Lower confidence bound mu - sqrt(beta) * sigma.
inline double lcb_value(double mean, double variance, double beta) {
    require(variance >= 0.0, "lcb_value: negative variance");
    require(beta >= 0.0, "lcb_value: negative beta");
    return mean - std::sqrt(beta) * std::sqrt(variance);
}

/// LCB on mu_g + mu_eps, exploring with the residual deviation only.
inline double lsr_lcb_value(double low_mean, double residual_mean, double residual_variance,
                            double beta) {
    require(residual_variance >= 0.0, "lsr_lcb_value: negative residual variance");
    require(beta >= 0.0, "lsr_lcb_value: negative beta");
    return (low_mean + residual_mean) - std::sqrt(beta) * std::sqrt(residual_variance);
}

/// Posterior mean of the low-shot model, frozen once the low-shot budget is
/// spent. Only the mean is reachable through this handle.
class FrozenMean {
public:
    explicit FrozenMean(std::shared_ptr<const GpModel> model) : model_(std::move(model)) {
        require(model_ != nullptr, "FrozenMean needs a model");
    }
    double operator()(const ParamVector& theta) const { return model_->mean(theta); }
    Eigen::Index dim() const { return model_->kernel().dim(); }
    const GpModel& model() const { return *model_; }

private:
    std::shared_ptr<const GpModel> model_;
};

enum class AcquisitionKind { Lcb, LsrLcb };

class Acquisition {
public:
    static Acquisition lcb(std::shared_ptr<const GpModel> model, double beta) {
        require(model != nullptr, "LCB needs a model");
        require(beta >= 0.0, "acquisition beta must be nonnegative");
        return Acquisition(AcquisitionKind::Lcb, std::nullopt, std::move(model), beta);
    }

    static Acquisition lsr_lcb(FrozenMean low_shot, std::shared_ptr<const GpModel> residual,
                               double beta) {
        require(residual != nullptr, "LSR-LCB needs a residual model");
        require(beta >= 0.0, "acquisition beta must be nonnegative");
        require(low_shot.dim() == residual->kernel().dim(),
                "low-shot and residual models disagree on dimension");
        return Acquisition(AcquisitionKind::LsrLcb, std::move(low_shot), std::move(residual), beta);
    }

    double operator()(const ParamVector& theta) const {
        const auto p = model_->predict(theta);
        if (kind_ == AcquisitionKind::Lcb) return lcb_value(p.mean, p.variance, beta_);
        return lsr_lcb_value((*low_shot_)(theta), p.mean, p.variance, beta_);
    }

    /// Predicted objective: mu for LCB, mu_g + mu_eps for LSR.
    double predicted_mean(const ParamVector& theta) const {
        const double m = model_->mean(theta);
        return kind_ == AcquisitionKind::Lcb ? m : (*low_shot_)(theta) + m;
    }

    AcquisitionKind kind() const { return kind_; }
    double beta() const { return beta_; }
    Eigen::Index dim() const { return model_->kernel().dim(); }
    const GpModel& model() const { return *model_; }

private:
    Acquisition(AcquisitionKind kind, std::optional<FrozenMean> low, std::shared_ptr<const GpModel> model,
                double beta)
        : kind_(kind), low_shot_(std::move(low)), model_(std::move(model)), beta_(beta) {}

    AcquisitionKind kind_;
    std::optional<FrozenMean> low_shot_;
    std::shared_ptr<const GpModel> model_;
    double beta_;
};

struct AcquisitionOptimizerOptions {
    int candidates = 256;
    int refine = 8;
    int iterations = 40;
    double initial_step = std::numbers::pi / 8.0;
    double shrink = 0.5;
};

/// Minimizes any acquisition-like functor over [0, 2pi)^dim: uniform random
/// candidates, then compass-search refinement of the best few with periodic
/// wrapping. Ties go to the earliest candidate.
template <class F>
ParamVector minimize_periodic(F&& f, Eigen::Index dim, Rng& rng,
                              const AcquisitionOptimizerOptions& opt = {}) {
    require(dim >= 1, "minimize_periodic: zero-dimensional domain");
    require(opt.candidates >= 1 && opt.refine >= 1, "need at least one candidate and one refinement");
    std::vector<ParamVector> cand;
    cand.reserve(static_cast<std::size_t>(opt.candidates));
    for (int i = 0; i < opt.candidates; ++i) cand.push_back(uniform_point(dim, rng));
    std::vector<double> value(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) value[i] = f(cand[i]);

    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });

    PatternSearchOptions ps;
    ps.initial_step = opt.initial_step;
    ps.shrink = opt.shrink;
    ps.max_iterations = opt.iterations;
    const auto wrap_point = [](Eigen::VectorXd x) { return wrap(std::move(x)); };

    ParamVector best = cand[order.front()];
    double best_value = value[order.front()];
    const std::size_t n_refine = std::min<std::size_t>(static_cast<std::size_t>(opt.refine), order.size());
    for (std::size_t r = 0; r < n_refine; ++r) {
        const std::size_t i = order[r];
        const auto res = pattern_search(f, cand[i], value[i], ps, wrap_point);
        if (res.value < best_value) {
            best_value = res.value;
            best = res.x;
        }
    }
    return wrap(best);
}

inline ParamVector optimize_acquisition(const Acquisition& acq, Rng& rng,
                                        const AcquisitionOptimizerOptions& opt = {}) {
    return minimize_periodic(acq, acq.dim(), rng, opt);
}

}  // namespace shotline
