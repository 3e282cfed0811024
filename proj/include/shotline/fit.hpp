#pragma once

#include "shotline/common.hpp"
#include "shotline/gp.hpp"
#include "shotline/kernel.hpp"
#include "shotline/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

namespace shotline {

enum class MeanMode { TargetMean, Zero };

struct Bounds {
    double lo;
    double hi;
    double clamp(double v) const { return std::clamp(v, lo, hi); }
};

struct FitBounds {
    Bounds lengthscale{1e-2, 1e2};
    Bounds output_scale{1e-4, 1e4};
    Bounds noise{1e-8, 1e1};
    Bounds period{0.5, 4.0 * kTwoPi};  // only used when the period is free
};

struct FitConfig {
    KernelFamily family = KernelFamily::Matern;
    Smoothness nu = Smoothness::FiveHalves;
    bool fixed_period = true;
    MeanMode mean_mode = MeanMode::TargetMean;
    std::optional<double> pinned_noise;
    FitBounds bounds;
    int restarts = 8;
    int warm_restarts = 1;  // random starts added next to a warm start
    int max_evaluations = 400;       // per start
    int warm_max_evaluations = 120;  // per start when warm-started
    double initial_step = 1.0;
    double warm_initial_step = 0.25;
    double x_tolerance = 1e-2;  // in log-hyperparameter units
    // Hyperparameters are searched on a seeded subsample of at most this many
    // points (0 = all). The returned model is still built on the full data.
    Eigen::Index max_points = 0;
};

struct FitResult {
    KernelSpec kernel;
    double noise_variance = 0.0;
    double prior_mean = 0.0;
    double log_likelihood = -std::numeric_limits<double>::infinity();
};

inline GpModel build_model(const FitResult& fit, PointMatrix X, Eigen::VectorXd y) {
    return GpModel(fit.kernel, fit.noise_variance, fit.prior_mean, std::move(X), std::move(y));
}

namespace detail {

/// Log marginal likelihood over log-hyperparameters, with the
/// hyperparameter-independent pairwise terms computed once.
class LikelihoodSurface {
public:
    LikelihoodSurface(const PointMatrix& X, Eigen::VectorXd resid, const FitConfig& cfg)
        : cfg_(cfg), resid_(std::move(resid)), dim_(X.cols()), n_(X.rows()) {
        const bool raw = cfg.family == KernelFamily::Periodic && !cfg.fixed_period;
        pair_terms_.reserve(static_cast<std::size_t>(dim_));
        for (Eigen::Index d = 0; d < dim_; ++d) {
            Eigen::ArrayXXd diff(n_, n_);
            for (Eigen::Index i = 0; i < n_; ++i)
                for (Eigen::Index j = 0; j < n_; ++j) diff(i, j) = X(i, d) - X(j, d);
            if (cfg.family == KernelFamily::Matern) {
                diff = diff.square();
            } else if (!raw) {
                diff = (diff * (std::numbers::pi / kTwoPi)).sin().square();
            }
            pair_terms_.push_back(std::move(diff));
        }
    }

    Eigen::Index parameter_count() const {
        return dim_ + 1 + (cfg_.pinned_noise ? 0 : 1) + (free_period() ? 1 : 0);
    }

    bool free_period() const { return cfg_.family == KernelFamily::Periodic && !cfg_.fixed_period; }

    Eigen::VectorXd lower() const { return bound_vector(true); }
    Eigen::VectorXd upper() const { return bound_vector(false); }

    FitResult decode(const Eigen::VectorXd& z, double prior_mean) const {
        FitResult r;
        r.kernel.family = cfg_.family;
        r.kernel.nu = cfg_.nu;
        r.kernel.fixed_period = cfg_.fixed_period;
        r.kernel.lengthscales = z.head(dim_).array().exp();
        r.kernel.output_scale = std::exp(z[dim_]);
        Eigen::Index next = dim_ + 1;
        r.noise_variance = cfg_.pinned_noise ? *cfg_.pinned_noise : std::exp(z[next++]);
        r.kernel.period = free_period() ? std::exp(z[next]) : kTwoPi;
        r.prior_mean = prior_mean;
        return r;
    }

    Eigen::VectorXd encode(const FitResult& f) const {
        Eigen::VectorXd z(parameter_count());
        z.head(dim_) = f.kernel.lengthscales.array().log();
        z[dim_] = std::log(f.kernel.output_scale);
        Eigen::Index next = dim_ + 1;
        if (!cfg_.pinned_noise) z[next++] = std::log(f.noise_variance);
        if (free_period()) z[next] = std::log(f.kernel.period);
        return z.cwiseMax(lower()).cwiseMin(upper());
    }

    double log_likelihood(const Eigen::VectorXd& z) const {
        const FitResult f = decode(z, 0.0);
        Eigen::ArrayXXd acc = Eigen::ArrayXXd::Zero(n_, n_);
        Eigen::MatrixXd K;
        if (cfg_.family == KernelFamily::Matern) {
            for (Eigen::Index d = 0; d < dim_; ++d)
                acc += pair_terms_[d] / (f.kernel.lengthscales[d] * f.kernel.lengthscales[d]);
            const Eigen::ArrayXXd r = acc.sqrt();
            Eigen::ArrayXXd c;
            switch (cfg_.nu) {
                case Smoothness::Half: c = (-r).exp(); break;
                case Smoothness::ThreeHalves: {
                    const Eigen::ArrayXXd s = std::sqrt(3.0) * r;
                    c = (1.0 + s) * (-s).exp();
                    break;
                }
                case Smoothness::FiveHalves: {
                    const Eigen::ArrayXXd s = std::sqrt(5.0) * r;
                    c = (1.0 + s + s.square() / 3.0) * (-s).exp();
                    break;
                }
            }
            K = (f.kernel.output_scale * c).matrix();
        } else {
            const double w = std::numbers::pi / f.kernel.period;
            for (Eigen::Index d = 0; d < dim_; ++d) {
                if (free_period())
                    acc += (pair_terms_[d] * w).sin().square() / f.kernel.lengthscales[d];
                else
                    acc += pair_terms_[d] / f.kernel.lengthscales[d];
            }
            K = (f.kernel.output_scale * (-2.0 * acc).exp()).matrix();
        }
        K.diagonal().array() += f.noise_variance;
        Factorization fac;
        try {
            fac = factorize_with_jitter(K);
        } catch (const FactorizationError&) {
            return -std::numeric_limits<double>::infinity();
        }
        const auto L = fac.lower.triangularView<Eigen::Lower>();
        const Eigen::VectorXd v = L.solve(resid_);
        const double value = -0.5 * v.squaredNorm() - fac.lower.diagonal().array().log().sum() -
                             0.5 * static_cast<double>(n_) * std::log(2.0 * std::numbers::pi);
        return std::isfinite(value) ? value : -std::numeric_limits<double>::infinity();
    }

private:
    Eigen::VectorXd bound_vector(bool lo) const {
        const auto pick = [lo](const Bounds& b) { return std::log(lo ? b.lo : b.hi); };
        Eigen::VectorXd v(parameter_count());
        v.head(dim_).setConstant(pick(cfg_.bounds.lengthscale));
        v[dim_] = pick(cfg_.bounds.output_scale);
        Eigen::Index next = dim_ + 1;
        if (!cfg_.pinned_noise) v[next++] = pick(cfg_.bounds.noise);
        if (free_period()) v[next] = pick(cfg_.bounds.period);
        return v;
    }

    const FitConfig& cfg_;
    Eigen::VectorXd resid_;
    Eigen::Index dim_;
    Eigen::Index n_;
    std::vector<Eigen::ArrayXXd> pair_terms_;
};

}  // namespace detail

/// Maximizes the log marginal likelihood by multistart Nelder-Mead over
/// bounded log-hyperparameters. A fixed period is never searched. When
/// `warm` is given it seeds the first start and only `warm_restarts` random
/// starts are added; otherwise `restarts` starts are used (the first one a
/// data-scaled heuristic).
inline FitResult fit_hyperparameters(const PointMatrix& X, const Eigen::VectorXd& y,
                                     const FitConfig& cfg, Rng& rng,
                                     const FitResult* warm = nullptr) {
    require(X.rows() >= 2, "fit_hyperparameters needs at least two observations");
    require(X.rows() == y.size(), "fit_hyperparameters: input and target counts differ");
    require(X.cols() >= 1, "fit_hyperparameters: zero-dimensional inputs");
    if (cfg.pinned_noise)
        require(*cfg.pinned_noise >= 0.0, "pinned noise variance must be nonnegative");

    const double prior_mean = cfg.mean_mode == MeanMode::TargetMean ? y.mean() : 0.0;

    PointMatrix Xs = X;
    Eigen::VectorXd ys = y;
    if (cfg.max_points > 0 && X.rows() > cfg.max_points) {
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(static_cast<std::size_t>(cfg.max_points));
        std::sort(idx.begin(), idx.end());
        Xs.resize(cfg.max_points, X.cols());
        ys.resize(cfg.max_points);
        for (Eigen::Index i = 0; i < cfg.max_points; ++i) {
            Xs.row(i) = X.row(idx[static_cast<std::size_t>(i)]);
            ys[i] = y[idx[static_cast<std::size_t>(i)]];
        }
    }

    const Eigen::VectorXd resid = ys.array() - prior_mean;
    detail::LikelihoodSurface surface(Xs, resid, cfg);
    const Eigen::VectorXd lo = surface.lower();
    const Eigen::VectorXd hi = surface.upper();

    // Constant targets: nothing for the signal or the noise to explain.
    if ((y.array() == y[0]).all()) {
        FitResult r;
        r.kernel.family = cfg.family;
        r.kernel.nu = cfg.nu;
        r.kernel.fixed_period = cfg.fixed_period;
        r.kernel.lengthscales = Eigen::VectorXd::Constant(X.cols(), cfg.bounds.lengthscale.clamp(1.0));
        r.kernel.output_scale = cfg.bounds.output_scale.lo;
        r.noise_variance = cfg.pinned_noise ? *cfg.pinned_noise : cfg.bounds.noise.lo;
        r.prior_mean = prior_mean;
        r.log_likelihood = surface.log_likelihood(surface.encode(r));
        return r;
    }

    std::vector<std::pair<Eigen::VectorXd, double>> starts;  // point, initial step
    if (warm != nullptr && warm->kernel.dim() == X.cols()) {
        FitResult w = *warm;
        w.kernel.family = cfg.family;
        starts.emplace_back(surface.encode(w), cfg.warm_initial_step);
    } else {
        FitResult h;
        const double var = std::max(resid.squaredNorm() / static_cast<double>(resid.size()), 1e-12);
        h.kernel.lengthscales = Eigen::VectorXd::Constant(X.cols(), 1.0);
        h.kernel.output_scale = var;
        h.kernel.period = kTwoPi;
        h.noise_variance = cfg.pinned_noise ? *cfg.pinned_noise : 1e-2 * var;
        starts.emplace_back(surface.encode(h), cfg.initial_step);
    }
    const int random_starts = warm != nullptr ? cfg.warm_restarts : cfg.restarts - 1;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < random_starts; ++s) {
        Eigen::VectorXd z(lo.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
        starts.emplace_back(std::move(z), cfg.initial_step);
    }

    const auto negative = [&](const Eigen::VectorXd& z) { return -surface.log_likelihood(z); };
    const auto clamp = [&](Eigen::VectorXd z) { return Eigen::VectorXd(z.cwiseMax(lo).cwiseMin(hi)); };

    Eigen::VectorXd best_z;
    double best = std::numeric_limits<double>::infinity();
    const bool is_warm = warm != nullptr;
    for (const auto& [z0, step] : starts) {
        NelderMeadOptions opt;
        opt.initial_step = step;
        opt.x_tolerance = cfg.x_tolerance;
        opt.max_evaluations = is_warm ? cfg.warm_max_evaluations : cfg.max_evaluations;
        const auto res = nelder_mead(negative, z0, opt, clamp);
        if (res.value < best || best_z.size() == 0) {
            best = res.value;
            best_z = res.x;
        }
    }
    FitResult out = surface.decode(best_z, prior_mean);
    out.log_likelihood = -best;
    return out;
}

}  // namespace shotline
