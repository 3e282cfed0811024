#pragma once

#include "shotline/acquisition.hpp"
#include "shotline/budget.hpp"
#include "shotline/common.hpp"
#include "shotline/fit.hpp"
#include "shotline/gp.hpp"
#include "shotline/objective.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace shotline {

enum class Method { Vanilla, Lsr };

inline std::string_view to_string(Method m) { return m == Method::Vanilla ? "vanilla" : "lsr"; }

inline Method parse_method(std::string_view s) {
    if (s == "vanilla") return Method::Vanilla;
    if (s == "lsr") return Method::Lsr;
    throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline constexpr double kDefaultBetaLcb = 4.0;
inline constexpr double kDefaultBetaLsr = 25.0;

struct BoConfig {
    Method method = Method::Vanilla;
    KernelFamily kernel = KernelFamily::Matern;
    Smoothness nu = Smoothness::FiveHalves;
    double gamma = 0.1;
    long total_budget = 0;
    long high_shots = 1;
    double ratio = 1.0;  // s_low / s_bar, LSR only
    double beta = kDefaultBetaLcb;
    // Pin the GP noise to sigma_1^2 / s instead of fitting it.
    bool pin_noise = false;
    FitConfig fit;
    // Subsample size for the low-shot hyperparameter search.
    Eigen::Index low_shot_fit_points = 128;
    AcquisitionOptimizerOptions acquisition;

    long low_shots() const {
        if (method == Method::Vanilla) return high_shots;
        return std::lround(ratio * static_cast<double>(high_shots));
    }
};

enum class Phase { Init, Bo };

inline std::string_view to_string(Phase p) { return p == Phase::Init ? "init" : "bo"; }

struct QueryRecord {
    Phase phase = Phase::Init;
    int k = 0;  // index within the phase
    ParamVector theta;
    long shots = 0;
    double y = 0.0;
    double true_value = 0.0;  // analysis only
    std::optional<double> incumbent_y;
    long cumulative_shots = 0;
    std::optional<FitResult> model;  // hyperparameters used to pick this query
    std::optional<double> low_shot_mean;  // mu_g(theta), LSR BO queries only
    double wall_seconds = 0.0;
};

struct RunRecord {
    BoConfig config;
    std::uint64_t seed = 0;
    std::vector<QueryRecord> queries;
    std::optional<FitResult> low_shot_model;

    bool eligible(const QueryRecord& q) const { return q.shots == config.high_shots; }
};

/// Best (lowest observed y) incumbent-eligible query: every s_bar-shot
/// query; low-shot initialization queries never qualify.
inline std::pair<ParamVector, double> incumbent(const RunRecord& record) {
    const QueryRecord* best = nullptr;
    for (const auto& q : record.queries)
        if (record.eligible(q) && (best == nullptr || q.y < best->y)) best = &q;
    if (best == nullptr) throw std::invalid_argument("incumbent: record has no eligible query");
    return {best->theta, best->y};
}

namespace detail {

struct RunStreams {
    Rng init;
    Rng noise;
    Rng acquisition;
    Rng fit;

    explicit RunStreams(std::uint64_t seed)
        : init(derive_seed(seed, 1)),
          noise(derive_seed(seed, 2)),
          acquisition(derive_seed(seed, 3)),
          fit(derive_seed(seed, 4)) {}
};

inline PointMatrix stack(const std::vector<ParamVector>& rows, Eigen::Index dim) {
    PointMatrix X(static_cast<Eigen::Index>(rows.size()), dim);
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return X;
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Hyperparameters used while fewer than two observations exist.
inline FitResult default_fit(const BoConfig& cfg, Eigen::Index dim, const std::vector<double>& targets,
                             Eigen::VectorXd lengthscales, double output_scale, double noise) {
    FitResult f;
    f.kernel.family = cfg.kernel;
    f.kernel.nu = cfg.nu;
    f.kernel.lengthscales = lengthscales.size() == dim ? std::move(lengthscales)
                                                       : Eigen::VectorXd::Constant(dim, 1.0);
    f.kernel.output_scale = cfg.fit.bounds.output_scale.clamp(output_scale);
    f.noise_variance = noise;
    f.prior_mean = (cfg.fit.mean_mode == MeanMode::TargetMean && !targets.empty()) ? targets.front() : 0.0;
    return f;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline void validate_common(const BoConfig& cfg) {
    require(cfg.high_shots >= 1, "shots per evaluation must be at least 1");
    require(cfg.total_budget >= cfg.high_shots, "budget is smaller than one high-shot query");
    require(cfg.beta >= 0.0, "beta must be nonnegative");
}

}  // namespace detail

/// Vanilla BO: floor(gamma B / s_bar) uniform high-shot queries, then LCB
/// iterations on a GP refit to all data until the next s_bar query no
/// longer fits the budget.
inline RunRecord run_vanilla_bo(const ObjectiveSpec& obj, const BoConfig& cfg, std::uint64_t seed) {
    detail::validate_common(cfg);
    require(cfg.gamma >= 0.0 && cfg.gamma <= 1.0, "vanilla BO needs gamma in [0, 1]");
    const Eigen::Index dim = obj.dimension();
    const long s_bar = cfg.high_shots;

    RunRecord rec;
    rec.config = cfg;
    rec.config.method = Method::Vanilla;
    rec.seed = seed;
    detail::RunStreams rng(seed);
    BudgetLedger ledger(cfg.total_budget, s_bar, s_bar, cfg.gamma);

    std::vector<ParamVector> xs;
    std::vector<double> ys;
    std::optional<double> best;
    const auto record = [&](Phase phase, int k, const ShotSample& s, std::optional<FitResult> model,
                            double wall) {
        ledger.charge(s.shots);
        xs.push_back(s.theta);
        ys.push_back(s.value);
        if (!best || s.value < *best) best = s.value;
        rec.queries.push_back({phase, k, s.theta, s.shots, s.value, s.true_value, best,
                               ledger.spent(), std::move(model), std::nullopt, wall});
    };

    const long m = ledger.init_count();
    for (long i = 0; i < m; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const ParamVector theta = uniform_point(dim, rng.init);
        record(Phase::Init, static_cast<int>(i), evaluate(obj, theta, s_bar, rng.noise), std::nullopt,
               detail::seconds_since(t0));
    }

    FitConfig fc = cfg.fit;
    fc.family = cfg.kernel;
    fc.nu = cfg.nu;
    if (cfg.pin_noise) fc.pinned_noise = shot_noise_variance(obj, s_bar);

    std::optional<FitResult> prev;
    for (int k = 0; ledger.can_afford(s_bar); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        FitResult fit;
        if (xs.size() >= 2) {
            fit = fit_hyperparameters(detail::stack(xs, dim), detail::to_vector(ys), fc, rng.fit,
                                      prev ? &*prev : nullptr);
            prev = fit;
        } else {
            fit = detail::default_fit(cfg, dim, ys, {}, 1.0,
                                      fc.pinned_noise.value_or(fc.bounds.noise.lo));
        }
        auto model = std::make_shared<const GpModel>(build_model(fit, detail::stack(xs, dim), detail::to_vector(ys)));
        const auto acq = Acquisition::lcb(model, cfg.beta);
        const ParamVector theta = optimize_acquisition(acq, rng.acquisition, cfg.acquisition);
        record(Phase::Bo, k, evaluate(obj, theta, s_bar, rng.noise), fit, detail::seconds_since(t0));
    }
    return rec;
}

/// Low-shot residual BO.
///
/// Phase 1 spends gamma B on floor(gamma B / s_low) uniform low-shot queries
/// and freezes the posterior mean mu_g of a GP fit to them. Phase 2 fits a
/// residual GP to {theta_i, y_i - mu_g(theta_i)} over the s_bar-shot
/// observations and minimizes (mu_g + mu_eps) - sqrt(beta) sigma_eps.
inline RunRecord run_lsr_bo(const ObjectiveSpec& obj, const BoConfig& cfg, std::uint64_t seed) {
    detail::validate_common(cfg);
    require(cfg.gamma > 0.0 && cfg.gamma < 1.0, "LSR BO needs gamma in (0, 1)");
    require(cfg.ratio > 0.0 && cfg.ratio <= 1.0, "shot ratio r must lie in (0, 1]");
    const long s_bar = cfg.high_shots;
    const long s_low = cfg.low_shots();
    require(s_low >= 1, "r * s_bar rounds to zero low-shot measurements");
    const Eigen::Index dim = obj.dimension();

    RunRecord rec;
    rec.config = cfg;
    rec.config.method = Method::Lsr;
    rec.seed = seed;
    detail::RunStreams rng(seed);
    BudgetLedger ledger(cfg.total_budget, s_bar, s_low, cfg.gamma);
    const long m = ledger.init_count();
    require(m >= 1, "gamma * B is smaller than one low-shot query");

    std::optional<double> best;
    std::vector<ParamVector> low_x;
    std::vector<double> low_y;
    for (long i = 0; i < m; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const ParamVector theta = uniform_point(dim, rng.init);
        const ShotSample s = evaluate(obj, theta, s_low, rng.noise);
        ledger.charge(s_low);
        low_x.push_back(s.theta);
        low_y.push_back(s.value);
        if (s.shots == s_bar && (!best || s.value < *best)) best = s.value;
        rec.queries.push_back({Phase::Init, static_cast<int>(i), s.theta, s.shots, s.value,
                               s.true_value, best, ledger.spent(), std::nullopt, std::nullopt,
                               detail::seconds_since(t0)});
    }

    FitConfig low_fc = cfg.fit;
    low_fc.family = cfg.kernel;
    low_fc.nu = cfg.nu;
    low_fc.max_points = cfg.low_shot_fit_points;
    if (cfg.pin_noise) low_fc.pinned_noise = shot_noise_variance(obj, s_low);
    const PointMatrix low_X = detail::stack(low_x, dim);
    const Eigen::VectorXd low_Y = detail::to_vector(low_y);
    const FitResult low_fit =
        m >= 2 ? fit_hyperparameters(low_X, low_Y, low_fc, rng.fit)
               : detail::default_fit(cfg, dim, low_y, {}, 1.0, low_fc.pinned_noise.value_or(low_fc.bounds.noise.lo));
    rec.low_shot_model = low_fit;
    const FrozenMean mu_g(std::make_shared<const GpModel>(build_model(low_fit, low_X, low_Y)));

    FitConfig res_fc = cfg.fit;
    res_fc.family = cfg.kernel;
    res_fc.nu = cfg.nu;
    if (cfg.pin_noise) res_fc.pinned_noise = shot_noise_variance(obj, s_bar);

    std::vector<ParamVector> hx;
    std::vector<double> residuals;
    std::optional<FitResult> prev;
    for (int k = 0; ledger.can_afford(s_bar); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        FitResult fit;
        if (hx.size() >= 2) {
            fit = fit_hyperparameters(detail::stack(hx, dim), detail::to_vector(residuals), res_fc, rng.fit,
                                      prev ? &*prev : nullptr);
            prev = fit;
        } else {
            // Residual prior before any fit: the low-shot lengthscales with the
            // low-shot noise level as the residual signal variance.
            fit = detail::default_fit(cfg, dim, residuals, low_fit.kernel.lengthscales,
                                      low_fit.noise_variance,
                                      res_fc.pinned_noise.value_or(res_fc.bounds.noise.lo));
        }
        auto residual_model = std::make_shared<const GpModel>(
            build_model(fit, detail::stack(hx, dim), detail::to_vector(residuals)));
        const auto acq = Acquisition::lsr_lcb(mu_g, residual_model, cfg.beta);
        const ParamVector theta = optimize_acquisition(acq, rng.acquisition, cfg.acquisition);
        const ShotSample s = evaluate(obj, theta, s_bar, rng.noise);
        ledger.charge(s_bar);
        const double g = mu_g(s.theta);
        hx.push_back(s.theta);
        residuals.push_back(s.value - g);
        if (!best || s.value < *best) best = s.value;
        rec.queries.push_back({Phase::Bo, k, s.theta, s.shots, s.value, s.true_value, best,
                               ledger.spent(), fit, g, detail::seconds_since(t0)});
    }
    return rec;
}

inline RunRecord run_bo(const ObjectiveSpec& obj, const BoConfig& cfg, std::uint64_t seed) {
    return cfg.method == Method::Vanilla ? run_vanilla_bo(obj, cfg, seed) : run_lsr_bo(obj, cfg, seed);
}

}  // namespace shotline
