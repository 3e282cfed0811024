#include "shotline/fit.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace shotline;

namespace {

// Draw targets from a zero-mean GP with the given kernel and noise by
// multiplying a standard normal vector with the covariance's Cholesky factor.
Eigen::VectorXd sample_gp(const KernelSpec& k, double noise, const PointMatrix& X, std::mt19937_64& rng) {
    Eigen::MatrixXd C(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j)
            C(i, j) = kernel_eval(k, X.row(i).transpose(), X.row(j).transpose()) + (i == j ? noise : 0.0);
    const Eigen::MatrixXd L = C.llt().matrixL();
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd z(X.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g(rng);
    return L * z;
}

PointMatrix uniform_inputs(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = u(rng);
    return X;
}

}  // namespace

TEST_CASE("Fixed-period fits keep p = 2pi exactly", "[fit]") {
    std::mt19937_64 gen(21);
    const PointMatrix X = uniform_inputs(15, 2, gen);
    Eigen::VectorXd y(15);
    for (Eigen::Index i = 0; i < 15; ++i) y[i] = std::cos(3.0 * X(i, 0)) + 0.1 * X(i, 1);  // not 2pi-periodic
    FitConfig cfg;
    cfg.family = KernelFamily::Periodic;
    Rng rng(1);
    const auto fit = fit_hyperparameters(X, y, cfg, rng);
    CHECK(fit.kernel.period == kTwoPi);
    CHECK(fit.kernel.fixed_period);
    CHECK_NOTHROW(fit.kernel.validate());
}

TEST_CASE("A free period is searched when the fixed-period flag is off", "[fit]") {
    std::mt19937_64 gen(22);
    const PointMatrix X = uniform_inputs(40, 1, gen);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) y[i] = std::sin(2.0 * X(i, 0));  // period pi
    FitConfig cfg;
    cfg.family = KernelFamily::Periodic;
    cfg.fixed_period = false;
    Rng rng(2);
    const auto fit = fit_hyperparameters(X, y, cfg, rng);
    CHECK(fit.kernel.period != kTwoPi);
    CHECK(fit.kernel.period >= cfg.bounds.period.lo);
    CHECK(fit.kernel.period <= cfg.bounds.period.hi);
}

TEST_CASE("Identical noiseless observations give a degenerate fit at the bounds", "[fit]") {
    PointMatrix X(2, 1);
    X << 1.5, 1.5;
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(2, 0.7);
    FitConfig cfg;
    Rng rng(3);
    const auto fit = fit_hyperparameters(X, y, cfg, rng);
    CHECK(fit.noise_variance == cfg.bounds.noise.lo);
    CHECK(fit.kernel.output_scale == cfg.bounds.output_scale.lo);
    CHECK(fit.prior_mean == 0.7);
    CHECK(std::isfinite(fit.log_likelihood));
}

TEST_CASE("Lengthscale is recovered from GP-generated data", "[fit]") {
    const auto truth = KernelSpec::matern(1, Smoothness::FiveHalves, 1.0, 1.0);
    std::vector<double> recovered;
    for (int seed = 0; seed < 20; ++seed) {
        std::mt19937_64 gen(100 + seed);
        const PointMatrix X = uniform_inputs(80, 1, gen);
        const Eigen::VectorXd y = sample_gp(truth, 0.01, X, gen);
        FitConfig cfg;
        cfg.family = KernelFamily::Matern;
        cfg.mean_mode = MeanMode::Zero;
        Rng rng(static_cast<std::uint64_t>(seed));
        recovered.push_back(fit_hyperparameters(X, y, cfg, rng).kernel.lengthscales[0]);
    }
    std::sort(recovered.begin(), recovered.end());
    const double median = 0.5 * (recovered[9] + recovered[10]);
    INFO("median recovered lengthscale " << median);
    CHECK(median >= 0.5);
    CHECK(median <= 2.0);
}

TEST_CASE("Fitting is deterministic given the RNG seed", "[fit]") {
    std::mt19937_64 gen(23);
    const PointMatrix X = uniform_inputs(20, 2, gen);
    const Eigen::VectorXd y = sample_gp(KernelSpec::periodic(2, 0.5), 1e-3, X, gen);
    FitConfig cfg;
    cfg.family = KernelFamily::Periodic;
    Rng a(9), b(9);
    const auto fa = fit_hyperparameters(X, y, cfg, a);
    const auto fb = fit_hyperparameters(X, y, cfg, b);
    CHECK(fa.kernel.lengthscales == fb.kernel.lengthscales);
    CHECK(fa.kernel.output_scale == fb.kernel.output_scale);
    CHECK(fa.noise_variance == fb.noise_variance);
    CHECK(fa.log_likelihood == fb.log_likelihood);
}

TEST_CASE("Fitted hyperparameters respect bounds and beat the heuristic start", "[fit]") {
    std::mt19937_64 gen(24);
    const PointMatrix X = uniform_inputs(30, 3, gen);
    const Eigen::VectorXd y = sample_gp(KernelSpec::matern(3, Smoothness::FiveHalves, 1.5, 2.0), 0.01, X, gen);
    FitConfig cfg;
    Rng rng(4);
    const auto fit = fit_hyperparameters(X, y, cfg, rng);
    CHECK((fit.kernel.lengthscales.array() >= cfg.bounds.lengthscale.lo * (1 - 1e-12)).all());
    CHECK((fit.kernel.lengthscales.array() <= cfg.bounds.lengthscale.hi * (1 + 1e-12)).all());
    CHECK(fit.noise_variance >= cfg.bounds.noise.lo * (1 - 1e-12));
    CHECK(fit.noise_variance <= cfg.bounds.noise.hi * (1 + 1e-12));
    // the reported likelihood is the model's
    const GpModel model = build_model(fit, X, y);
    CHECK_THAT(model.log_marginal_likelihood(), Catch::Matchers::WithinRel(fit.log_likelihood, 1e-8));
    const GpModel naive(KernelSpec::matern(3), 1e-2, y.mean(), X, y);
    CHECK(fit.log_likelihood >= naive.log_marginal_likelihood());
}

TEST_CASE("Pinned noise is returned untouched", "[fit]") {
    std::mt19937_64 gen(25);
    const PointMatrix X = uniform_inputs(12, 1, gen);
    const Eigen::VectorXd y = sample_gp(KernelSpec::matern(1), 0.05, X, gen);
    FitConfig cfg;
    cfg.pinned_noise = 0.05;
    Rng rng(5);
    CHECK(fit_hyperparameters(X, y, cfg, rng).noise_variance == 0.05);
}

TEST_CASE("Warm starts and subsampling stay valid", "[fit]") {
    std::mt19937_64 gen(26);
    const PointMatrix X = uniform_inputs(300, 2, gen);
    const Eigen::VectorXd y = sample_gp(KernelSpec::periodic(2, 0.7), 0.01, X, gen);
    FitConfig cfg;
    cfg.family = KernelFamily::Periodic;
    cfg.max_points = 64;
    Rng rng(6);
    const auto cold = fit_hyperparameters(X, y, cfg, rng);
    const auto warm = fit_hyperparameters(X, y, cfg, rng, &cold);
    CHECK_NOTHROW(build_model(warm, X, y));
    CHECK(warm.kernel.period == kTwoPi);
    CHECK(warm.prior_mean == y.mean());
}

TEST_CASE("Fitting needs two observations", "[fit]") {
    PointMatrix X(1, 1);
    X << 0.0;
    FitConfig cfg;
    Rng rng(7);
    CHECK_THROWS_AS(fit_hyperparameters(X, Eigen::VectorXd::Zero(1), cfg, rng), std::invalid_argument);
}
