#include "shotline/kernel.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <random>

using namespace shotline;
using Catch::Matchers::WithinAbs;

namespace {

ParamVector random_point(Eigen::Index d, std::mt19937_64& rng, double lo = -10.0, double hi = 10.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    ParamVector p(d);
    for (Eigen::Index i = 0; i < d; ++i) p[i] = u(rng);
    return p;
}

KernelSpec random_kernel(KernelFamily family, Eigen::Index d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> logu(std::log(0.05), std::log(20.0));
    KernelSpec k = family == KernelFamily::Matern ? KernelSpec::matern(d) : KernelSpec::periodic(d);
    for (Eigen::Index i = 0; i < d; ++i) k.lengthscales[i] = std::exp(logu(rng));
    k.output_scale = std::exp(logu(rng));
    return k;
}

}  // namespace

TEST_CASE("Self covariance equals the output scale", "[kernel]") {
    const ParamVector theta = (ParamVector(3) << 0.3, 5.9, 2.2).finished();
    for (auto nu : {Smoothness::Half, Smoothness::ThreeHalves, Smoothness::FiveHalves}) {
        const auto k = KernelSpec::matern(3, nu, 0.7, 2.5);
        CHECK(kernel_eval(k, theta, theta) == 2.5);
    }
    CHECK(kernel_eval(KernelSpec::periodic(3, 0.4, 1.75), theta, theta) == 1.75);
}

TEST_CASE("Matern 1/2 closed form", "[kernel]") {
    // exp(-1) from a 30-digit mpmath evaluation
    const auto k = KernelSpec::matern(1, Smoothness::Half, 1.0, 1.0);
    const ParamVector a = ParamVector::Constant(1, 0.0);
    const ParamVector b = ParamVector::Constant(1, 1.0);
    CHECK_THAT(kernel_eval(k, a, b), WithinAbs(0.367879441171442321595523770161, 1e-15));
}

TEST_CASE("Matern 3/2 and 5/2 match their polynomial-exponential forms", "[kernel]") {
    const ParamVector a = (ParamVector(2) << 0.0, 0.0).finished();
    const ParamVector b = (ParamVector(2) << 0.6, 0.8).finished();
    // anisotropic: r = sqrt((0.6/0.5)^2 + (0.8/2)^2)
    auto k = KernelSpec::matern(2, Smoothness::ThreeHalves, 1.0, 1.3);
    k.lengthscales << 0.5, 2.0;
    const double r = std::sqrt(1.2 * 1.2 + 0.4 * 0.4);
    CHECK_THAT(kernel_eval(k, a, b),
               WithinAbs(1.3 * (1 + std::sqrt(3.0) * r) * std::exp(-std::sqrt(3.0) * r), 1e-14));
    k.nu = Smoothness::FiveHalves;
    CHECK_THAT(kernel_eval(k, a, b),
               WithinAbs(1.3 * (1 + std::sqrt(5.0) * r + 5 * r * r / 3) * std::exp(-std::sqrt(5.0) * r),
                         1e-14));
}

TEST_CASE("Periodic kernel is invariant under 2pi shifts of any coordinate", "[kernel]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto k = random_kernel(KernelFamily::Periodic, 3, rng);
        const ParamVector a = random_point(3, rng);
        const ParamVector b = random_point(3, rng);
        for (Eigen::Index i = 0; i < 3; ++i) {
            ParamVector shifted = a;
            shifted[i] += kTwoPi;
            CHECK_THAT(kernel_eval(k, shifted, b), WithinAbs(kernel_eval(k, a, b), 1e-12 * k.output_scale));
            CHECK_THAT(kernel_eval(k, a, shifted), WithinAbs(kernel_eval(k, a, a), 1e-12 * k.output_scale));
        }
    }
}

TEST_CASE("Periodic kernel follows exp(-2 sum sin^2 / l)", "[kernel]") {
    auto k = KernelSpec::periodic(2, 1.0, 0.9);
    k.lengthscales << 0.5, 3.0;
    const ParamVector a = (ParamVector(2) << 0.1, 4.0).finished();
    const ParamVector b = (ParamVector(2) << 1.3, 0.5).finished();
    const double s0 = std::sin(0.5 * (0.1 - 1.3));
    const double s1 = std::sin(0.5 * (4.0 - 0.5));
    CHECK_THAT(kernel_eval(k, a, b), WithinAbs(0.9 * std::exp(-2.0 * (s0 * s0 / 0.5 + s1 * s1 / 3.0)), 1e-15));
}

TEST_CASE("Kernels are exactly symmetric", "[kernel][property]") {
    std::mt19937_64 rng(12);
    for (auto family : {KernelFamily::Matern, KernelFamily::Periodic}) {
        for (int trial = 0; trial < 1000; ++trial) {
            const Eigen::Index d = 1 + trial % 4;
            auto k = random_kernel(family, d, rng);
            k.nu = static_cast<Smoothness>(trial % 3);
            const ParamVector a = random_point(d, rng);
            const ParamVector b = random_point(d, rng);
            REQUIRE(kernel_eval(k, a, b) == kernel_eval(k, b, a));
        }
    }
}

TEST_CASE("Gram matrices are positive semidefinite", "[kernel][property]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto family = trial % 2 ? KernelFamily::Periodic : KernelFamily::Matern;
        const Eigen::Index d = 1 + trial % 4;
        const Eigen::Index n = 2 + trial % 19;
        auto k = random_kernel(family, d, rng);
        k.output_scale = 1.0;
        PointMatrix X(n, d);
        for (Eigen::Index i = 0; i < n; ++i) X.row(i) = random_point(d, rng, 0.0, kTwoPi).transpose();
        Eigen::MatrixXd K = gram_matrix(k, X);
        K.diagonal().array() += 1e-8;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        INFO("trial " << trial);
        CHECK(es.eigenvalues().minCoeff() >= 0.0);
    }
}

TEST_CASE("Kernel evaluation rejects bad input", "[kernel]") {
    const auto k = KernelSpec::matern(2);
    const ParamVector a = ParamVector::Zero(2);
    CHECK_THROWS_AS(kernel_eval(k, a, ParamVector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(kernel_eval(KernelSpec::matern(3), a, a), std::invalid_argument);
    auto bad = k;
    bad.lengthscales[1] = 0.0;
    CHECK_THROWS_AS(kernel_eval(bad, a, a), std::invalid_argument);
    bad = k;
    bad.output_scale = -1.0;
    CHECK_THROWS_AS(kernel_eval(bad, a, a), std::invalid_argument);
    auto per = KernelSpec::periodic(2);
    per.period = 3.0;
    CHECK_THROWS_AS(kernel_eval(per, a, a), std::invalid_argument);
    per.fixed_period = false;
    CHECK_NOTHROW(kernel_eval(per, a, a));
    CHECK_THROWS_AS(parse_smoothness(1.0), std::invalid_argument);
    CHECK_THROWS_AS(parse_kernel_family("rbf"), std::invalid_argument);
}
