#include "shotline/objective.hpp"

#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace shotline;
using Catch::Matchers::WithinAbs;

namespace {

Hamiltonian single_z() { return Hamiltonian{1, {{1.0, "Z"}}}; }

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> draws(const ObjectiveSpec& obj, const ParamVector& theta, long shots, int count,
                          std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out.push_back(evaluate(obj, theta, shots, rng).value);
    return out;
}

}  // namespace

TEST_CASE("Identity circuit leaves |0> in place", "[objective]") {
    const auto obj = ObjectiveSpec::circuit(single_z(), 1, 0.0);
    CHECK(true_value(obj, ParamVector::Zero(1)) == 1.0);
}

TEST_CASE("RY(pi) flips the qubit", "[objective]") {
    const auto obj = ObjectiveSpec::circuit(single_z(), 1, 0.0);
    CHECK_THAT(true_value(obj, ParamVector::Constant(1, std::numbers::pi)), WithinAbs(-1.0, 1e-15));
}

TEST_CASE("Circuit energies match the dense-matrix oracle", "[objective]") {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 40; ++trial) {
        const int q = 1 + trial % 4;
        const int layers = 1 + trial % 3;
        const auto h = oracle::random_hamiltonian(q, 4, gen);
        const auto obj = ObjectiveSpec::circuit(h, layers, 0.0);
        const ParamVector theta = uniform_point(obj.dimension(), gen);
        INFO("qubits " << q << " layers " << layers);
        CHECK_THAT(true_value(obj, theta), WithinAbs(oracle::energy(h, layers, theta), 1e-10));
    }
}

TEST_CASE("Dense Hamiltonian agrees with the Kronecker-product oracle", "[objective]") {
    std::mt19937_64 gen(42);
    for (int q = 1; q <= 4; ++q) {
        const auto h = oracle::random_hamiltonian(q, 6, gen);
        CHECK((dense_hamiltonian(h) - oracle::hamiltonian(h)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("Objectives are 2pi-periodic in every coordinate", "[objective][property]") {
    std::mt19937_64 gen(43);
    const auto circuit = ObjectiveSpec::circuit(oracle::random_hamiltonian(2, 5, gen), 2, 0.0);
    const auto synthetic = ObjectiveSpec::synthetic(Eigen::Vector3d(1.0, -0.5, 2.0), Eigen::Vector3d(0.1, 2.0, 4.0),
                                                    0.3, 0.0);
    for (const auto* obj : {&circuit, &synthetic}) {
        for (int i = 0; i < 200; ++i) {
            const ParamVector theta = uniform_point(obj->dimension(), gen);
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                ParamVector shifted = theta;
                shifted[k] += kTwoPi;
                REQUIRE_THAT(true_value(*obj, shifted), WithinAbs(true_value(*obj, theta), 1e-10));
            }
        }
    }
}

TEST_CASE("Noiseless evaluation returns J exactly", "[objective]") {
    const auto obj = ObjectiveSpec::synthetic(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.5, 1.5), 0.0, 0.0);
    Rng rng(1);
    const ParamVector theta = (ParamVector(2) << 1.0, 2.0).finished();
    const auto s = evaluate(obj, theta, 7, rng);
    CHECK(s.value == true_value(obj, theta));
    CHECK(s.true_value == s.value);
    CHECK(s.shots == 7);
}

TEST_CASE("Shot noise has variance sigma_1^2 / s", "[objective]") {
    const auto obj = ObjectiveSpec::synthetic(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), 0.0, 1.0);
    const auto v = sample_variance(draws(obj, ParamVector::Constant(1, 0.4), 10000, 100000, 44));
    CHECK(std::abs(v - 1e-4) <= 0.05 * 1e-4);
}

TEST_CASE("Shot noise is unbiased", "[objective][property]") {
    std::mt19937_64 gen(45);
    const auto obj = ObjectiveSpec::circuit(oracle::random_hamiltonian(2, 4, gen), 1, 0.7);
    const ParamVector theta = uniform_point(2, gen);
    const auto ys = draws(obj, theta, 3, 100000, 46);
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    const double se = std::sqrt(shot_noise_variance(obj, 3) / static_cast<double>(ys.size()));
    CHECK(std::abs(mean - true_value(obj, theta)) <= 4.0 * se);
}

TEST_CASE("Quadrupling shots quarters the variance", "[objective][property]") {
    const auto obj = ObjectiveSpec::synthetic(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), 0.0, 2.0);
    const ParamVector theta = ParamVector::Constant(1, 1.1);
    for (long s : {1L, 25L, 100L}) {
        const double ratio = sample_variance(draws(obj, theta, s, 100000, 47 + static_cast<std::uint64_t>(s))) /
                             sample_variance(draws(obj, theta, 4 * s, 100000, 48 + static_cast<std::uint64_t>(s)));
        INFO("s = " << s << " ratio " << ratio);
        CHECK(std::abs(ratio - 4.0) <= 0.4);
    }
}

TEST_CASE("Evaluation is deterministic given the seed", "[objective]") {
    const auto obj = ObjectiveSpec::synthetic(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Zero(1), 0.0, 1.0);
    Rng a(9), b(9);
    CHECK(evaluate(obj, ParamVector::Constant(1, 0.2), 100, a).value ==
          evaluate(obj, ParamVector::Constant(1, 0.2), 100, b).value);
}

TEST_CASE("Sampled energies lie within the spectrum", "[objective][property]") {
    std::mt19937_64 gen(49);
    for (int q = 1; q <= 4; ++q) {
        const auto h = oracle::random_hamiltonian(q, 5, gen);
        const auto bounds = spectrum_bounds(h);
        const auto obj = ObjectiveSpec::circuit(h, 2, 0.0);
        for (int i = 0; i < 100; ++i) {
            const double e = true_value(obj, uniform_point(obj.dimension(), gen));
            REQUIRE(e >= bounds.lowest - 1e-12);
            REQUIRE(e <= bounds.highest + 1e-12);
        }
    }
}

TEST_CASE("Synthetic ground truth is closed form", "[objective]") {
    const auto obj = ObjectiveSpec::synthetic(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2d(0.3, 5.0), 0.0, 0.1);
    const auto g = ground_truth_minimum(obj);
    CHECK(g.value == -2.0);
    CHECK(g.mode == GroundTruthMode::Exact);
    CHECK_THAT(true_value(obj, g.argmin), WithinAbs(-2.0, 1e-12));
    CHECK_FALSE(g.spectrum.has_value());
}

TEST_CASE("Single-qubit rotation reaches the ground state", "[objective]") {
    const auto g = ground_truth_minimum(ObjectiveSpec::circuit(single_z(), 1, 0.0));
    CHECK(g.mode == GroundTruthMode::Grid);
    CHECK_THAT(g.value, WithinAbs(-1.0, 1e-12));
    CHECK_THAT(g.argmin[0], WithinAbs(std::numbers::pi, 1e-6));
    REQUIRE(g.spectrum.has_value());
    CHECK_THAT(g.spectrum->lowest, WithinAbs(-1.0, 1e-12));
}

TEST_CASE("Eigen bound never exceeds the reachable minimum", "[objective]") {
    std::mt19937_64 gen(50);
    for (int trial = 0; trial < 5; ++trial) {
        const auto h = oracle::random_hamiltonian(2, 4, gen);
        // one layer keeps d = 2 on the grid path; two layers exercise the search path
        for (int layers : {1, 2}) {
            const auto g = ground_truth_minimum(ObjectiveSpec::circuit(h, layers, 0.0));
            CHECK(g.mode == (layers == 1 ? GroundTruthMode::Grid : GroundTruthMode::Search));
            CHECK(g.spectrum->lowest <= g.value + 1e-9);
            CHECK_THAT(true_value(ObjectiveSpec::circuit(h, layers, 0.0), g.argmin), WithinAbs(g.value, 1e-12));
        }
    }
}

TEST_CASE("Many noisy samples beat few precise ones", "[objective][property]") {
    std::vector<double> precise, cheap;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto r = oracle::cheap_vs_precise(seed, 10, 10000);
        precise.push_back(r.precise_mse);
        cheap.push_back(r.cheap_mse);
    }
    INFO("median MSE precise " << oracle::median(precise) << " cheap " << oracle::median(cheap));
    CHECK(oracle::median(cheap) < oracle::median(precise));
}

TEST_CASE("Objective construction and evaluation reject bad input", "[objective]") {
    CHECK_THROWS_AS(ObjectiveSpec::circuit(Hamiltonian{2, {{1.0, "Z"}}}, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveSpec::circuit(Hamiltonian{1, {{1.0, "Q"}}}, 1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveSpec::circuit(Hamiltonian{13, {{1.0, std::string(13, 'Z')}}}, 1, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveSpec::circuit(single_z(), 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveSpec::synthetic(Eigen::Vector2d(1, 1), Eigen::VectorXd::Zero(1), 0.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(ObjectiveSpec::synthetic(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), 0.0, -1.0),
                    std::invalid_argument);
    const auto obj = ObjectiveSpec::circuit(single_z(), 1, 1.0);
    Rng rng(1);
    CHECK_THROWS_AS(evaluate(obj, ParamVector::Zero(1), 0, rng), std::invalid_argument);
    CHECK_THROWS_AS(true_value(obj, ParamVector::Zero(2)), std::invalid_argument);
}
