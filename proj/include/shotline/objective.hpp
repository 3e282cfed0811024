#pragma once

#include "shotline/common.hpp"
#include "shotline/pattern_search.hpp"
#include "shotline/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <variant>

namespace shotline {

/// J(theta) = offset + sum_i a_i cos(theta_i - phi_i).
struct SyntheticObjective {
    Eigen::VectorXd amplitudes;
    Eigen::VectorXd phases;
    double offset = 0.0;
};

/// J(theta) = <psi(theta)| H |psi(theta)> for the layered RY/CNOT ansatz.
struct CircuitObjective {
    int layers = 1;
    Hamiltonian hamiltonian;
};

enum class ObjectiveKind { Synthetic, Circuit };

/// Objective definition plus its single-shot noise variance sigma_1^2.
/// Immutable once built.
class ObjectiveSpec {
public:
    static ObjectiveSpec synthetic(Eigen::VectorXd amplitudes, Eigen::VectorXd phases, double offset,
                                   double noise_scale) {
        require(amplitudes.size() >= 1, "synthetic objective needs dimension >= 1");
        require(amplitudes.size() == phases.size(), "synthetic amplitudes and phases differ in length");
        require(amplitudes.allFinite() && phases.allFinite() && std::isfinite(offset),
                "synthetic objective parameters must be finite");
        return ObjectiveSpec(SyntheticObjective{std::move(amplitudes), std::move(phases), offset},
                             noise_scale);
    }

    static ObjectiveSpec circuit(Hamiltonian hamiltonian, int layers, double noise_scale) {
        hamiltonian.validate();
        require(layers >= 1, "circuit objective needs at least one layer");
        return ObjectiveSpec(CircuitObjective{layers, std::move(hamiltonian)}, noise_scale);
    }

    ObjectiveKind kind() const {
        return std::holds_alternative<SyntheticObjective>(def_) ? ObjectiveKind::Synthetic
                                                                : ObjectiveKind::Circuit;
    }

    Eigen::Index dimension() const {
        if (const auto* s = std::get_if<SyntheticObjective>(&def_)) return s->amplitudes.size();
        const auto& c = std::get<CircuitObjective>(def_);
        return static_cast<Eigen::Index>(c.hamiltonian.qubits) * c.layers;
    }

    double noise_scale() const { return noise_scale_; }
    const SyntheticObjective* as_synthetic() const { return std::get_if<SyntheticObjective>(&def_); }
    const CircuitObjective* as_circuit() const { return std::get_if<CircuitObjective>(&def_); }

private:
    ObjectiveSpec(std::variant<SyntheticObjective, CircuitObjective> def, double noise_scale)
        : def_(std::move(def)), noise_scale_(noise_scale) {
        require(noise_scale >= 0.0 && std::isfinite(noise_scale), "noise scale must be nonnegative");
    }

    std::variant<SyntheticObjective, CircuitObjective> def_;
    double noise_scale_;
};

inline double true_value(const ObjectiveSpec& obj, const ParamVector& theta) {
    require(theta.size() == obj.dimension(), "objective: parameter dimension mismatch");
    if (const auto* s = obj.as_synthetic())
        return s->offset + (s->amplitudes.array() * (theta - s->phases).array().cos()).sum();
    const auto* c = obj.as_circuit();
    return prepare_ansatz(c->hamiltonian.qubits, c->layers, theta).expectation(c->hamiltonian);
}

/// One noisy query. `true_value` is kept for analysis; the optimizer only
/// ever reads `value`.
struct ShotSample {
    ParamVector theta;
    long shots = 0;
    double value = 0.0;
    double true_value = 0.0;
};

/// Shot noise variance sigma^2(s) = sigma_1^2 / s.
inline double shot_noise_variance(const ObjectiveSpec& obj, long shots) {
    require(shots >= 1, "shot count must be at least 1");
    return obj.noise_scale() / static_cast<double>(shots);
}

/// y = J(theta) + eps, eps ~ N(0, sigma_1^2 / s).
inline ShotSample evaluate(const ObjectiveSpec& obj, const ParamVector& theta, long shots, Rng& rng) {
    const double sd = std::sqrt(shot_noise_variance(obj, shots));
    const double j = true_value(obj, theta);
    std::normal_distribution<double> noise(0.0, 1.0);
    return {theta, shots, j + sd * noise(rng), j};
}

enum class GroundTruthMode { Exact, Grid, Search };

inline std::string_view to_string(GroundTruthMode m) {
    switch (m) {
        case GroundTruthMode::Exact: return "exact";
        case GroundTruthMode::Grid: return "grid";
        case GroundTruthMode::Search: return "search";
    }
    return "exact";
}

struct GroundTruth {
    double value = 0.0;
    GroundTruthMode mode = GroundTruthMode::Exact;
    ParamVector argmin;
    std::optional<SpectrumBounds> spectrum;  // circuits only
};

struct GroundTruthOptions {
    int grid_per_dim = 64;
    int grid_max_dim = 3;
    int refine = 8;
    int search_samples = 4096;
    int search_refine = 32;
    std::uint64_t seed = 0x5eed;
};

/// Reference minimum for regret.
///
/// Synthetic objectives are solved in closed form. Circuits report the exact
/// spectrum bounds and the ansatz-reachable minimum: a dense grid with local
/// refinement for d <= 3, or a seeded multistart search for larger d (the
/// grid is not attempted there).
inline GroundTruth ground_truth_minimum(const ObjectiveSpec& obj, const GroundTruthOptions& opt = {}) {
    const Eigen::Index d = obj.dimension();
    if (const auto* s = obj.as_synthetic()) {
        GroundTruth g;
        g.value = s->offset - s->amplitudes.cwiseAbs().sum();
        g.argmin = ParamVector(d);
        for (Eigen::Index i = 0; i < d; ++i)
            g.argmin[i] = wrap_angle(s->amplitudes[i] >= 0.0 ? s->phases[i] + std::numbers::pi : s->phases[i]);
        return g;
    }

    GroundTruth g;
    g.spectrum = spectrum_bounds(obj.as_circuit()->hamiltonian);
    const auto J = [&](const ParamVector& t) { return true_value(obj, t); };
    const auto wrap_point = [](Eigen::VectorXd x) { return wrap(std::move(x)); };

    std::vector<std::pair<double, ParamVector>> seeds;
    PatternSearchOptions ps;
    ps.shrink = 0.5;
    ps.min_step = 1e-9;
    ps.max_iterations = 200;

    if (d <= opt.grid_max_dim) {
        g.mode = GroundTruthMode::Grid;
        const int m = opt.grid_per_dim;
        const double h = kTwoPi / m;
        std::size_t total = 1;
        for (Eigen::Index i = 0; i < d; ++i) total *= static_cast<std::size_t>(m);
        ParamVector t(d);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (Eigen::Index i = 0; i < d; ++i) {
                t[i] = h * static_cast<double>(rem % static_cast<std::size_t>(m));
                rem /= static_cast<std::size_t>(m);
            }
            seeds.emplace_back(J(t), t);
        }
        ps.initial_step = h;
    } else {
        g.mode = GroundTruthMode::Search;
        Rng rng(opt.seed);
        for (int i = 0; i < opt.search_samples; ++i) {
            ParamVector t = uniform_point(d, rng);
            seeds.emplace_back(J(t), std::move(t));
        }
        ps.initial_step = std::numbers::pi / 8.0;
    }
    const int n_refine = g.mode == GroundTruthMode::Grid ? opt.refine : opt.search_refine;
    std::stable_sort(seeds.begin(), seeds.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    g.value = seeds.front().first;
    g.argmin = seeds.front().second;
    for (int r = 0; r < n_refine && r < static_cast<int>(seeds.size()); ++r) {
        const auto& [v0, t0] = seeds[static_cast<std::size_t>(r)];
        const auto res = pattern_search(J, t0, v0, ps, wrap_point);
        if (res.value < g.value) {
            g.value = res.value;
            g.argmin = res.x;
        }
    }
    return g;
}

}  // namespace shotline
