#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace shotline {

/// A point in the periodic parameter box [0, 2pi)^d, radians.
using ParamVector = Eigen::VectorXd;

/// Training inputs, one point per row.
using PointMatrix = Eigen::MatrixXd;

using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Thrown when a Cholesky factorization fails even after jitter escalation.
class FactorizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double wrap_angle(double x) {
    double r = std::fmod(x, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    // fmod of a tiny negative value can round back up to exactly 2pi
    if (r >= kTwoPi) r = 0.0;
    return r;
}

inline ParamVector wrap(ParamVector theta) {
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = wrap_angle(theta[i]);
    return theta;
}

inline ParamVector uniform_point(Eigen::Index dim, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    ParamVector p(dim);
    for (Eigen::Index i = 0; i < dim; ++i) p[i] = wrap_angle(u(rng));
    return p;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw std::invalid_argument(message);
}

}  // namespace shotline
