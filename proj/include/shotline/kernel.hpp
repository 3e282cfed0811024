#pragma once

#include "shotline/common.hpp"

#include <cmath>
#include <string>
#include <string_view>

namespace shotline {

enum class KernelFamily { Matern, Periodic };

/// Half-integer Matern smoothness; only the closed forms are supported.
enum class Smoothness { Half, ThreeHalves, FiveHalves };

inline std::string_view to_string(KernelFamily f) {
    return f == KernelFamily::Matern ? "matern" : "periodic";
}

inline KernelFamily parse_kernel_family(std::string_view s) {
    if (s == "matern") return KernelFamily::Matern;
    if (s == "periodic") return KernelFamily::Periodic;
    throw std::invalid_argument("unknown kernel family '" + std::string(s) + "'");
}

inline double smoothness_value(Smoothness nu) {
    switch (nu) {
        case Smoothness::Half: return 0.5;
        case Smoothness::ThreeHalves: return 1.5;
        case Smoothness::FiveHalves: return 2.5;
    }
    return 2.5;
}

inline Smoothness parse_smoothness(double nu) {
    if (nu == 0.5) return Smoothness::Half;
    if (nu == 1.5) return Smoothness::ThreeHalves;
    if (nu == 2.5) return Smoothness::FiveHalves;
    throw std::invalid_argument("Matern smoothness must be one of 0.5, 1.5, 2.5");
}

/// Kernel family and hyperparameters.
///
/// Matern uses the anisotropic scaled Euclidean distance on raw coordinates
/// (it does not know about the 2pi wrap). Periodic follows
///   k(a, b) = s2 * exp(-2 * sum_i sin^2(pi (a_i - b_i) / p) / l_i)
/// with the lengthscale entering linearly, not squared.
struct KernelSpec {
    KernelFamily family = KernelFamily::Matern;
    Eigen::VectorXd lengthscales;
    double output_scale = 1.0;
    Smoothness nu = Smoothness::FiveHalves;
    double period = kTwoPi;
    bool fixed_period = true;

    static KernelSpec matern(Eigen::Index dim, Smoothness nu = Smoothness::FiveHalves,
                             double lengthscale = 1.0, double output_scale = 1.0) {
        KernelSpec k;
        k.family = KernelFamily::Matern;
        k.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
        k.output_scale = output_scale;
        k.nu = nu;
        return k;
    }

    static KernelSpec periodic(Eigen::Index dim, double lengthscale = 1.0,
                               double output_scale = 1.0) {
        KernelSpec k;
        k.family = KernelFamily::Periodic;
        k.lengthscales = Eigen::VectorXd::Constant(dim, lengthscale);
        k.output_scale = output_scale;
        return k;
    }

    Eigen::Index dim() const { return lengthscales.size(); }

    void validate() const {
        require(lengthscales.size() > 0, "kernel needs at least one lengthscale");
        require((lengthscales.array() > 0.0).all() && lengthscales.allFinite(),
                "kernel lengthscales must be positive");
        require(output_scale > 0.0 && std::isfinite(output_scale),
                "kernel output scale must be positive");
        require(period > 0.0 && std::isfinite(period), "kernel period must be positive");
        if (family == KernelFamily::Periodic && fixed_period)
            require(period == kTwoPi, "fixed-period kernel must have period 2pi");
    }
};

/// Correlation as a function of the scaled distance r >= 0.
inline double matern_correlation(Smoothness nu, double r) {
    switch (nu) {
        case Smoothness::Half: return std::exp(-r);
        case Smoothness::ThreeHalves: {
            const double s = std::sqrt(3.0) * r;
            return (1.0 + s) * std::exp(-s);
        }
        case Smoothness::FiveHalves: {
            const double s = std::sqrt(5.0) * r;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
    }
    return 0.0;
}

namespace detail {

template <class A, class B>
double kernel_unchecked(const KernelSpec& k, const A& a, const B& b) {
    const Eigen::Index d = k.lengthscales.size();
    if (k.family == KernelFamily::Matern) {
        double r2 = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double z = (a[i] - b[i]) / k.lengthscales[i];
            r2 += z * z;
        }
        return k.output_scale * matern_correlation(k.nu, std::sqrt(r2));
    }
    const double w = std::numbers::pi / k.period;
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        const double v = std::sin(w * (a[i] - b[i]));
        s += v * v / k.lengthscales[i];
    }
    return k.output_scale * std::exp(-2.0 * s);
}

}  // namespace detail

inline double kernel_eval(const KernelSpec& k, const ParamVector& a, const ParamVector& b) {
    require(a.size() == b.size(), "kernel_eval: dimension mismatch between inputs");
    require(a.size() == k.dim(), "kernel_eval: input dimension does not match lengthscales");
    k.validate();
    return detail::kernel_unchecked(k, a, b);
}

/// Gram matrix over the rows of X.
inline Eigen::MatrixXd gram_matrix(const KernelSpec& k, const PointMatrix& X) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = k.output_scale;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = detail::kernel_unchecked(k, X.row(i), X.row(j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

/// Covariances k(theta, X_i) for every training row.
inline Eigen::VectorXd cross_covariance(const KernelSpec& k, const PointMatrix& X,
                                        const ParamVector& theta) {
    Eigen::VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[i] = detail::kernel_unchecked(k, X.row(i), theta);
    return out;
}

}  // namespace shotline
