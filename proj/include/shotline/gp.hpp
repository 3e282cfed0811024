#pragma once

#include "shotline/common.hpp"
#include "shotline/kernel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace shotline {

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct Posterior {
    Eigen::VectorXd means;
    Eigen::VectorXd variances;
};

namespace detail {

struct Factorization {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

/// Cholesky of A + jitter*I. The first attempt adds nothing; on failure the
/// jitter starts at 1e-8 * mean(diag A) and grows tenfold up to 1e-2 * mean(diag A).
inline Factorization factorize_with_jitter(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    if (n == 0) return {Eigen::MatrixXd(0, 0), 0.0};
    const double scale = A.diagonal().mean();
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
    for (double rel = 1e-8; rel <= 1e-2 * (1.0 + 1e-9); rel *= 10.0) {
        const double jitter = rel * scale;
        Eigen::MatrixXd B = A;
        B.diagonal().array() += jitter;
        llt.compute(B);
        if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
    }
    throw FactorizationError("Cholesky factorization failed after jitter escalation "
                             "(duplicated inputs with contradictory targets?)");
}

/// k(theta, X_i) for all rows at once. Periodic kernels use
/// sin^2(w(a - b)) = (1 - cos 2wa cos 2wb - sin 2wa sin 2wb) / 2 with the
/// training-side trig values cached, so a query costs d sin/cos pairs plus
/// two matrix-vector products.
class CrossKernel {
public:
    CrossKernel() = default;
    CrossKernel(const KernelSpec& k, const PointMatrix& X) : k_(k) {
        if (k.family == KernelFamily::Matern) {
            scaled_ = X * k.lengthscales.cwiseInverse().asDiagonal();
        } else {
            const double w2 = 2.0 * std::numbers::pi / k.period;
            const Eigen::RowVectorXd inv = k.lengthscales.cwiseInverse().transpose();
            cos_ = ((w2 * X.array()).cos().rowwise() * inv.array()).matrix();
            sin_ = ((w2 * X.array()).sin().rowwise() * inv.array()).matrix();
            inv_sum_ = inv.sum();
        }
    }

    Eigen::VectorXd operator()(const ParamVector& theta) const {
        if (k_.family == KernelFamily::Matern) {
            const Eigen::ArrayXd q = theta.array() / k_.lengthscales.array();
            Eigen::ArrayXd r2 = Eigen::ArrayXd::Zero(scaled_.rows());
            for (Eigen::Index d = 0; d < scaled_.cols(); ++d) r2 += (scaled_.col(d).array() - q[d]).square();
            const Eigen::ArrayXd r = r2.sqrt();
            switch (k_.nu) {
                case Smoothness::Half: return k_.output_scale * (-r).exp();
                case Smoothness::ThreeHalves: {
                    const Eigen::ArrayXd s = std::sqrt(3.0) * r;
                    return k_.output_scale * (1.0 + s) * (-s).exp();
                }
                case Smoothness::FiveHalves: {
                    const Eigen::ArrayXd s = std::sqrt(5.0) * r;
                    return k_.output_scale * (1.0 + s + s.square() / 3.0) * (-s).exp();
                }
            }
        }
        const double w2 = 2.0 * std::numbers::pi / k_.period;
        const Eigen::VectorXd c = (w2 * theta.array()).cos();
        const Eigen::VectorXd s = (w2 * theta.array()).sin();
        const Eigen::ArrayXd arg = (inv_sum_ - (cos_ * c + sin_ * s).array()).max(0.0);
        return k_.output_scale * (-arg).exp();
    }

private:
    KernelSpec k_;
    Eigen::MatrixXd scaled_;
    Eigen::MatrixXd cos_;
    Eigen::MatrixXd sin_;
    double inv_sum_ = 0.0;
};

}  // namespace detail

/// Exact GP regression model. Immutable once built; concurrent queries are safe.
class GpModel {
public:
    GpModel(KernelSpec kernel, double noise_variance, double prior_mean, PointMatrix X,
            Eigen::VectorXd y)
        : kernel_(std::move(kernel)),
          noise_variance_(noise_variance),
          prior_mean_(prior_mean),
          X_(std::move(X)),
          y_(std::move(y)) {
        kernel_.validate();
        require(noise_variance_ >= 0.0 && std::isfinite(noise_variance_),
                "GP noise variance must be nonnegative");
        require(X_.rows() == y_.size(), "GP: input and target counts differ");
        require(X_.rows() == 0 || X_.cols() == kernel_.dim(),
                "GP: input dimension does not match kernel");
        if (X_.rows() == 0) return;
        Eigen::MatrixXd A = gram_matrix(kernel_, X_);
        A.diagonal().array() += noise_variance_;
        auto f = detail::factorize_with_jitter(A);
        lower_ = std::move(f.lower);
        jitter_ = f.jitter;
        const Eigen::VectorXd resid = y_.array() - prior_mean_;
        alpha_ = lower_.triangularView<Eigen::Lower>().solve(resid);
        lower_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
        const double fit = resid.dot(alpha_);
        cross_ = detail::CrossKernel(kernel_, X_);
        log_likelihood_ = -0.5 * fit - lower_.diagonal().array().log().sum() -
                          0.5 * static_cast<double>(X_.rows()) * std::log(2.0 * std::numbers::pi);
    }

    /// A model with no data: posterior equals the prior.
    static GpModel prior(KernelSpec kernel, double prior_mean = 0.0, double noise_variance = 0.0) {
        const Eigen::Index d = kernel.dim();
        return GpModel(std::move(kernel), noise_variance, prior_mean, PointMatrix(0, d),
                       Eigen::VectorXd(0));
    }

    Prediction predict(const ParamVector& theta) const {
        check_query(theta);
        if (X_.rows() == 0) return {prior_mean_, kernel_.output_scale};
        const Eigen::VectorXd k = cross_(theta);
        const Eigen::VectorXd v = lower_.triangularView<Eigen::Lower>().solve(k);
        const double var = kernel_.output_scale - v.squaredNorm();
        return {prior_mean_ + k.dot(alpha_), std::max(var, 0.0)};
    }

    double mean(const ParamVector& theta) const {
        check_query(theta);
        if (X_.rows() == 0) return prior_mean_;
        return prior_mean_ + cross_(theta).dot(alpha_);
    }

    double log_marginal_likelihood() const { return log_likelihood_; }

    const KernelSpec& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    double prior_mean() const { return prior_mean_; }
    double jitter() const { return jitter_; }
    const PointMatrix& inputs() const { return X_; }
    const Eigen::VectorXd& targets() const { return y_; }
    Eigen::Index size() const { return X_.rows(); }

private:
    void check_query(const ParamVector& theta) const {
        require(theta.size() == kernel_.dim(), "GP query dimension does not match model");
    }

    KernelSpec kernel_;
    double noise_variance_;
    double prior_mean_;
    PointMatrix X_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd lower_;
    Eigen::VectorXd alpha_;
    detail::CrossKernel cross_;
    double jitter_ = 0.0;
    double log_likelihood_ = 0.0;
};

inline Posterior posterior(const GpModel& model, const std::vector<ParamVector>& queries) {
    Posterior out{Eigen::VectorXd(queries.size()), Eigen::VectorXd(queries.size())};
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const auto p = model.predict(queries[i]);
        out.means[static_cast<Eigen::Index>(i)] = p.mean;
        out.variances[static_cast<Eigen::Index>(i)] = p.variance;
    }
    return out;
}

}  // namespace shotline
