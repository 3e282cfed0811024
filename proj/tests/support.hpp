#pragma once

// Independent oracles shared by the unit tests and the acceptance gate.

#include "shotline/fit.hpp"
#include "shotline/objective.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXcd;

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix pauli(char c) {
    using C = std::complex<double>;
    Matrix m(2, 2);
    switch (c) {
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, C(0, -1), C(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: m << 1, 0, 0, 1; break;
    }
    return m;
}

// Full operator for a one-qubit gate. Qubit 0 is the least significant bit,
// so it sits rightmost in the Kronecker product.
inline Matrix embed(int qubits, int target, const Matrix& gate) {
    Matrix out = Matrix::Identity(1, 1);
    for (int q = qubits - 1; q >= 0; --q) out = kron(out, q == target ? gate : pauli('I'));
    return out;
}

inline Matrix ry(double angle) {
    Matrix m(2, 2);
    m << std::cos(angle / 2), -std::sin(angle / 2), std::sin(angle / 2), std::cos(angle / 2);
    return m;
}

inline Matrix cnot(int qubits, int control, int target) {
    const Eigen::Index dim = Eigen::Index{1} << qubits;
    Matrix m = Matrix::Zero(dim, dim);
    for (Eigen::Index b = 0; b < dim; ++b) {
        const Eigen::Index out = (b >> control) & 1 ? b ^ (Eigen::Index{1} << target) : b;
        m(out, b) = 1.0;
    }
    return m;
}

inline Matrix hamiltonian(const shotline::Hamiltonian& h) {
    const Eigen::Index dim = Eigen::Index{1} << h.qubits;
    Matrix H = Matrix::Zero(dim, dim);
    for (const auto& t : h.terms) {
        Matrix p = Matrix::Identity(1, 1);
        for (int q = h.qubits - 1; q >= 0; --q) p = kron(p, pauli(t.pauli[static_cast<std::size_t>(q)]));
        H += t.coeff * p;
    }
    return H;
}

// <psi|H|psi> with the ansatz unitary multiplied out explicitly.
inline double energy(const shotline::Hamiltonian& h, int layers, const Eigen::VectorXd& theta) {
    const int q = h.qubits;
    const Eigen::Index dim = Eigen::Index{1} << q;
    Matrix U = Matrix::Identity(dim, dim);
    for (int l = 0; l < layers; ++l) {
        for (int j = 0; j < q; ++j) U = embed(q, j, ry(theta[l * q + j])) * U;
        for (int j = 0; j + 1 < q; ++j) U = cnot(q, j, j + 1) * U;
    }
    const Eigen::VectorXcd psi = U.col(0);
    return (psi.adjoint() * hamiltonian(h) * psi)(0, 0).real();
}

inline shotline::Hamiltonian random_hamiltonian(int qubits, int terms, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> letter(0, 3);
    shotline::Hamiltonian h;
    h.qubits = qubits;
    for (int t = 0; t < terms; ++t) {
        std::string p;
        for (int q = 0; q < qubits; ++q) p.push_back("IXYZ"[letter(rng)]);
        h.terms.push_back({coeff(rng), p});
    }
    return h;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct CheapVsPrecise {
    double precise_mse;  // n points at variance v
    double cheap_mse;    // 5n points at variance 25v
};

// One seed of the cheap-noisy versus expensive-precise comparison on a 1-D
// cosine: a Matern GP is fit to each data set and its posterior mean is
// scored against J on a 200-point grid.
inline CheapVsPrecise cheap_vs_precise(std::uint64_t seed, int n, long precise_shots) {
    const auto obj = shotline::ObjectiveSpec::synthetic(Eigen::VectorXd::Constant(1, 1.0),
                                                        Eigen::VectorXd::Constant(1, 0.7), 0.0, 1.0);
    shotline::Rng rng(seed);
    const auto mse = [&](int count, long shots) {
        shotline::PointMatrix X(count, 1);
        Eigen::VectorXd y(count);
        for (int i = 0; i < count; ++i) {
            const auto s = shotline::evaluate(obj, shotline::uniform_point(1, rng), shots, rng);
            X(i, 0) = s.theta[0];
            y[i] = s.value;
        }
        shotline::FitConfig cfg;
        cfg.family = shotline::KernelFamily::Matern;
        const auto model = shotline::build_model(shotline::fit_hyperparameters(X, y, cfg, rng), X, y);
        double total = 0.0;
        for (int g = 0; g < 200; ++g) {
            const Eigen::VectorXd t = Eigen::VectorXd::Constant(1, shotline::kTwoPi * (g + 0.5) / 200.0);
            const double e = model.mean(t) - shotline::true_value(obj, t);
            total += e * e;
        }
        return total / 200.0;
    };
    const double precise = mse(n, precise_shots);
    const double cheap = mse(5 * n, precise_shots / 25);
    return {precise, cheap};
}

}  // namespace oracle
