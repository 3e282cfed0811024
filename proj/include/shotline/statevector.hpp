#pragma once

#include "shotline/common.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shotline {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 12;

/// One weighted Pauli string. Character i acts on qubit i; qubit i is bit i
/// of the basis-state index.
struct PauliTerm {
    double coeff = 0.0;
    std::string pauli;
};

struct Hamiltonian {
    int qubits = 0;
    std::vector<PauliTerm> terms;

    void validate() const {
        require(qubits >= 1 && qubits <= kMaxQubits,
                "Hamiltonian qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
        require(!terms.empty(), "Hamiltonian has no terms");
        for (const auto& t : terms) {
            require(std::isfinite(t.coeff), "Hamiltonian coefficient is not finite");
            require(t.pauli.size() == static_cast<std::size_t>(qubits),
                    "Pauli string '" + t.pauli + "' does not have length " + std::to_string(qubits));
            for (const char c : t.pauli)
                require(c == 'I' || c == 'X' || c == 'Y' || c == 'Z',
                        "Pauli string '" + t.pauli + "' has a character outside {I,X,Y,Z}");
        }
    }
};

/// Dense statevector with in-place gate application.
class Statevector {
public:
    explicit Statevector(int qubits) : qubits_(qubits), amps_(std::size_t{1} << qubits) {
        require(qubits >= 1 && qubits <= kMaxQubits, "statevector qubit count out of range");
        amps_[0] = 1.0;
    }

    int qubits() const { return qubits_; }
    std::span<const Amplitude> amplitudes() const { return amps_; }

    /// RY(theta) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
    void apply_ry(int qubit, double theta) {
        check_qubit(qubit);
        const double c = std::cos(0.5 * theta);
        const double s = std::sin(0.5 * theta);
        const std::size_t bit = std::size_t{1} << qubit;
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            if (i & bit) continue;
            const Amplitude a0 = amps_[i];
            const Amplitude a1 = amps_[i | bit];
            amps_[i] = c * a0 - s * a1;
            amps_[i | bit] = s * a0 + c * a1;
        }
    }

    void apply_cnot(int control, int target) {
        check_qubit(control);
        check_qubit(target);
        require(control != target, "CNOT control and target must differ");
        const std::size_t cb = std::size_t{1} << control;
        const std::size_t tb = std::size_t{1} << target;
        for (std::size_t i = 0; i < amps_.size(); ++i)
            if ((i & cb) && !(i & tb)) std::swap(amps_[i], amps_[i | tb]);
    }

    /// <psi| P |psi> for a single Pauli string (real for Hermitian P).
    double expectation(const std::string& pauli) const {
        require(pauli.size() == static_cast<std::size_t>(qubits_), "Pauli string length mismatch");
        std::size_t flip = 0;
        std::size_t zmask = 0;
        std::size_t ymask = 0;
        for (int q = 0; q < qubits_; ++q) {
            const std::size_t b = std::size_t{1} << q;
            switch (pauli[static_cast<std::size_t>(q)]) {
                case 'X': flip |= b; break;
                case 'Y': flip |= b; ymask |= b; break;
                case 'Z': zmask |= b; break;
                default: break;
            }
        }
        // Y|0> = i|1>, Y|1> = -i|0>, Z|1> = -|1>
        static constexpr Amplitude kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        const int ny = std::popcount(ymask);
        Amplitude acc = 0.0;
        for (std::size_t b = 0; b < amps_.size(); ++b) {
            if (amps_[b] == 0.0) continue;
            const int minus = std::popcount(b & zmask) + std::popcount(b & ymask);
            Amplitude phase = kIPow[ny % 4];
            if (minus % 2) phase = -phase;
            acc += std::conj(amps_[b ^ flip]) * phase * amps_[b];
        }
        return acc.real();
    }

    double expectation(const Hamiltonian& h) const {
        require(h.qubits == qubits_, "Hamiltonian qubit count does not match statevector");
        double e = 0.0;
        for (const auto& t : h.terms) e += t.coeff * expectation(t.pauli);
        return e;
    }

private:
    void check_qubit(int q) const { require(q >= 0 && q < qubits_, "qubit index out of range"); }

    int qubits_;
    std::vector<Amplitude> amps_;
};

/// Layered hardware-efficient ansatz: each layer applies RY to every qubit
/// (parameter index layer * qubits + qubit), then CNOT(j, j+1) down the chain.
inline Statevector prepare_ansatz(int qubits, int layers, const ParamVector& theta) {
    require(layers >= 1, "ansatz needs at least one layer");
    require(theta.size() == static_cast<Eigen::Index>(qubits) * layers,
            "ansatz parameter count must equal qubits * layers");
    Statevector psi(qubits);
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < qubits; ++q) psi.apply_ry(q, theta[l * qubits + q]);
        for (int q = 0; q + 1 < qubits; ++q) psi.apply_cnot(q, q + 1);
    }
    return psi;
}

/// Full Hamiltonian as a dense 2^q x 2^q matrix.
inline Eigen::MatrixXcd dense_hamiltonian(const Hamiltonian& h) {
    h.validate();
    const std::size_t dim = std::size_t{1} << h.qubits;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (const auto& t : h.terms) {
        // column b of P is phase(b) * e_{b ^ flip}
        for (std::size_t b = 0; b < dim; ++b) {
            Amplitude phase = 1.0;
            std::size_t out = b;
            for (int q = 0; q < h.qubits; ++q) {
                const bool bit = (b >> q) & 1U;
                switch (t.pauli[static_cast<std::size_t>(q)]) {
                    case 'X': out ^= std::size_t{1} << q; break;
                    case 'Y':
                        out ^= std::size_t{1} << q;
                        phase *= bit ? Amplitude(0, -1) : Amplitude(0, 1);
                        break;
                    case 'Z':
                        if (bit) phase = -phase;
                        break;
                    default: break;
                }
            }
            H(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(b)) += t.coeff * phase;
        }
    }
    return H;
}

struct SpectrumBounds {
    double lowest = 0.0;
    double highest = 0.0;
};

/// Extreme eigenvalues by dense Hermitian eigendecomposition.
inline SpectrumBounds spectrum_bounds(const Hamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense_hamiltonian(h), Eigen::EigenvaluesOnly);
    require(es.info() == Eigen::Success, "Hamiltonian eigendecomposition failed");
    const auto& ev = es.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

}  // namespace shotline
