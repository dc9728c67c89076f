#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>

#include "pdcoh/common.hpp"
#include "pdcoh/response.hpp"

namespace pdcoh {

// Corner X-state of the two-pathway time-energy qubit pair: diagonal
// populations a, b and corner coherence c in the basis
// {|s1 i1>, |s1 i2>, |s2 i1>, |s2 i2>}.
struct TwoQubitXState {
    double a = 0.5, b = 0.5;
    Complex c{0.5, 0.0};

    void validate() const {
        if (a < 0.0 || b < 0.0) throw std::domain_error("populations must be >= 0");
        if (std::abs(a + b - 1.0) > 1e-12) throw std::domain_error("populations must sum to 1");
        if (std::abs(c) > std::sqrt(a * b) + 1e-12)
            throw std::domain_error("corner coherence violates positivity");
    }

    Eigen::Matrix4cd density_matrix() const {
        Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
        rho(0, 0) = a;
        rho(3, 3) = b;
        rho(0, 3) = c;
        rho(3, 0) = std::conj(c);
        return rho;
    }
};

// State built from the interferometric quantities of the time-averaged
// scheme: populations from the direct terms, corner coherence from the
// fringe term.
inline TwoQubitXState build_two_qubit(const CouplingAmplitudes& kappa, double r2bar,
                                      Complex gbar_p, Complex gbar_d, double dtau,
                                      double dtau_prime, double dphi, double pump_center,
                                      double difference_center) {
    kappa.validate();
    if (!(r2bar > 0.0)) throw std::domain_error("r2bar must be > 0");
    if (std::abs(gbar_p) > 1.0 + 1e-10 || std::abs(gbar_d) > 1.0 + 1e-10)
        throw std::domain_error("normalized coherences must have modulus <= 1");
    double k1 = kappa.kappa1(), k2 = kappa.kappa2();
    double denom = (k1 * k1 + k2 * k2) * r2bar;
    if (denom <= 0.0) throw std::domain_error("degenerate state: both couplings vanish");
    double eta = 1.0 / denom;
    double carrier = pump_center * dtau + difference_center * dtau_prime + dphi;
    TwoQubitXState s;
    s.a = eta * k1 * k1 * r2bar;
    s.b = eta * k2 * k2 * r2bar;
    s.c = eta * k1 * k2 * r2bar * gbar_p * gbar_d * std::exp(Complex(0.0, carrier));
    // clip |c| just inside the positivity ball against rounding
    double cap = std::sqrt(s.a * s.b);
    if (std::abs(s.c) > cap && std::abs(s.c) <= cap + 1e-12) s.c *= cap / std::abs(s.c);
    s.validate();
    return s;
}

// Concurrence of the corner X-state: 2|c|.
inline double concurrence_x(const TwoQubitXState& state) {
    state.validate();
    return std::min(1.0, 2.0 * std::abs(state.c));
}

inline void validate_density_matrix(const Eigen::Matrix4cd& rho) {
    double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12) throw std::domain_error("density matrix not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-12 || std::abs(rho.trace().imag()) > 1e-12)
        throw std::domain_error("density matrix trace must be 1");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::domain_error("density matrix not positive semidefinite");
}

// General two-qubit concurrence: decreasingly ordered square-root
// eigenvalues of rho (Y x Y) rho* (Y x Y), combined as max(0, l1-l2-l3-l4).
// Those square roots are exactly the singular values of
// M = sqrt(rho) (Y x Y) conj(sqrt(rho)), since M M^dag is the usual Hermitian
// product; taking singular values avoids squaring away half the precision on
// eigenvalues near zero.
inline double concurrence_wootters(const Eigen::Matrix4cd& rho) {
    validate_density_matrix(rho);

    Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
    yy(0, 3) = -1.0; yy(1, 2) = 1.0; yy(2, 1) = 1.0; yy(3, 0) = -1.0;

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
    Eigen::Vector4d ev = es.eigenvalues();
    for (int i = 0; i < 4; ++i)
        if (ev(i) < 1e-14) ev(i) = 0.0;  // clip rounding noise before the sqrt
    Eigen::Matrix4cd sqrt_rho = es.eigenvectors() *
                                ev.cwiseSqrt().asDiagonal() *
                                es.eigenvectors().adjoint();

    Eigen::Matrix4cd m = sqrt_rho * yy * sqrt_rho.conjugate();
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(m);
    const auto& lam = svd.singularValues();  // descending
    return std::max(0.0, lam(0) - lam(1) - lam(2) - lam(3));
}

struct BoundReport {
    double concurrence = 0.0;
    double bound = 0.0;  // |gbar_p|
    double slack = 0.0;  // bound - concurrence
    bool holds = false;
    bool saturated = false;  // equality within tolerance
};

// Coherence bound: concurrence of the built state never exceeds the degree
// of pump coherence |gbar_p|.
inline BoundReport verify_bound(const TwoQubitXState& state, Complex gbar_p) {
    BoundReport r;
    r.concurrence = concurrence_x(state);
    r.bound = std::abs(gbar_p);
    r.slack = r.bound - r.concurrence;
    r.holds = r.concurrence <= r.bound + 1e-12;
    r.saturated = std::abs(r.slack) <= 1e-12;
    return r;
}

}  // namespace pdcoh
