#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"
#include "pdcoh/pathway.hpp"
#include "pdcoh/response.hpp"

namespace pdcoh {

// One evaluation of a coherence function, with the two time arguments it was
// taken at and, when normalized, the diagonal values used.
struct CoherenceSample {
    Complex value{};
    double arg1 = 0.0, arg2 = 0.0;
    std::optional<std::pair<double, double>> normalization;
    bool accuracy_warning = false;

    Complex normalized() const {
        if (!normalization) throw std::logic_error("sample carries no normalization");
        double d = std::sqrt(normalization->first * normalization->second);
        if (d <= 0.0) throw std::domain_error("degenerate normalization");
        return value / d;
    }
};

// Pump coherence function Gamma_p at pathway times (tau1, tau2) and mean
// detection time tbar. Carrier e^{-i w_p0 (tau1-tau2)} times the
// Wiener-Khintchine transform of the pump kernel at shifted arguments.
inline CoherenceSample gamma_p(const CrossSpectralDensity& csd, double tau1,
                               double tau2, double tbar) {
    require_finite(tbar, "tbar");
    WkResult wk = csd.wk_transform(tau1 - tbar, tau2 - tbar);
    Complex carrier = std::exp(Complex(0.0, -csd.center() * (tau1 - tau2)));
    return {carrier * wk.value, tau1, tau2, {}, wk.accuracy_warning};
}

namespace detail {

inline Complex kernel_quadrature(const Eigen::MatrixXcd& k, const FrequencyGrid& g,
                                 double t1, double t2) {
    int n = g.size();
    double h = g.spacing();
    Eigen::VectorXcd v1(n), v2(n);
    for (int i = 0; i < n; ++i) {
        double w = g.offset(i);
        v1(i) = g.weight(i) * std::exp(Complex(0.0, -w * t1));
        v2(i) = g.weight(i) * std::exp(Complex(0.0, +w * t2));
    }
    return (v1.transpose() * (k * v2)).value() * h * h;
}

}  // namespace detail

// Down-conversion coherence function Gamma_d at pathway times (tau'1, tau'2)
// and detection time difference ttil, over the given difference-frequency
// grid. The grid must resolve the narrowest response scale.
inline CoherenceSample gamma_d(const SpectralResponse& resp, double taup1,
                               double taup2, double ttil, const FrequencyGrid& grid) {
    require_finite(taup1, "tau'1");
    require_finite(taup2, "tau'2");
    require_finite(ttil, "ttil");
    double s = resp.narrowest_scale();
    if (std::isfinite(s) && grid.spacing() > s / 8.0)
        throw std::domain_error("difference grid too coarse for the response");
    Eigen::MatrixXcd k = resp.kernel(grid);
    Complex full = detail::kernel_quadrature(k, grid, taup1 - ttil, taup2 - ttil);
    // half-grid self-check, as in the pump transform
    FrequencyGrid half = grid.coarsened();
    int step = (grid.size() - 1) / (half.size() - 1);
    Eigen::MatrixXcd hk(half.size(), half.size());
    for (int i = 0; i < half.size(); ++i)
        for (int j = 0; j < half.size(); ++j) hk(i, j) = k(i * step, j * step);
    Complex coarse = detail::kernel_quadrature(hk, half, taup1 - ttil, taup2 - ttil);
    double scale = std::max(std::abs(full), k.cwiseAbs().maxCoeff());
    bool warn = std::abs(full - coarse) > 1e-4 * scale;
    Complex carrier = std::exp(Complex(0.0, -resp.difference_center() * (taup1 - taup2)));
    return {carrier * full, taup1, taup2, {}, warn};
}

// Factorized two-photon cross-correlation Gamma^(2) = Gamma_p * Gamma_d at
// detection times (t_s, t_i). Pathway phases are not included here; they
// enter the coincidence rate through the explicit e^{-i dphi} term.
inline CoherenceSample gamma2_factorized(const CrossSpectralDensity& csd,
                                         const SpectralResponse& resp,
                                         const PathwayPair& paths, double t_s,
                                         double t_i, const FrequencyGrid& d_grid) {
    paths.validate();
    double tbar = 0.5 * (t_s + t_i);
    double ttil = 0.5 * (t_s - t_i);
    CoherenceSample p = gamma_p(csd, paths.alt1.tau(), paths.alt2.tau(), tbar);
    CoherenceSample d = gamma_d(resp, paths.alt1.tau_prime(), paths.alt2.tau_prime(),
                                ttil, d_grid);
    return {p.value * d.value, t_s, t_i, {}, p.accuracy_warning || d.accuracy_warning};
}

struct RateResult {
    double rate = 0.0;
    bool clamped = false;          // true if a tiny negative value was clamped to 0
    bool accuracy_warning = false;
};

// Instantaneous two-photon interference law: direct terms of the two
// alternatives plus twice the real part of the cross term.
inline RateResult coincidence_rate(const CrossSpectralDensity& csd,
                                   const SpectralResponse& resp,
                                   const PathwayPair& paths,
                                   const CouplingAmplitudes& kappa, double t_s,
                                   double t_i, const FrequencyGrid& d_grid) {
    kappa.validate();
    double k1 = kappa.kappa1(), k2 = kappa.kappa2();
    PathwayPair diag1{paths.alt1, paths.alt1};
    PathwayPair diag2{paths.alt2, paths.alt2};
    CoherenceSample r1 = gamma2_factorized(csd, resp, diag1, t_s, t_i, d_grid);
    CoherenceSample r2 = gamma2_factorized(csd, resp, diag2, t_s, t_i, d_grid);
    CoherenceSample cross = gamma2_factorized(csd, resp, paths, t_s, t_i, d_grid);
    double dphi = paths.deltas().dphi;
    double direct = k1 * k1 * r1.value.real() + k2 * k2 * r2.value.real();
    double rate = direct +
                  2.0 * k1 * k2 * (cross.value * std::exp(Complex(0.0, -dphi))).real();
    bool warn = r1.accuracy_warning || r2.accuracy_warning || cross.accuracy_warning;
    if (rate < 0.0) {
        if (rate < -1e-10 * std::max(direct, 1e-300))
            throw numeric_error("coincidence rate negative beyond quadrature tolerance");
        return {0.0, true, warn};
    }
    return {rate, false, warn};
}

}  // namespace pdcoh
