#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pdcoh/biphoton.hpp"
#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"
#include "pdcoh/pathway.hpp"
#include "pdcoh/response.hpp"

namespace pdcoh {

// Photon-collection window (sum time) and coincidence window (difference
// time); nullopt flags the infinite-window limit.
struct AveragingWindows {
    std::optional<double> t_pc;  // window for (t_s + t_i)/2
    std::optional<double> t_ci;  // window for (t_s - t_i)/2

    void validate() const {
        if (t_pc && !(*t_pc > 0.0)) throw std::domain_error("t_pc must be > 0");
        if (t_ci && !(*t_ci > 0.0)) throw std::domain_error("t_ci must be > 0");
    }
};

struct TimeAveragedResult {
    Complex gamma_p_bar{};  // time-averaged pump coherence, carrier included
    Complex gamma_d_bar{};
    double intensity1 = 0.0, intensity2 = 0.0;  // Ibar_j, pump diagonals
    double g1 = 0.0, g2 = 0.0;                  // Gbar_j, response diagonals
    double r2bar = 0.0;                         // sqrt(I1 I2) sqrt(G1 G2)
    Complex gbar_p{};  // normalized pump envelope, carrier removed
    Complex gbar_d{};
    bool accuracy_warning = false;
};

namespace detail {

// Window-averaged transform of a kernel:
//   int_W dt  iint dw' dw'' K(w', w'') e^{-i w'(t1 - t)} e^{+i w''(t2 - t)}
// done in the frequency domain, where the t-integral is exact: a sharp
// 2 sin((w'-w'') W/2)/(w'-w'') factor for finite windows and 2 pi times the
// kernel diagonal in the infinite limit.
inline Complex averaged_quadrature(const Eigen::MatrixXcd& k, const FrequencyGrid& g,
                                   double t1, double t2, std::optional<double> window) {
    int n = g.size();
    double h = g.spacing();
    if (!window) {
        Complex acc = 0.0;
        for (int i = 0; i < n; ++i)
            acc += g.weight(i) * k(i, i) * std::exp(Complex(0.0, -g.offset(i) * (t1 - t2)));
        return 2.0 * pi * h * acc;
    }
    double W = *window;
    Eigen::VectorXcd v1(n), v2(n);
    for (int i = 0; i < n; ++i) {
        v1(i) = g.weight(i) * std::exp(Complex(0.0, -g.offset(i) * t1));
        v2(i) = g.weight(i) * std::exp(Complex(0.0, +g.offset(i) * t2));
    }
    Complex acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double d = g.offset(i) - g.offset(j);
            double win = std::abs(d) < 1e-12 ? W : 2.0 * std::sin(0.5 * d * W) / d;
            acc += v1(i) * k(i, j) * v2(j) * win;
        }
    return acc * h * h;
}

inline bool diagonal_truncated(const Eigen::MatrixXcd& k) {
    int n = static_cast<int>(k.rows());
    double peak = 0.0;
    for (int i = 0; i < n; ++i) peak = std::max(peak, std::abs(k(i, i)));
    double edge = std::max(std::abs(k(0, 0)), std::abs(k(n - 1, n - 1)));
    return peak > 0.0 && edge > 1e-6 * peak;
}

}  // namespace detail

// Time-averaged coherence functions of the detection scheme. The carrier-free
// normalized envelopes gbar_p, gbar_d are what the interference law and the
// two-qubit construction consume.
inline TimeAveragedResult time_averaged_gamma2(const CrossSpectralDensity& csd,
                                               const SpectralResponse& resp,
                                               const PathwayPair& paths,
                                               const AveragingWindows& windows,
                                               const FrequencyGrid& d_grid) {
    paths.validate();
    windows.validate();
    CrossSpectralDensity tab = csd.tabulated();
    const Eigen::MatrixXcd& kp = tab.kernel();
    const FrequencyGrid& pg = tab.grid();
    Eigen::MatrixXcd kd = resp.kernel(d_grid);

    double tau1 = paths.alt1.tau(), tau2 = paths.alt2.tau();
    double tp1 = paths.alt1.tau_prime(), tp2 = paths.alt2.tau_prime();

    TimeAveragedResult r;
    Complex gp_env = detail::averaged_quadrature(kp, pg, tau1, tau2, windows.t_pc);
    r.intensity1 = detail::averaged_quadrature(kp, pg, tau1, tau1, windows.t_pc).real();
    r.intensity2 = detail::averaged_quadrature(kp, pg, tau2, tau2, windows.t_pc).real();
    Complex gd_env = detail::averaged_quadrature(kd, d_grid, tp1, tp2, windows.t_ci);
    r.g1 = detail::averaged_quadrature(kd, d_grid, tp1, tp1, windows.t_ci).real();
    r.g2 = detail::averaged_quadrature(kd, d_grid, tp2, tp2, windows.t_ci).real();

    if (r.intensity1 <= 0.0 || r.intensity2 <= 0.0 || r.g1 <= 0.0 || r.g2 <= 0.0)
        throw numeric_error("non-positive diagonal in time-averaged normalization");

    double dtau = tau1 - tau2, dtaup = tp1 - tp2;
    r.gamma_p_bar = std::exp(Complex(0.0, -tab.center() * dtau)) * gp_env;
    r.gamma_d_bar = std::exp(Complex(0.0, -resp.difference_center() * dtaup)) * gd_env;
    r.gbar_p = gp_env / std::sqrt(r.intensity1 * r.intensity2);
    r.gbar_d = gd_env / std::sqrt(r.g1 * r.g2);
    r.r2bar = std::sqrt(r.intensity1 * r.intensity2) * std::sqrt(r.g1 * r.g2);

    if (std::abs(r.gbar_p) > 1.0 + 1e-10 || std::abs(r.gbar_d) > 1.0 + 1e-10)
        throw numeric_error("normalized time-averaged coherence exceeds 1");

    r.accuracy_warning = detail::diagonal_truncated(kp) || detail::diagonal_truncated(kd);
    if (windows.t_pc) {
        // finite collection window: flag if the pulse is not contained
        double edge = std::max(
            std::abs(tab.wk_transform(tau1 - 0.5 * *windows.t_pc, tau1 - 0.5 * *windows.t_pc).value),
            std::abs(tab.wk_transform(tau1 + 0.5 * *windows.t_pc, tau1 + 0.5 * *windows.t_pc).value));
        double peak = std::abs(tab.wk_transform(0.0, 0.0).value);
        if (peak > 0.0 && edge > 1e-6 * peak) r.accuracy_warning = true;
    }
    return r;
}

// Time-averaged interference law: direct terms plus the carrier fringe
// weighted by the two coherence envelopes.
inline RateResult time_averaged_rate(const CrossSpectralDensity& csd,
                                     const SpectralResponse& resp,
                                     const PathwayPair& paths,
                                     const CouplingAmplitudes& kappa,
                                     const AveragingWindows& windows,
                                     const FrequencyGrid& d_grid) {
    kappa.validate();
    TimeAveragedResult g = time_averaged_gamma2(csd, resp, paths, windows, d_grid);
    PathwayDeltas d = paths.deltas();
    double k1 = kappa.kappa1(), k2 = kappa.kappa2();
    double carrier = csd.center() * d.dtau + resp.difference_center() * d.dtau_prime + d.dphi;
    double direct = (k1 * k1 + k2 * k2) * g.r2bar;
    double rate = direct + 2.0 * k1 * k2 * g.r2bar *
                               (g.gbar_p * g.gbar_d * std::exp(Complex(0.0, carrier))).real();
    if (rate < 0.0) {
        if (rate < -1e-10 * std::max(direct, 1e-300))
            throw numeric_error("time-averaged rate negative beyond tolerance");
        return {0.0, true, g.accuracy_warning};
    }
    return {rate, false, g.accuracy_warning};
}

enum class SweepParameter { dtau, dtau_prime, dphi };

inline std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::dtau: return "dtau";
        case SweepParameter::dtau_prime: return "dtau_prime";
        case SweepParameter::dphi: return "dphi";
    }
    return "?";
}

// Canonical sweep mapping: dtau moves tau_p1, dtau' moves tau_s1 and tau_i1
// antisymmetrically (leaving dtau untouched), dphi moves phi_p1.
inline PathwayPair apply_sweep(PathwayPair base, SweepParameter param, double target) {
    PathwayDeltas d0 = base.deltas();
    switch (param) {
        case SweepParameter::dtau:
            base.alt1.tau_p += target - d0.dtau;
            break;
        case SweepParameter::dtau_prime: {
            double shift = target - d0.dtau_prime;
            base.alt1.tau_s += shift;
            base.alt1.tau_i -= shift;
            break;
        }
        case SweepParameter::dphi:
            base.alt1.phi_p += target - d0.dphi;
            break;
    }
    return base;
}

struct FringeScan {
    SweepParameter parameter = SweepParameter::dtau;
    std::vector<double> points;  // strictly increasing sweep values
    std::vector<double> rates;
    bool accuracy_warning = false;
};

struct ScanSetup {
    CrossSpectralDensity csd;
    SpectralResponse resp;
    PathwayPair paths;
    CouplingAmplitudes couplings;
    AveragingWindows windows;
    FrequencyGrid d_grid;
};

inline FringeScan fringe_scan(const ScanSetup& setup, SweepParameter param, double lo,
                              double hi, int n_points) {
    if (n_points < 1) throw std::domain_error("scan needs at least one point");
    if (n_points > 1 && !(hi > lo)) throw std::domain_error("scan range must increase");
    CrossSpectralDensity tab = setup.csd.tabulated();  // tabulate once for the scan
    FringeScan scan;
    scan.parameter = param;
    scan.points.reserve(n_points);
    scan.rates.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        double x = n_points == 1 ? lo : lo + (hi - lo) * i / (n_points - 1);
        PathwayPair p = apply_sweep(setup.paths, param, x);
        RateResult r = time_averaged_rate(tab, setup.resp, p, setup.couplings,
                                          setup.windows, setup.d_grid);
        scan.points.push_back(x);
        scan.rates.push_back(r.rate);
        scan.accuracy_warning = scan.accuracy_warning || r.accuracy_warning;
    }
    return scan;
}

// Local fringe visibility (max-min)/(max+min) over the sweep values in
// [lo, hi]. Meaningful when the window spans at least one carrier period and
// the envelopes are locally flat.
inline double visibility(const FringeScan& scan, double lo, double hi) {
    double mx = -1.0, mn = -1.0;
    int found = 0;
    for (size_t i = 0; i < scan.points.size(); ++i) {
        if (scan.points[i] < lo || scan.points[i] > hi) continue;
        double r = scan.rates[i];
        if (!found) { mx = mn = r; } else { mx = std::max(mx, r); mn = std::min(mn, r); }
        ++found;
    }
    if (found < 3) throw std::domain_error("visibility window contains too few scan points");
    if (mx + mn <= 0.0) return 0.0;
    return (mx - mn) / (mx + mn);
}

}  // namespace pdcoh
