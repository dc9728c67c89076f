#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "pdcoh/biphoton.hpp"
#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"
#include "pdcoh/pathway.hpp"
#include "pdcoh/response.hpp"
#include "pdcoh/sampling.hpp"

namespace pdcoh {

namespace detail {

// linear interpolation of a spectral amplitude between its grid nodes
inline Complex interp_amplitude(const Eigen::VectorXcd& v, const FrequencyGrid& g,
                                double w) {
    double x = (w - g.offset(0)) / g.spacing();
    if (x < -1e-9 || x > g.size() - 1 + 1e-9)
        throw std::domain_error("quadrature grid extends beyond the pump realization support");
    int k = std::clamp(static_cast<int>(std::floor(x)), 0, g.size() - 2);
    double f = std::clamp(x - k, 0.0, 1.0);
    return (1.0 - f) * v(k) + f * v(k + 1);
}

}  // namespace detail

// Scalar biphoton amplitude of one alternative for a single pump
// realization, by 2D quadrature over sum (pump) and difference frequency.
// The response is evaluated exactly, with no narrowband reduction, so the
// ensemble average of amplitude products probes the factorization rather
// than assuming it.
inline Complex biphoton_amplitude(const Eigen::VectorXcd& v, const FrequencyGrid& v_grid,
                                  const SpectralResponse& resp, const PathwayPair& paths,
                                  int alternative, double t_s, double t_i,
                                  const FrequencyGrid& pump_grid,
                                  const FrequencyGrid& d_grid) {
    const Pathway& path = paths.alternative(alternative);
    const AlternativeResponse& ar = resp.alternative(alternative);
    double tbar = 0.5 * (t_s + t_i);
    double ttil = 0.5 * (t_s - t_i);
    double wp0 = resp.pump_center();
    double wd0 = resp.difference_center();
    double hp = pump_grid.spacing(), hd = d_grid.spacing();
    Complex acc = 0.0;
    for (int p = 0; p < pump_grid.size(); ++p) {
        double wp = pump_grid.offset(p);
        Complex vp = detail::interp_amplitude(v, v_grid, wp);
        if (vp == Complex(0.0)) continue;
        Complex ep = std::exp(Complex(0.0, (wp0 + wp) * (path.tau() - tbar)));
        Complex inner = 0.0;
        for (int d = 0; d < d_grid.size(); ++d) {
            double wd = d_grid.offset(d);
            double resp_val = ar.phase_matching.eval(wd) *
                              ar.filter_s.eval(0.5 * (wp + wd)) *
                              ar.filter_i.eval(0.5 * (wp - wd));
            if (resp_val == 0.0) continue;
            inner += d_grid.weight(d) * resp_val *
                     std::exp(Complex(0.0, (wd0 + wd) * (path.tau_prime() - ttil)));
        }
        acc += pump_grid.weight(p) * vp * ep * inner;
    }
    // 1/2 Jacobian of (w_s, w_i) -> (w_p, w_d)
    return 0.5 * hp * hd * acc * std::exp(Complex(0.0, path.phi()));
}

struct OracleResult {
    CoherenceSample sample;   // estimate of Gamma^(2)(t_s, t_i)
    double std_error = 0.0;   // jackknife standard error of the complex mean
    int count = 0;
};

namespace detail {

// Per-(detection pair, alternative) coefficient vector c such that the
// amplitude for realization V is c . V. Collapsing the difference-frequency
// integral once makes the Monte-Carlo loop O(n) per realization.
inline Eigen::VectorXcd amplitude_coefficients(const SpectralResponse& resp,
                                               const Pathway& path, double t_s,
                                               double t_i, int alternative,
                                               const FrequencyGrid& pump_grid,
                                               const FrequencyGrid& d_grid) {
    const AlternativeResponse& ar = resp.alternative(alternative);
    double tbar = 0.5 * (t_s + t_i);
    double ttil = 0.5 * (t_s - t_i);
    double wp0 = resp.pump_center();
    double wd0 = resp.difference_center();
    Eigen::VectorXcd c(pump_grid.size());
    for (int p = 0; p < pump_grid.size(); ++p) {
        double wp = pump_grid.offset(p);
        Complex inner = 0.0;
        for (int d = 0; d < d_grid.size(); ++d) {
            double wd = d_grid.offset(d);
            double resp_val = ar.phase_matching.eval(wd) *
                              ar.filter_s.eval(0.5 * (wp + wd)) *
                              ar.filter_i.eval(0.5 * (wp - wd));
            inner += d_grid.weight(d) * resp_val *
                     std::exp(Complex(0.0, (wd0 + wd) * (path.tau_prime() - ttil)));
        }
        c(p) = pump_grid.weight(p) * inner *
               std::exp(Complex(0.0, (wp0 + wp) * (path.tau() - tbar)));
    }
    return 0.5 * pump_grid.spacing() * d_grid.spacing() *
           std::exp(Complex(0.0, path.phi())) * c;
}

inline double jackknife_se(const std::vector<Complex>& x, Complex mean) {
    // delete-one jackknife of the complex mean; reduces to
    // sqrt(sum |x_i - mean|^2 / (n (n-1)))
    double s = 0.0;
    for (Complex v : x) s += std::norm(v - mean);
    size_t n = x.size();
    return n > 1 ? std::sqrt(s / (double(n) * double(n - 1))) : 0.0;
}

}  // namespace detail

// Unfactorized Monte-Carlo estimate of the two-photon cross-correlation:
// ensemble mean of conj(A_1) A_2 over sampled pump realizations, scaled by
// the sum/difference Jacobian and stripped of the pathway phase so it is
// directly comparable with gamma2_factorized. Deterministic per seed;
// parallel chunks with derived sub-seeds reduce in fixed index order.
inline std::vector<OracleResult> gamma2_oracle_mc(
    const CrossSpectralDensity& csd, const SpectralResponse& resp,
    const PathwayPair& paths, const std::vector<std::pair<double, double>>& detection_times,
    int count, std::uint64_t seed, const FrequencyGrid& d_grid, int threads = 0) {
    if (count < 100) throw std::domain_error("oracle needs count >= 100");
    if (resp.screen())
        throw std::domain_error("oracle supports deterministic responses only");
    paths.validate();

    // fully-coherent flagged pump: the spectral amplitude is deterministic,
    // a single realization with zero variance
    if (csd.is_gsm() && csd.model().fully_coherent()) {
        const auto& m = csd.model();
        FrequencyGrid g = m.default_grid();
        Eigen::VectorXcd v(g.size());
        for (int i = 0; i < g.size(); ++i)
            v(i) = std::sqrt(m.amplitude) *
                   std::exp(-g.offset(i) * g.offset(i) / (4.0 * m.bandwidth * m.bandwidth));
        std::vector<OracleResult> out;
        for (auto [t_s, t_i] : detection_times) {
            Complex a1 = biphoton_amplitude(v, g, resp, paths, 1, t_s, t_i, g, d_grid);
            Complex a2 = biphoton_amplitude(v, g, resp, paths, 2, t_s, t_i, g, d_grid);
            Complex est = 4.0 * std::conj(a1) * a2 *
                          std::exp(Complex(0.0, paths.deltas().dphi));
            out.push_back({{est, t_s, t_i, {}, false}, 0.0, 1});
        }
        return out;
    }

    CrossSpectralDensity tab = csd.tabulated();
    const FrequencyGrid& pump_grid = tab.grid();
    Eigen::MatrixXcd L = detail::covariance_factor(tab.kernel());

    size_t npairs = detection_times.size();
    std::vector<Eigen::VectorXcd> c1(npairs), c2(npairs);
    for (size_t q = 0; q < npairs; ++q) {
        auto [t_s, t_i] = detection_times[q];
        c1[q] = detail::amplitude_coefficients(resp, paths.alt1, t_s, t_i, 1, pump_grid, d_grid);
        c2[q] = detail::amplitude_coefficients(resp, paths.alt2, t_s, t_i, 2, pump_grid, d_grid);
    }

    std::vector<std::vector<Complex>> prods(npairs, std::vector<Complex>(count));
    int nchunks = (count + sampling_chunk - 1) / sampling_chunk;
    int nthreads = threads > 0 ? threads
                               : std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int chunk = next.fetch_add(1);
            if (chunk >= nchunks) return;
            std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(chunk)));
            int start = chunk * sampling_chunk;
            int stop = std::min(count, start + sampling_chunk);
            for (int r = start; r < stop; ++r) {
                Eigen::VectorXcd v = L * detail::gaussian_vector(pump_grid.size(), rng);
                for (size_t q = 0; q < npairs; ++q) {
                    Complex a1 = c1[q].cwiseProduct(v).sum();
                    Complex a2 = c2[q].cwiseProduct(v).sum();
                    prods[q][r] = 4.0 * std::conj(a1) * a2;
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    Complex phase = std::exp(Complex(0.0, paths.deltas().dphi));
    std::vector<OracleResult> out;
    for (size_t q = 0; q < npairs; ++q) {
        Complex sum = 0.0;
        for (Complex v : prods[q]) sum += v;
        Complex mean = sum / static_cast<double>(count);
        double se = detail::jackknife_se(prods[q], mean);
        auto [t_s, t_i] = detection_times[q];
        out.push_back({{phase * mean, t_s, t_i, {}, false}, se, count});
    }
    return out;
}

inline OracleResult gamma2_oracle_mc(const CrossSpectralDensity& csd,
                                     const SpectralResponse& resp,
                                     const PathwayPair& paths, double t_s, double t_i,
                                     int count, std::uint64_t seed,
                                     const FrequencyGrid& d_grid, int threads = 0) {
    return gamma2_oracle_mc(csd, resp, paths, {{t_s, t_i}}, count, seed, d_grid,
                            threads)[0];
}

}  // namespace pdcoh
