#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"

namespace pdcoh {

// Statistical realizations V(w) of the pump spectral amplitude over a grid,
// drawn so that the ensemble average <V*(w') V(w'')> reproduces the kernel.
struct FieldRealizationSet {
    FrequencyGrid grid;
    std::vector<Eigen::VectorXcd> realizations;
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(realizations.size()); }
};

namespace detail {

// complex circular standard normals, one independent stream per chunk
inline Eigen::VectorXcd gaussian_vector(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0 / std::sqrt(2.0));
    Eigen::VectorXcd z(n);
    for (int i = 0; i < n; ++i) {
        double re = nd(rng);
        double im = nd(rng);
        z(i) = Complex(re, im);
    }
    return z;
}

inline Eigen::MatrixXcd covariance_factor(const Eigen::MatrixXcd& kernel) {
    int n = static_cast<int>(kernel.rows());
    // E[V V^dagger] = conj(K) for the convention E[V_i* V_j] = K_ij
    Eigen::MatrixXcd cov = kernel.conjugate();
    double jitter = 1e-12 * std::abs(kernel.real().trace()) / n;
    cov.diagonal().array() += std::max(jitter, 1e-300);
    Eigen::LLT<Eigen::MatrixXcd> llt(cov);
    if (llt.info() != Eigen::Success)
        throw numeric_error("covariance factorization failed; kernel not PSD");
    return llt.matrixL();
}

}  // namespace detail

inline constexpr int sampling_chunk = 256;

// Draws `count` realizations with covariance equal to the tabulated kernel.
// Deterministic for fixed (seed, grid, kernel); realizations are generated
// in fixed chunks with independently derived sub-seeds, so a parallel driver
// that consumes chunks in any order sees the same ensemble.
inline FieldRealizationSet sample_realizations(const CrossSpectralDensity& csd,
                                               int count, std::uint64_t seed) {
    if (count < 1) throw std::domain_error("count must be >= 1");
    const auto& grid = csd.grid();
    Eigen::MatrixXcd L = detail::covariance_factor(csd.kernel());
    FieldRealizationSet set{grid, {}, seed};
    set.realizations.reserve(count);
    int n = grid.size();
    for (int start = 0; start < count; start += sampling_chunk) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(start / sampling_chunk)));
        int stop = std::min(count, start + sampling_chunk);
        for (int r = start; r < stop; ++r)
            set.realizations.push_back(L * detail::gaussian_vector(n, rng));
    }
    return set;
}

// Sample estimate of <V*(w') V(w'')>; Hermitian by construction.
inline CrossSpectralDensity empirical_csd(const FieldRealizationSet& set) {
    if (set.count() < 2) throw std::domain_error("need at least 2 realizations");
    int n = set.grid.size();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& v : set.realizations)
        acc += v.conjugate() * v.transpose();
    acc /= static_cast<double>(set.count());
    acc = 0.5 * (acc + acc.adjoint().eval());  // scrub rounding asymmetry
    return CrossSpectralDensity::from_kernel(set.grid, std::move(acc));
}

}  // namespace pdcoh
