#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "pdcoh/common.hpp"
#include "pdcoh/frequency_grid.hpp"

namespace pdcoh {

// Phase-matching amplitude as a function of the difference-frequency offset.
struct PhaseMatching {
    enum class Model { unity, gaussian, sinc };
    Model model = Model::unity;
    double width = 1.0;  // gaussian sigma, or the length-dispersion product for sinc

    double eval(double wd) const {
        switch (model) {
            case Model::unity: return 1.0;
            case Model::gaussian: return std::exp(-wd * wd / (2.0 * width * width));
            case Model::sinc: {
                double x = 0.5 * wd * width;
                return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
            }
        }
        return 1.0;
    }

    // scale over which the model varies; infinity for unity
    double scale() const {
        if (model == Model::unity) return std::numeric_limits<double>::infinity();
        if (model == Model::sinc) return 2.0 / width;  // first zero at wd = 2 pi / width
        return width;
    }

    void validate() const {
        if (model != Model::unity && !(width > 0.0))
            throw std::domain_error("phase-matching width must be > 0");
    }
};

// Amplitude transmission of a detection filter, argument is the offset from
// the filter's center frequency.
struct Filter {
    enum class Model { unity, gaussian, tophat };
    Model model = Model::unity;
    double width = 1.0;  // gaussian sigma or top-hat half-width

    double eval(double w) const {
        switch (model) {
            case Model::unity: return 1.0;
            case Model::gaussian: return std::exp(-w * w / (2.0 * width * width));
            case Model::tophat: return std::abs(w) <= width ? 1.0 : 0.0;
        }
        return 1.0;
    }

    double scale() const {
        return model == Model::unity ? std::numeric_limits<double>::infinity() : width;
    }

    void validate() const {
        if (model != Model::unity && !(width > 0.0))
            throw std::domain_error("filter width must be > 0");
    }
};

// Smooth random spectral phase applied to g after down-conversion; one
// independent screen per alternative per draw, averaged over `draws`.
struct PhaseScreen {
    double sigma = 1.0;        // rms phase, radians
    double corr_width = 1.0;   // frequency scale of the screen
    int draws = 64;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(sigma > 0.0)) throw std::domain_error("phase-screen sigma must be > 0");
        if (!(corr_width > 0.0)) throw std::domain_error("phase-screen corr_width must be > 0");
        if (draws < 1) throw std::domain_error("phase-screen draws must be >= 1");
    }
};

struct AlternativeResponse {
    PhaseMatching phase_matching;
    Filter filter_s, filter_i;

    void validate() const {
        phase_matching.validate();
        filter_s.validate();
        filter_i.validate();
    }

    // g_j(wd) = Phi(wd) f_s(wd/2) f_i(-wd/2)
    double g(double wd) const {
        return phase_matching.eval(wd) * filter_s.eval(0.5 * wd) * filter_i.eval(-0.5 * wd);
    }

    double narrowest_scale() const {
        return std::min({phase_matching.scale(), 2.0 * filter_s.scale(), 2.0 * filter_i.scale()});
    }
};

// Spectral response of the two alternatives plus the carrier bookkeeping.
class SpectralResponse {
public:
    SpectralResponse(AlternativeResponse a1, AlternativeResponse a2,
                     double signal_center, double idler_center, double pump_center,
                     std::optional<PhaseScreen> screen = {})
        : alt1_(a1), alt2_(a2), ws0_(signal_center), wi0_(idler_center), screen_(screen) {
        a1.validate();
        a2.validate();
        if (screen_) screen_->validate();
        require_finite(signal_center, "signal center");
        require_finite(idler_center, "idler center");
        double sum = ws0_ + wi0_;
        if (std::abs(sum - pump_center) > 1e-9 * std::max(1.0, std::abs(pump_center)))
            throw std::domain_error("phase-matching condition w_p0 = w_s0 + w_i0 violated");
    }

    // both alternatives share the same response; the common case
    static SpectralResponse symmetric(AlternativeResponse a, double signal_center,
                                      double idler_center, double pump_center,
                                      std::optional<PhaseScreen> screen = {}) {
        return SpectralResponse(a, a, signal_center, idler_center, pump_center, screen);
    }

    const AlternativeResponse& alternative(int j) const {
        if (j != 1 && j != 2) throw std::domain_error("alternative must be 1 or 2");
        return j == 1 ? alt1_ : alt2_;
    }

    double signal_center() const { return ws0_; }
    double idler_center() const { return wi0_; }
    double pump_center() const { return ws0_ + wi0_; }
    double difference_center() const { return ws0_ - wi0_; }
    const std::optional<PhaseScreen>& screen() const { return screen_; }

    Complex g_response(int j, double wd) const {
        require_finite(wd, "difference frequency");
        return Complex(alternative(j).g(wd), 0.0);
    }

    double narrowest_scale() const {
        return std::min(alt1_.narrowest_scale(), alt2_.narrowest_scale());
    }

    // default difference-frequency grid, +-6 of the narrowest response scale
    FrequencyGrid default_d_grid(int n_points = 129) const {
        double s = narrowest_scale();
        if (!std::isfinite(s))
            throw std::domain_error("all-unity response has no intrinsic scale; pass a grid");
        return FrequencyGrid(difference_center(), 6.0 * s, n_points);
    }

    // Kernel <g_1*(w') g_2(w'')> on a grid. Deterministic responses give the
    // rank-one product; with a phase screen the ensemble average is taken
    // over independently drawn screens for the two alternatives.
    Eigen::MatrixXcd kernel(const FrequencyGrid& grid) const {
        int n = grid.size();
        Eigen::VectorXcd g1(n), g2(n);
        for (int i = 0; i < n; ++i) {
            double wd = grid.offset(i);
            g1(i) = alt1_.g(wd);
            g2(i) = alt2_.g(wd);
        }
        if (!screen_) return g1.conjugate() * g2.transpose();
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        for (int d = 0; d < screen_->draws; ++d) {
            Eigen::VectorXcd s1 = apply_screen(g1, grid, mix_seed(screen_->seed, 2 * d));
            Eigen::VectorXcd s2 = apply_screen(g2, grid, mix_seed(screen_->seed, 2 * d + 1));
            acc += s1.conjugate() * s2.transpose();
        }
        return acc / static_cast<double>(screen_->draws);
    }

private:
    Eigen::VectorXcd apply_screen(const Eigen::VectorXcd& g, const FrequencyGrid& grid,
                                  std::uint64_t seed) const {
        // iid normal phases on coarse nodes spaced by the correlation width,
        // linearly interpolated onto the grid
        double cw = screen_->corr_width;
        double lo = -grid.half_span() - cw;
        int m = static_cast<int>(std::ceil(2.0 * (grid.half_span() + cw) / cw)) + 2;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd(0.0, screen_->sigma);
        std::vector<double> nodes(m);
        for (auto& v : nodes) v = nd(rng);
        Eigen::VectorXcd out(grid.size());
        for (int i = 0; i < grid.size(); ++i) {
            double x = (grid.offset(i) - lo) / cw;
            int k = std::clamp(static_cast<int>(std::floor(x)), 0, m - 2);
            double f = x - k;
            double phase = (1.0 - f) * nodes[k] + f * nodes[k + 1];
            out(i) = g(i) * std::exp(Complex(0.0, phase));
        }
        return out;
    }

    AlternativeResponse alt1_, alt2_;
    double ws0_, wi0_;
    std::optional<PhaseScreen> screen_;
};

// Pathway coupling amplitudes kappa.
struct CouplingAmplitudes {
    double ks1 = 1.0, ki1 = 1.0, ks2 = 1.0, ki2 = 1.0;

    void validate() const {
        if (ks1 < 0 || ki1 < 0 || ks2 < 0 || ki2 < 0)
            throw std::domain_error("coupling amplitudes must be >= 0");
    }

    double kappa1() const { return ks1 * ki1; }
    double kappa2() const { return ks2 * ki2; }
};

}  // namespace pdcoh
