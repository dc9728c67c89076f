#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "pdcoh/common.hpp"
#include "pdcoh/frequency_grid.hpp"

namespace pdcoh {

// Gaussian Schell-model pump: Gaussian spectral envelope of bandwidth
// `bandwidth` and Gaussian frequency-correlation profile of width
// `corr_width`. corr_width == nullopt flags the fully-coherent pulsed
// limit (correlation factor identically 1).
struct GaussianSchellModel {
    double amplitude = 1.0;                 // spectral density scale, arbitrary units
    double bandwidth = 1.0;                 // Delta_omega_p0
    std::optional<double> corr_width = 1.0; // Delta_omega_c; nullopt = infinite
    double center = 100.0;                  // omega_p0 carrier

    void validate() const {
        require_finite(amplitude, "GSM amplitude");
        require_finite(bandwidth, "GSM bandwidth");
        require_finite(center, "GSM center");
        if (amplitude <= 0.0) throw std::domain_error("GSM amplitude must be > 0");
        if (bandwidth <= 0.0) throw std::domain_error("GSM bandwidth must be > 0");
        if (center <= 0.0) throw std::domain_error("GSM center must be > 0");
        if (corr_width) {
            require_finite(*corr_width, "GSM correlation width");
            if (*corr_width <= 0.0)
                throw std::domain_error("GSM correlation width must be > 0");
        }
    }

    bool fully_coherent() const { return !corr_width.has_value(); }

    // cross-spectral density at offsets (w1, w2) from the carrier
    double csd(double w1, double w2) const {
        require_finite(w1, "frequency offset");
        require_finite(w2, "frequency offset");
        double envelope = std::exp(-(w1 * w1 + w2 * w2) / (4.0 * bandwidth * bandwidth));
        double corr = 1.0;
        if (corr_width) {
            double d = w1 - w2;
            corr = std::exp(-d * d / (2.0 * (*corr_width) * (*corr_width)));
        }
        return amplitude * envelope * corr;
    }

    // temporal width T of the non-stationary pulse
    double pulse_width() const {
        if (fully_coherent())
            throw unsupported_limit("pulse width undefined for the fully-coherent flag");
        double b = 1.0 / (4.0 * bandwidth * bandwidth);
        double c = 1.0 / ((*corr_width) * (*corr_width));
        return std::sqrt(b + c);
    }

    // coherence time tau_coh; infinity for the fully-coherent flag
    double coherence_time() const {
        if (fully_coherent()) return std::numeric_limits<double>::infinity();
        return (*corr_width / bandwidth) * pulse_width();
    }

    // instantaneous intensity I(t) of the closed-form correlation
    double intensity(double t) const {
        double T = pulse_width();
        return (2.0 * pi * bandwidth * amplitude / T) * std::exp(-t * t / (2.0 * T * T));
    }

    // closed-form two-time correlation (generalized Wiener-Khintchine image
    // of the Gaussian kernel); real and positive
    double temporal_correlation(double t1, double t2) const {
        if (fully_coherent())
            throw unsupported_limit("closed-form correlation needs a finite correlation width");
        require_finite(t1, "time");
        require_finite(t2, "time");
        double tc = coherence_time();
        double dt = t1 - t2;
        return std::sqrt(intensity(t1) * intensity(t2)) * std::exp(-dt * dt / (2.0 * tc * tc));
    }

    // default tabulation grid: wide enough that edge kernel values are below
    // ~1e-7 of the peak for any correlation width
    FrequencyGrid default_grid(int n_points = 257) const {
        double stretch = 1.0;
        if (corr_width && *corr_width < bandwidth) stretch = bandwidth / *corr_width;
        return FrequencyGrid(center, 8.5 * bandwidth * stretch, n_points);
    }
};

}  // namespace pdcoh
