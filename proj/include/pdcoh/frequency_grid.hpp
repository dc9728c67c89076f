#pragma once

#include <stdexcept>
#include <vector>

#include "pdcoh/common.hpp"

namespace pdcoh {

// Uniform grid of angular-frequency offsets from a carrier. Odd point count
// so the carrier itself is a grid node.
class FrequencyGrid {
public:
    FrequencyGrid(double center, double span_half_width, int n_points)
        : center_(center), half_span_(span_half_width), n_(n_points) {
        require_finite(center, "grid center");
        require_finite(span_half_width, "grid span");
        if (n_points < 3 || n_points % 2 == 0)
            throw std::domain_error("grid n_points must be odd and >= 3");
        if (span_half_width <= 0.0)
            throw std::domain_error("grid span_half_width must be > 0");
    }

    double center() const { return center_; }
    double half_span() const { return half_span_; }
    int size() const { return n_; }
    double spacing() const { return 2.0 * half_span_ / (n_ - 1); }

    // offset from the carrier at node i, in [-half_span, +half_span]
    double offset(int i) const { return -half_span_ + i * spacing(); }

    // trapezoid weight for node i
    double weight(int i) const { return (i == 0 || i == n_ - 1) ? 0.5 : 1.0; }

    std::vector<double> offsets() const {
        std::vector<double> v(n_);
        for (int i = 0; i < n_; ++i) v[i] = offset(i);
        return v;
    }

    // grid with every other node kept (endpoints and center survive since
    // n is odd); used for the half-resolution accuracy self-check
    FrequencyGrid coarsened() const {
        int m = (n_ - 1) / 2 + 1;
        if (m < 3 || m % 2 == 0) m = 3;
        return FrequencyGrid(center_, half_span_, m);
    }

    bool operator==(const FrequencyGrid&) const = default;

private:
    double center_;
    double half_span_;
    int n_;
};

}  // namespace pdcoh
