#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "pdcoh/common.hpp"
#include "pdcoh/frequency_grid.hpp"
#include "pdcoh/gsm.hpp"

namespace pdcoh {

struct WkResult {
    Complex value{};
    bool accuracy_warning = false;
};

// Pump cross-spectral density W(w', w''), either as the GSM closed form or
// as a Hermitian PSD kernel tabulated on a frequency grid. Immutable after
// construction.
class CrossSpectralDensity {
public:
    enum class Kind { closed_form_gsm, tabulated };

    static CrossSpectralDensity from_model(GaussianSchellModel model) {
        model.validate();
        CrossSpectralDensity c;
        c.kind_ = Kind::closed_form_gsm;
        c.model_ = model;
        return c;
    }

    static CrossSpectralDensity from_kernel(const FrequencyGrid& grid,
                                            Eigen::MatrixXcd kernel) {
        if (kernel.rows() != grid.size() || kernel.cols() != grid.size())
            throw std::domain_error("kernel shape does not match grid");
        validate_kernel(kernel);
        CrossSpectralDensity c;
        c.kind_ = Kind::tabulated;
        c.grid_ = grid;
        c.kernel_ = std::move(kernel);
        return c;
    }

    static CrossSpectralDensity tabulate(const GaussianSchellModel& model,
                                         std::optional<FrequencyGrid> grid = {}) {
        model.validate();
        FrequencyGrid g = grid ? *grid : model.default_grid();
        int n = g.size();
        Eigen::MatrixXcd k(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                k(i, j) = model.csd(g.offset(i), g.offset(j));
        return from_kernel(g, std::move(k));
    }

    // Discrete stand-in for the stationary limit W = S(w) delta(w'-w''):
    // a diagonal kernel whose row quadrature mass equals S(w).
    static CrossSpectralDensity stationary(const std::function<double(double)>& spectrum,
                                           const FrequencyGrid& grid) {
        int n = grid.size();
        double h = grid.spacing();
        Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            double s = spectrum(grid.offset(i));
            if (!(s >= 0.0)) throw std::domain_error("spectrum must be non-negative");
            k(i, i) = s / h;
        }
        return from_kernel(grid, std::move(k));
    }

    Kind kind() const { return kind_; }
    bool is_gsm() const { return kind_ == Kind::closed_form_gsm; }
    const GaussianSchellModel& model() const {
        if (!model_) throw std::logic_error("not a closed-form GSM density");
        return *model_;
    }
    const FrequencyGrid& grid() const {
        if (!grid_) throw std::logic_error("no grid on a closed-form density");
        return *grid_;
    }
    const Eigen::MatrixXcd& kernel() const {
        if (kind_ != Kind::tabulated) throw std::logic_error("no kernel on a closed-form density");
        return kernel_;
    }

    // pump carrier frequency
    double center() const { return model_ ? model_->center : grid_->center(); }

    // tabulated view of this density (identity for the tabulated kind)
    CrossSpectralDensity tabulated(std::optional<FrequencyGrid> grid = {}) const {
        if (kind_ == Kind::tabulated) return *this;
        return tabulate(*model_, grid);
    }

    // Generalized Wiener-Khintchine transform:
    //   Gamma(t1, t2) = iint dw' dw'' W(w', w'') e^{-i w' t1} e^{+i w'' t2}
    // Closed form for the GSM kind, trapezoidal quadrature for tabulated
    // kernels with a half-resolution self-check.
    WkResult wk_transform(double t1, double t2) const {
        require_finite(t1, "time");
        require_finite(t2, "time");
        if (kind_ == Kind::closed_form_gsm) {
            const auto& m = *model_;
            if (m.fully_coherent()) {
                // rank-one kernel: Gamma = f(t1) f*(t2), f the transform of
                // the coherent spectral amplitude
                double b = m.bandwidth;
                double v = m.amplitude * 4.0 * pi * b * b *
                           std::exp(-b * b * (t1 * t1 + t2 * t2));
                return {Complex(v, 0.0), false};
            }
            return {Complex(m.temporal_correlation(t1, t2), 0.0), false};
        }
        Complex full = quadrature(*grid_, kernel_, t1, t2);
        // half-grid estimate for the truncation warning
        FrequencyGrid half = grid_->coarsened();
        int step = (grid_->size() - 1) / (half.size() - 1);
        Eigen::MatrixXcd hk(half.size(), half.size());
        for (int i = 0; i < half.size(); ++i)
            for (int j = 0; j < half.size(); ++j)
                hk(i, j) = kernel_(i * step, j * step);
        Complex coarse = quadrature(half, hk, t1, t2);
        double scale = std::max(std::abs(full), kernel_.cwiseAbs().maxCoeff());
        bool warn = std::abs(full - coarse) > 1e-4 * scale;
        return {full, warn};
    }

    void save(const std::string& path) const {
        if (kind_ != Kind::tabulated)
            throw std::logic_error("only tabulated densities are saved");
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path + " for writing");
        char buf[64];
        auto fmt = [&](double x) {
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return std::string(buf);
        };
        out << "pdcoh-csd 1\n";
        out << "center " << fmt(grid_->center()) << "\n";
        out << "span_half_width " << fmt(grid_->half_span()) << "\n";
        out << "n_points " << grid_->size() << "\n";
        for (int i = 0; i < grid_->size(); ++i) {
            for (int j = 0; j < grid_->size(); ++j) {
                if (j) out << ' ';
                out << fmt(kernel_(i, j).real()) << ' ' << fmt(kernel_(i, j).imag());
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed: " + path);
    }

    static CrossSpectralDensity load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "pdcoh-csd" || version != 1)
            throw std::runtime_error(path + ": not a pdcoh-csd v1 file");
        std::string key;
        double center = 0, span = 0;
        int n = 0;
        in >> key >> center;
        if (key != "center") throw std::runtime_error(path + ": expected 'center'");
        in >> key >> span;
        if (key != "span_half_width") throw std::runtime_error(path + ": expected 'span_half_width'");
        in >> key >> n;
        if (key != "n_points") throw std::runtime_error(path + ": expected 'n_points'");
        FrequencyGrid grid(center, span, n);
        Eigen::MatrixXcd kern(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double re, im;
                if (!(in >> re >> im))
                    throw std::runtime_error(path + ": truncated kernel data");
                kern(i, j) = Complex(re, im);
            }
        return from_kernel(grid, std::move(kern));
    }

    static void validate_kernel(const Eigen::MatrixXcd& k) {
        int n = static_cast<int>(k.rows());
        double scale = k.cwiseAbs().maxCoeff();
        double herm = (k - k.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-12 * std::max(scale, 1e-300))
            throw std::domain_error("kernel is not Hermitian");
        double trace = k.real().trace();
        for (int i = 0; i < n; ++i) {
            if (k(i, i).real() < -1e-12 * std::max(scale, 1e-300))
                throw std::domain_error("kernel diagonal must be non-negative");
        }
        if (scale > 0.0) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k, Eigen::EigenvaluesOnly);
            double lmin = es.eigenvalues().minCoeff();
            if (lmin < -1e-10 * trace / n)
                throw std::domain_error("kernel is not positive semidefinite");
        }
    }

private:
    CrossSpectralDensity() = default;

    static Complex quadrature(const FrequencyGrid& g, const Eigen::MatrixXcd& k,
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

    Kind kind_ = Kind::closed_form_gsm;
    std::optional<GaussianSchellModel> model_;
    std::optional<FrequencyGrid> grid_;
    Eigen::MatrixXcd kernel_;
};

}  // namespace pdcoh
