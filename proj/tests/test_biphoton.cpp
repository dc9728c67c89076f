#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pdcoh/pdcoh.hpp"

using namespace pdcoh;

namespace {

GaussianSchellModel pump_model(double bandwidth = 1.0, double corr = 1.0,
                               double center = 200.0) {
    GaussianSchellModel m;
    m.amplitude = 1.0;
    m.bandwidth = bandwidth;
    m.corr_width = corr;
    m.center = center;
    return m;
}

// all-gaussian response of overall width sigma_g, widest filters so the
// narrowest scale is the phase-matching width
SpectralResponse wide_response(double sigma_g, double pump_center = 200.0) {
    AlternativeResponse a;
    a.phase_matching = {PhaseMatching::Model::gaussian, sigma_g};
    a.filter_s = {Filter::Model::gaussian, 2.0 * sigma_g};
    a.filter_i = {Filter::Model::gaussian, 3.0 * sigma_g};
    return SpectralResponse::symmetric(a, 0.55 * pump_center, 0.45 * pump_center,
                                       pump_center);
}

}  // namespace

TEST_CASE("pathway time and phase algebra") {
    Pathway p{1.0, 0.4, 0.2, 0.1, 0.2, 0.3};
    CHECK(p.tau() == doctest::Approx(1.0 + 0.5 * 0.6));
    CHECK(p.tau_prime() == doctest::Approx(0.5 * 0.2));
    CHECK(p.phi() == doctest::Approx(0.6));
    PathwayPair pair{p, Pathway{0.2, 0.1, 0.5, 0.0, 0.0, 0.1}};
    PathwayDeltas d = pathway_deltas(pair);
    CHECK(d.dtau == doctest::Approx(pair.alt1.tau() - pair.alt2.tau()));
    CHECK(d.dtau_prime == doctest::Approx(pair.alt1.tau_prime() - pair.alt2.tau_prime()));
    CHECK(d.dphi == doctest::Approx(0.5));
    PathwayDeltas s = pair.swapped().deltas();
    CHECK(s.dtau == doctest::Approx(-d.dtau));
    CHECK(s.dtau_prime == doctest::Approx(-d.dtau_prime));
    CHECK(s.dphi == doctest::Approx(-d.dphi));
    Pathway bad = p;
    bad.tau_s = std::nan("");
    CHECK_THROWS_AS((PathwayPair{bad, p}.validate()), std::domain_error);
}

TEST_CASE("gamma_p equals the carrier times the pump correlation") {
    GaussianSchellModel m = pump_model();
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(m);
    double tau1 = 0.4, tau2 = -0.2, tbar = 0.3;
    CoherenceSample g = gamma_p(csd, tau1, tau2, tbar);
    Complex expect = std::exp(Complex(0.0, -m.center * (tau1 - tau2))) *
                     m.temporal_correlation(tau1 - tbar, tau2 - tbar);
    CHECK(std::abs(g.value - expect) < 1e-12 * std::abs(expect));
    // swapping the pathway times conjugates the sample
    CoherenceSample h = gamma_p(csd, tau2, tau1, tbar);
    CHECK(std::abs(h.value - std::conj(g.value)) < 1e-12 * std::abs(g.value));
}

TEST_CASE("gamma_p Cauchy-Schwarz over random arguments") {
    CrossSpectralDensity csd =
        CrossSpectralDensity::tabulate(pump_model(1.0, 0.7));
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> ud(-1.5, 1.5);
    for (int k = 0; k < 30; ++k) {
        double tau1 = ud(rng), tau2 = ud(rng), tbar = ud(rng);
        double c = std::abs(gamma_p(csd, tau1, tau2, tbar).value);
        double d1 = gamma_p(csd, tau1, tau1, tbar).value.real();
        double d2 = gamma_p(csd, tau2, tau2, tbar).value.real();
        CHECK(c * c <= d1 * d2 * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("gamma_d matches the separable gaussian closed form") {
    double sig = 2.0;
    AlternativeResponse a;
    a.phase_matching = {PhaseMatching::Model::gaussian, sig};
    SpectralResponse resp = SpectralResponse::symmetric(a, 120.0, 80.0, 200.0);
    FrequencyGrid grid = resp.default_d_grid(257);
    double tp1 = 0.1, tp2 = -0.3, ttil = 0.2;
    CoherenceSample g = gamma_d(resp, tp1, tp2, ttil, grid);
    // rank-one kernel of a gaussian g: product of two gaussian transforms
    double u1 = tp1 - ttil, u2 = tp2 - ttil;
    double mag = 2.0 * pi * sig * sig *
                 std::exp(-0.5 * sig * sig * (u1 * u1 + u2 * u2));
    Complex expect = std::exp(Complex(0.0, -resp.difference_center() * (tp1 - tp2))) * mag;
    CHECK(std::abs(g.value - expect) < 1e-6 * mag);
    CHECK_FALSE(g.accuracy_warning);
    // grid too coarse for the response scale is rejected
    CHECK_THROWS_AS(gamma_d(resp, tp1, tp2, ttil,
                            FrequencyGrid(resp.difference_center(), 12.0, 5)),
                    std::domain_error);
}

TEST_CASE("gamma_d swap symmetry and diagonal positivity") {
    SpectralResponse resp = wide_response(1.5);
    FrequencyGrid grid = resp.default_d_grid(257);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        double a = ud(rng), b = ud(rng), ttil = ud(rng);
        Complex g12 = gamma_d(resp, a, b, ttil, grid).value;
        Complex g21 = gamma_d(resp, b, a, ttil, grid).value;
        CHECK(std::abs(g12 - std::conj(g21)) < 1e-10 * (1.0 + std::abs(g12)));
        CHECK(gamma_d(resp, a, a, ttil, grid).value.real() >= -1e-12);
    }
}

TEST_CASE("gamma2 factorizes into the pump and down-conversion parts") {
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(pump_model());
    SpectralResponse resp = wide_response(3.0);
    FrequencyGrid grid = resp.default_d_grid(257);
    PathwayPair paths{Pathway{0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
                      Pathway{0.12, 0.3, -0.1, 0.4, 0.0, 0.0}};
    double t_s = 0.35, t_i = -0.15;
    CoherenceSample g2 = gamma2_factorized(csd, resp, paths, t_s, t_i, grid);
    double tbar = 0.5 * (t_s + t_i), ttil = 0.5 * (t_s - t_i);
    Complex p = gamma_p(csd, paths.alt1.tau(), paths.alt2.tau(), tbar).value;
    Complex d = gamma_d(resp, paths.alt1.tau_prime(), paths.alt2.tau_prime(), ttil, grid).value;
    CHECK(std::abs(g2.value - p * d) < 1e-12 * std::abs(p * d));
}

TEST_CASE("coincidence rate: interference law and positivity") {
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(pump_model());
    SpectralResponse resp = wide_response(3.0);
    FrequencyGrid grid = resp.default_d_grid(257);
    CouplingAmplitudes kap{0.9, 1.1, 1.2, 0.8};
    double t_s = 0.1, t_i = -0.05;
    PathwayPair base{Pathway{}, Pathway{0.05, 0.1, -0.1, 0.0, 0.0, 0.0}};

    // rate(dphi) must follow direct + 2 k1 k2 |cross| cos(arg - dphi)
    PathwayPair d1{base.alt1, base.alt1}, d2{base.alt2, base.alt2};
    double k1 = kap.kappa1(), k2 = kap.kappa2();
    double direct = k1 * k1 * gamma2_factorized(csd, resp, d1, t_s, t_i, grid).value.real() +
                    k2 * k2 * gamma2_factorized(csd, resp, d2, t_s, t_i, grid).value.real();
    Complex cross = gamma2_factorized(csd, resp, base, t_s, t_i, grid).value;
    for (double dphi : {0.0, 0.7, 1.9, 3.1, 4.6}) {
        PathwayPair p = base;
        p.alt1.phi_p = dphi;
        RateResult r = coincidence_rate(csd, resp, p, kap, t_s, t_i, grid);
        double expect = direct + 2.0 * k1 * k2 *
                                     (cross * std::exp(Complex(0.0, -dphi))).real();
        CHECK(r.rate == doctest::Approx(expect).epsilon(1e-10));
        CHECK(r.rate >= 0.0);
    }

    // positivity over random pathway/time draws
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ud(-0.5, 0.5);
    std::uniform_real_distribution<double> uphi(0.0, 2.0 * pi);
    for (int k = 0; k < 1000; ++k) {
        PathwayPair p{Pathway{ud(rng), ud(rng), ud(rng), uphi(rng), 0.0, 0.0},
                      Pathway{ud(rng), ud(rng), ud(rng), uphi(rng), 0.0, 0.0}};
        RateResult r = coincidence_rate(csd, resp, p, kap, ud(rng), ud(rng), grid);
        CHECK(r.rate >= 0.0);
    }
}

TEST_CASE("monte-carlo oracle agrees with the factorized form") {
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(pump_model());
    SpectralResponse resp = wide_response(100.0);
    FrequencyGrid d_grid = resp.default_d_grid();
    PathwayPair paths{Pathway{}, Pathway{0.0, 0.3, 0.0, 0.2, 0.1, 0.0}};
    std::vector<std::pair<double, double>> times;
    for (double tbar : {-0.5, 0.0, 0.5})
        times.push_back({tbar + 0.15, tbar - 0.15});
    auto res = gamma2_oracle_mc(csd, resp, paths, times, 4000, 42, d_grid);
    REQUIRE(res.size() == times.size());
    for (size_t q = 0; q < times.size(); ++q) {
        auto [t_s, t_i] = times[q];
        Complex fact = gamma2_factorized(csd, resp, paths, t_s, t_i, d_grid).value;
        CHECK(res[q].count == 4000);
        CHECK(res[q].std_error > 0.0);
        CHECK(std::abs(res[q].sample.value - fact) <
              3.0 * res[q].std_error + 5e-3 * std::abs(fact));
    }
}

TEST_CASE("oracle is deterministic and schedule-independent") {
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(pump_model());
    SpectralResponse resp = wide_response(50.0);
    FrequencyGrid d_grid = resp.default_d_grid();
    PathwayPair paths{Pathway{}, Pathway{0.0, 0.2, 0.0, 0.0, 0.0, 0.0}};
    OracleResult a = gamma2_oracle_mc(csd, resp, paths, 0.1, -0.1, 600, 9, d_grid, 1);
    OracleResult b = gamma2_oracle_mc(csd, resp, paths, 0.1, -0.1, 600, 9, d_grid, 4);
    CHECK(a.sample.value == b.sample.value);
    CHECK(a.std_error == b.std_error);
    OracleResult c = gamma2_oracle_mc(csd, resp, paths, 0.1, -0.1, 600, 10, d_grid, 1);
    CHECK(a.sample.value != c.sample.value);
}

TEST_CASE("oracle handles the fully-coherent pump deterministically") {
    GaussianSchellModel m = pump_model();
    m.corr_width.reset();
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(m);
    SpectralResponse resp = wide_response(100.0);
    FrequencyGrid d_grid = resp.default_d_grid();
    PathwayPair paths{Pathway{}, Pathway{0.0, 0.1, 0.1, 0.0, 0.0, 0.0}};
    OracleResult r = gamma2_oracle_mc(csd, resp, paths, 0.05, -0.05, 100, 1, d_grid);
    CHECK(r.std_error == 0.0);
    CHECK(r.count == 1);
    Complex fact = gamma2_factorized(csd, resp, paths, 0.05, -0.05, d_grid).value;
    CHECK(std::abs(r.sample.value - fact) < 5e-3 * std::abs(fact));
}

TEST_CASE("oracle input validation") {
    CrossSpectralDensity csd = CrossSpectralDensity::from_model(pump_model());
    SpectralResponse resp = wide_response(50.0);
    FrequencyGrid d_grid = resp.default_d_grid();
    PathwayPair paths{Pathway{}, Pathway{}};
    CHECK_THROWS_AS(gamma2_oracle_mc(csd, resp, paths, 0.0, 0.0, 50, 1, d_grid),
                    std::domain_error);
    AlternativeResponse a;
    a.phase_matching = {PhaseMatching::Model::gaussian, 50.0};
    PhaseScreen scr{0.5, 10.0, 4, 3};
    SpectralResponse screened =
        SpectralResponse::symmetric(a, 110.0, 90.0, 200.0, scr);
    CHECK_THROWS_AS(gamma2_oracle_mc(csd, screened, paths, 0.0, 0.0, 200, 1, d_grid),
                    std::domain_error);
}
