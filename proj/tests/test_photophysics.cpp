#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qspec/photophysics.hpp"

#include <cmath>
#include <numbers>

using namespace qspec::photophysics;

TEST_CASE("lorentzian response: peak, half width, reported linewidth") {
    CHECK(lorentzian_response(0.0, 39.0, 7.42) == doctest::Approx(7.42));
    CHECK(lorentzian_response(19.5, 39.0, 7.42) == doctest::Approx(3.71));
    CHECK(lorentzian_response(0.5 * 10.0, 10.0, 2.0) == doctest::Approx(1.0));
    CHECK(lorentzian_response(-7.3, 39.0, 7.42) ==
          doctest::Approx(lorentzian_response(7.3, 39.0, 7.42)));
}

TEST_CASE("incomplete gamma: closed forms and quadrature oracle") {
    CHECK(incomplete_gamma(1.0, 2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(incomplete_gamma(1.0, 0.0) == doctest::Approx(1.0));
    CHECK(incomplete_gamma(5.7, 0.0) == doctest::Approx(1.0));
    CHECK(incomplete_gamma(2.0, 1.0) == doctest::Approx(2.0 / std::numbers::e).epsilon(1e-12));
    // a=2: (1+z) e^{-z}
    for (double z : {0.1, 0.5, 3.0, 11.0})
        CHECK(incomplete_gamma(2.0, z) == doctest::Approx((1.0 + z) * std::exp(-z)).epsilon(1e-11));

    // quadrature oracle on the defining integral
    for (double a : {0.7, 2.0, 5.0, 13.0}) {
        for (double z : {0.2, 1.0, 4.0, 20.0}) {
            const double upper = z + 60.0 + 10.0 * a;
            const double integral = oracles::integrate(
                [a](double t) { return std::pow(t, a - 1.0) * std::exp(-t); }, z, upper, 1e-13);
            const double want = integral / std::tgamma(a);
            CHECK(incomplete_gamma(a, z) == doctest::Approx(want).epsilon(1e-9));
        }
    }

    CHECK_THROWS_AS(incomplete_gamma(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(incomplete_gamma(1.0, -0.5), std::domain_error);
}

TEST_CASE("incomplete gamma is monotone decreasing in z and bounded") {
    for (double a : {1.0, 3.0, 10.0}) {
        double prev = 1.0;
        for (double z = 0.0; z <= 40.0; z += 0.25) {
            const double q = incomplete_gamma(a, z);
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
            CHECK(q <= prev + 1e-12);
            prev = q;
        }
    }
}

TEST_CASE("heralding probability matches the Poisson tail") {
    // P(N >= T) by direct summation of the complement
    const auto poisson_tail = [](int t, double lam) {
        double acc = 0.0, term = std::exp(-lam);
        for (int k = 0; k < t; ++k) {
            acc += term;
            term *= lam / (k + 1);
        }
        return 1.0 - acc;
    };
    for (int t : {1, 2, 5, 10})
        for (double lam : {0.0, 0.3, 2.0, 7.42, 25.0})
            CHECK(heralding_probability(t, lam) == doctest::Approx(poisson_tail(t, lam)).epsilon(1e-10));
}

namespace {

std::vector<double> make_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

EmitterModel reference_emitter() {
    EmitterModel em;
    em.gamma_mhz = 39.0;
    em.c0 = 7.42;
    em.gamma_lifetime_mhz = 26.0;
    return em;
}

} // namespace

TEST_CASE("heralded density: normalization, peak position, zero-rate point") {
    const auto em = reference_emitter();
    const auto grid = make_grid(-400.0, 400.0, 1601);
    const auto d = heralded_spectral_density(grid, 5, em, 0.0);

    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        integral += 0.5 * (d.density[i] + d.density[i - 1]) * (grid[i] - grid[i - 1]);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));

    std::size_t imax = 0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (d.density[i] > d.density[imax]) imax = i;
    CHECK(grid[imax] == doctest::Approx(0.0).epsilon(1e-9));

    // a vanishing Lorentzian rate cannot pass the threshold: the far
    // tail collapses relative to the peak
    CHECK(heralding_probability(3, 0.0) == 0.0);
    CHECK(d.density.front() / d.density[imax] < 1e-4);
}

TEST_CASE("heralded density: normalization holds for T = 1..20") {
    const auto em = reference_emitter();
    for (int t = 1; t <= 20; ++t) {
        // widen the grid until the reported truncation is small
        double span = 800.0;
        for (; span < 2e5; span *= 2.0) {
            const auto grid = make_grid(-0.5 * span, 0.5 * span, 2001);
            const auto d = heralded_spectral_density(grid, t, em, 0.0);
            if (d.truncation_fraction < 1e-3) {
                double integral = 0.0;
                for (std::size_t i = 1; i < grid.size(); ++i)
                    integral += 0.5 * (d.density[i] + d.density[i - 1]) * (grid[i] - grid[i - 1]);
                CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
                break;
            }
        }
        CHECK(span < 2e5);
    }
}

TEST_CASE("heralded density: saturated rate gives a uniform density") {
    EmitterModel em = reference_emitter();
    em.c0 = 1e9; // lambda huge everywhere on the grid: every block passes T=1
    const auto grid = make_grid(-250.0, 250.0, 501);
    const auto d = heralded_spectral_density(grid, 1, em, 0.0);
    const double expect = 1.0 / 500.0;
    for (double v : d.density) CHECK(v == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("heralded density narrows monotonically with threshold") {
    const auto em = reference_emitter();
    const auto grid = make_grid(-600.0, 600.0, 4801);
    double prev = 1e30;
    for (int t = 1; t <= 17; ++t) {
        const auto d = heralded_spectral_density(grid, t, em, 0.0);
        const double w = oracles::sampled_fwhm(d.f_mhz, d.density);
        CHECK(w <= prev + 1e-9);
        prev = w;
    }
}

TEST_CASE("truncation reporting: narrow grid flagged, wide grid clean") {
    const auto em = reference_emitter();
    const auto narrow = make_grid(-200.0, 200.0, 801);
    const auto d1 = heralded_spectral_density(narrow, 1, em, 0.0);
    CHECK(d1.truncation_fraction > 1e-3); // T=1 tail is heavy
    const auto d10 = heralded_spectral_density(narrow, 10, em, 0.0);
    CHECK(d10.truncation_fraction < 1e-3);
}

TEST_CASE("checkprobe spectrum: Dirac-density limit reduces to the Lorentzian") {
    // at a huge threshold only exactly-on-resonance frequencies pass
    const auto grid = make_grid(-150.0, 150.0, 301);
    SpectrumOptions opt;
    opt.support_span_mhz = 400.0;
    opt.spacing_mhz = 0.25; // resolve the near-Dirac density spike
    const auto spec = checkprobe_spectrum(grid, 60, 39.0, 7.42, 0.0, opt);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lor = lorentzian_response(grid[i], 39.0, 7.42);
        CHECK(spec.counts[i] == doctest::Approx(lor).epsilon(0.02));
    }
}

TEST_CASE("checkprobe spectrum: low threshold broadens, peak bounded by c0") {
    const auto grid = make_grid(-200.0, 200.0, 401);
    SpectrumOptions opt;
    opt.support_span_mhz = 400.0;
    const auto s1 = checkprobe_spectrum(grid, 1, 39.0, 7.42, 0.0, opt);
    const double w1 = oracles::sampled_fwhm(s1.f_mhz, s1.counts);
    CHECK(w1 > 39.0);
    for (double v : s1.counts) CHECK(v <= 7.42 * (1.0 + 1e-9));

    // fitted width approaches gamma monotonically as T grows
    double prev = 1e30;
    for (int t : {1, 3, 5, 9, 13, 17}) {
        const auto s = checkprobe_spectrum(grid, t, 39.0, 7.42, 0.0, opt);
        const double w = oracles::sampled_fwhm(s.f_mhz, s.counts);
        CHECK(w <= prev + 1e-9);
        prev = w;
    }
    CHECK(prev > 39.0 * 0.98);
}

TEST_CASE("diffusion models: anchor values and symmetry") {
    CHECK(no_recapture_model(0.0, 5.0, 0.3, 36.0, 10.0) == doctest::Approx(10.0));
    // gamma_d/gamma = 1/ms at t = 1 ms halves the signal
    CHECK(no_recapture_model(1.0, 36.0, 0.0, 36.0, 10.0) == doctest::Approx(5.0));
    CHECK(diffusion_only_model(10.0, 3.6, 36.0, 10.0) == doctest::Approx(5.0));
    CHECK(diffusion_only_model(0.0, 3.6, 36.0, 4.2) == doctest::Approx(4.2));

    for (double t : {0.01, 0.5, 2.0, 9.0}) {
        CHECK(diffusion_only_model(t, 2.0, 36.0, 1.0) ==
              doctest::Approx(diffusion_only_model(-t, 2.0, 36.0, 1.0)));
        CHECK(no_recapture_model(t, 2.0, 0.0, 36.0, 1.0) ==
              doctest::Approx(no_recapture_model(-t, 2.0, 0.0, 36.0, 1.0)));
        CHECK(no_recapture_model(t, 2.0, 0.0, 36.0, 1.0) ==
              doctest::Approx(diffusion_only_model(t, 2.0, 36.0, 1.0)));
        // monotone non-increasing in |t|
        CHECK(no_recapture_model(t, 2.0, 0.4, 36.0, 1.0) <=
              no_recapture_model(0.5 * t, 2.0, 0.4, 36.0, 1.0));
    }
}

TEST_CASE("saturation fit: anchors and round trip") {
    // rho from the stated definitions: A=1, B=0.1, p_sat=2
    {
        std::vector<double> p, y;
        for (double pw : {0.1, 0.3, 0.8, 1.5, 2.5, 4.0, 6.0, 9.0, 14.0, 20.0}) {
            p.push_back(pw);
            y.push_back(0.1 * pw + 1.0 * pw / (pw + 2.0));
        }
        const auto fit = saturation_fit(p, y);
        CHECK(fit.fit.converged);
        CHECK(fit.rho == doctest::Approx(0.5 / 0.7).epsilon(1e-6));
        CHECK_FALSE(fit.background_only);
    }
    // B=0: all signal
    {
        std::vector<double> p, y;
        for (double pw : {0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            p.push_back(pw);
            y.push_back(1.7 * pw / (pw + 0.6));
        }
        const auto fit = saturation_fit(p, y);
        CHECK(fit.rho == doctest::Approx(1.0).epsilon(1e-6));
    }
    // exact recovery of the generator values
    {
        const double a = 2.0, b = 0.05, psat = 0.8;
        std::vector<double> p, y;
        for (double pw : {0.05, 0.1, 0.2, 0.4, 0.8, 1.4, 2.2, 3.2, 4.5, 6.0}) {
            p.push_back(pw);
            y.push_back(b * pw + a * pw / (pw + psat));
        }
        const auto fit = saturation_fit(p, y);
        REQUIRE(fit.fit.converged);
        CHECK(fit.fit.value("A") == doctest::Approx(a).epsilon(1e-6));
        CHECK(fit.fit.value("B") == doctest::Approx(b).epsilon(1e-6));
        CHECK(fit.fit.value("p_sat") == doctest::Approx(psat).epsilon(1e-6));
    }
    // pure background: rho forced to zero with the warning flag
    {
        std::vector<double> p, y;
        for (double pw : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) {
            p.push_back(pw);
            y.push_back(0.3 * pw);
        }
        const auto fit = saturation_fit(p, y);
        CHECK(fit.background_only);
        CHECK(fit.rho == 0.0);
    }
}

TEST_CASE("collection efficiency: limits, isotropic closed form, monotonicity") {
    constexpr double half_pi = std::numbers::pi / 2.0;

    FarFieldProfile zero;
    zero.theta_rad = {0.0, 0.5, 1.0, half_pi};
    zero.p_boundary = {0.0, 0.0, 0.0, 0.0};
    zero.p_tot = 1.0;
    CHECK(collection_efficiency(zero, 0.9) == doctest::Approx(0.0));

    // full aperture collects the whole hemisphere integral
    FarFieldProfile prof;
    const std::size_t n = 400;
    double integral = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double th = half_pi * static_cast<double>(i) / static_cast<double>(n - 1);
        prof.theta_rad.push_back(th);
        prof.p_boundary.push_back(std::sin(th) * std::cos(th)); // some beam shape
    }
    for (std::size_t i = 1; i < n; ++i)
        integral += 0.5 * (prof.p_boundary[i] + prof.p_boundary[i - 1]) *
                    (prof.theta_rad[i] - prof.theta_rad[i - 1]);
    prof.p_tot = 2.0 * integral; // half the power escapes elsewhere
    CHECK(collection_efficiency(prof, 1.0) == doctest::Approx(integral / prof.p_tot).epsilon(1e-9));

    // isotropic boundary profile: eta = asin(na) / (pi/2) * (hemisphere / p_tot)
    FarFieldProfile iso;
    for (std::size_t i = 0; i < n; ++i)
        iso.theta_rad.push_back(half_pi * static_cast<double>(i) / static_cast<double>(n - 1));
    iso.p_boundary.assign(n, 2.0);
    iso.p_tot = 2.0 * half_pi;
    const double quad = oracles::integrate([](double) { return 2.0; }, 0.0, std::asin(0.9));
    CHECK(collection_efficiency(iso, 0.9) == doctest::Approx(quad / iso.p_tot).epsilon(1e-9));
    CHECK(collection_efficiency(iso, 0.9) == doctest::Approx(std::asin(0.9) / half_pi).epsilon(1e-9));

    double prev = 0.0;
    for (double na = 0.05; na <= 1.0; na += 0.05) {
        const double eta = collection_efficiency(prof, std::min(na, 1.0));
        CHECK(eta >= prev - 1e-12);
        CHECK(eta <= 1.0 + 1e-12);
        prev = eta;
    }

    CHECK_THROWS_AS(collection_efficiency(prof, 0.0), std::domain_error);
    CHECK_THROWS_AS(collection_efficiency(prof, 1.2), std::domain_error);
}

TEST_CASE("emitter and profile validation") {
    EmitterModel em = reference_emitter();
    em.gamma_mhz = 10.0; // below the lifetime limit
    CHECK_THROWS_AS(em.validate(), std::invalid_argument);

    FarFieldProfile bad;
    bad.theta_rad = {0.0, 0.4};
    bad.p_boundary = {1.0, -0.1};
    bad.p_tot = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
