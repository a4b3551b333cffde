#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "qspec/photophysics.hpp"
#include "qspec/rng.hpp"

#include <cmath>

using namespace qspec;
using namespace qspec::photophysics;

namespace {

EmitterModel reference_emitter() {
    EmitterModel em;
    em.gamma_mhz = 39.0;
    em.c0 = 7.42;
    em.gamma_lifetime_mhz = 26.0;
    return em;
}

std::vector<double> make_grid(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// Poisson-sample the analytic mean curve at each delay; the heralding
// side sits on resonance at c0.
std::vector<CheckProbeRecord> make_diffusion_records(double gamma_d, double gamma_i, double gamma,
                                                     double c0, std::size_t reps_per_delay,
                                                     const std::vector<double>& delays,
                                                     std::uint64_t seed) {
    std::vector<CheckProbeRecord> records;
    std::int64_t rep = 0;
    for (double t : delays) {
        const double mean = no_recapture_model(t, gamma_d, gamma_i, gamma, c0);
        for (std::size_t r = 0; r < reps_per_delay; ++r) {
            rng::Stream stream(seed, "diffusion_gen", static_cast<std::uint64_t>(rep));
            CheckProbeRecord rec;
            rec.rep = rep++;
            rec.delay_ms = t;
            if (t >= 0.0) {
                rec.check_counts = stream.poisson(c0);
                rec.probe_counts = stream.poisson(mean);
            } else {
                rec.probe_counts = stream.poisson(c0);
                rec.check_counts = stream.poisson(mean);
            }
            records.push_back(rec);
        }
    }
    return records;
}

std::vector<double> symmetric_delays(double scale) {
    std::vector<double> out;
    for (double t : {0.05, 0.1, 0.2, 0.4, 0.8, 1.5, 2.5, 4.0}) {
        out.push_back(t * scale);
        out.push_back(-t * scale);
    }
    return out;
}

} // namespace

TEST_CASE("simulator: dark emitter gives all-zero counts") {
    EmitterModel em = reference_emitter();
    em.c0 = 1e-9;
    const auto run = simulate_check_probe(em, 0.0, 2000, PriorSpec::dirac(0.0), 5);
    for (const auto& r : run.records) {
        CHECK(r.check_counts == 0);
        CHECK(r.probe_counts == 0);
    }
}

TEST_CASE("simulator: resonant emitter heralded at T=1 converges to c0") {
    const auto em = reference_emitter();
    const auto run = simulate_check_probe(em, 0.0, 200000, PriorSpec::dirac(0.0), 11);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : run.records) {
        if (r.check_counts < 1) continue;
        sum += static_cast<double>(r.probe_counts);
        ++n;
    }
    const double mean = sum / static_cast<double>(n);
    CHECK(std::abs(mean - em.c0) < 3.0 * std::sqrt(em.c0 / static_cast<double>(n)));
}

TEST_CASE("simulator reproducibility and seed separation") {
    const auto em = reference_emitter();
    const auto a = simulate_check_probe(em, 0.0, 500, PriorSpec::uniform(0.0, 200.0), 3);
    const auto b = simulate_check_probe(em, 0.0, 500, PriorSpec::uniform(0.0, 200.0), 3);
    const auto c = simulate_check_probe(em, 0.0, 500, PriorSpec::uniform(0.0, 200.0), 4);
    REQUIRE(a.records.size() == b.records.size());
    bool all_equal = true, any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        all_equal &= a.records[i].check_counts == b.records[i].check_counts &&
                     a.records[i].probe_counts == b.records[i].probe_counts;
        any_diff |= a.records[i].check_counts != c.records[i].check_counts;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("oracle equivalence: post-selected sweep matches the analytic spectrum") {
    const auto em = reference_emitter();
    const auto grid = make_grid(-200.0, 200.0, 41);
    const std::size_t reps = 100000;
    const auto run =
        simulate_check_probe(em, 0.0, reps, PriorSpec::uniform(0.0, 200.0), 17, grid);

    SpectrumOptions opt;
    opt.support_span_mhz = 400.0; // matches the uniform prior span
    for (int t : {1, 5}) {
        const auto analytic = checkprobe_spectrum(grid, t, em.gamma_mhz, em.c0, 0.0, opt);
        // per-point sample means and errors
        std::vector<double> sum(grid.size(), 0.0), sum2(grid.size(), 0.0);
        std::vector<std::size_t> n(grid.size(), 0);
        for (std::size_t r = 0; r < run.records.size(); ++r) {
            if (run.records[r].check_counts < t) continue;
            const std::size_t k = r % grid.size();
            const double v = static_cast<double>(run.records[r].probe_counts);
            sum[k] += v;
            sum2[k] += v * v;
            n[k] += 1;
        }
        for (std::size_t k = 0; k < grid.size(); ++k) {
            REQUIRE(n[k] > 30);
            const double mean = sum[k] / static_cast<double>(n[k]);
            const double var = (sum2[k] - sum[k] * mean) / static_cast<double>(n[k] - 1);
            const double sem = std::sqrt(var / static_cast<double>(n[k]));
            const double z = (mean - analytic.counts[k]) / sem;
            CAPTURE(t);
            CAPTURE(grid[k]);
            CHECK(std::abs(z) < 4.0);
        }
    }
}

TEST_CASE("diffusion fit: generator round trip within 10 percent") {
    const double gamma = 36.0, c0 = 10.0;
    const double gamma_d = 1.0 * gamma; // gamma_d/gamma = 1/ms
    const double gamma_i = 0.2;
    const auto delays = symmetric_delays(1.0);
    const auto records =
        make_diffusion_records(gamma_d, gamma_i, gamma, c0, 625, delays, 21);
    const auto fit = fit_spectral_diffusion(records, 1, DiffusionModel::no_recapture, gamma, 26.0);
    REQUIRE(fit.fit.converged);
    CHECK(std::abs(fit.gamma_d - gamma_d) / gamma_d < 0.10);
    CHECK(std::abs(fit.gamma_i - gamma_i) / gamma_i < 0.10);
    CHECK(std::abs(fit.fit.value("c0") - c0) / c0 < 0.05);
}

TEST_CASE("diffusion fit: zero diffusion stays consistent with zero") {
    const double gamma = 36.0, c0 = 8.0;
    const auto delays = symmetric_delays(1.0);
    const auto records = make_diffusion_records(0.0, 0.0, gamma, c0, 400, delays, 33);
    const auto fit =
        fit_spectral_diffusion(records, 1, DiffusionModel::diffusion_only, gamma, 26.0);
    CHECK(fit.gamma_d <= 2.0 * fit.gamma_d_sigma + 1e-9);
}

TEST_CASE("diffusion fit: linewidth band rescaling and proportionality") {
    const double gamma_assumed = 36.0, gamma_lifetime = 26.0;
    const auto delays = symmetric_delays(1.0);
    const auto records = make_diffusion_records(36.0, 0.0, gamma_assumed, 10.0, 500, delays, 55);
    const auto fit = fit_spectral_diffusion(records, 1, DiffusionModel::diffusion_only,
                                            gamma_assumed, gamma_lifetime, {1.0, 3.0});
    CHECK(fit.band_low ==
          doctest::Approx(fit.gamma_d * gamma_lifetime / gamma_assumed).epsilon(1e-12));
    CHECK(fit.band_high ==
          doctest::Approx(fit.gamma_d * 3.0 * gamma_lifetime / gamma_assumed).epsilon(1e-12));
    CHECK(fit.band_high / fit.band_low == doctest::Approx(3.0).epsilon(1e-12));

    // the fitted rate scales linearly with the assumed linewidth
    const auto fit2 = fit_spectral_diffusion(records, 1, DiffusionModel::diffusion_only,
                                             2.0 * gamma_assumed, gamma_lifetime, {1.0, 3.0});
    CHECK(fit2.gamma_d == doctest::Approx(2.0 * fit.gamma_d).epsilon(1e-6));
    CHECK(fit2.band_low == doctest::Approx(fit.band_low).epsilon(1e-6));
}

TEST_CASE("diffusion fit: insufficient bins raise") {
    std::vector<CheckProbeRecord> records;
    for (int r = 0; r < 100; ++r)
        records.push_back({r, r % 2 == 0 ? 0.5 : -0.5, 5, 5});
    CHECK_THROWS_AS(
        fit_spectral_diffusion(records, 1, DiffusionModel::diffusion_only, 36.0, 26.0),
        std::invalid_argument);
    // single-signed delays violate the precondition
    std::vector<CheckProbeRecord> onesided;
    for (int r = 0; r < 100; ++r)
        onesided.push_back({r, 0.1 * (1 + r % 8), 5, 5});
    CHECK_THROWS_AS(
        fit_spectral_diffusion(onesided, 1, DiffusionModel::diffusion_only, 36.0, 26.0),
        std::invalid_argument);
}

TEST_CASE("linewidth fit: threshold-swept recovery from the simulator") {
    const auto em = reference_emitter();
    const auto grid = make_grid(-200.0, 200.0, 41);
    const auto run =
        simulate_check_probe(em, 0.0, 60000, PriorSpec::uniform(0.0, 200.0), 99, grid);
    std::vector<int> thresholds;
    for (int t = 1; t <= 9; ++t) thresholds.push_back(t);
    const auto spectra = build_threshold_spectra_set(run, grid, thresholds);
    const auto fit =
        fit_checkprobe_linewidth(spectra.means, em.gamma_lifetime_mhz, 400.0, &spectra.occupancy);
    REQUIRE(fit.fit.converged);
    CHECK(std::abs(fit.fit.value("gamma") - em.gamma_mhz) / em.gamma_mhz < 0.08);
    CHECK(std::abs(fit.fit.value("c0") - em.c0) / em.c0 < 0.08);
}

TEST_CASE("linewidth fit: noiseless spectra anchor the lifetime ratio") {
    // analytic spectra at gamma = 57.5 MHz: ratio against 26 MHz is 2.21
    const auto grid = make_grid(-200.0, 200.0, 81);
    SpectrumOptions opt;
    opt.support_span_mhz = 400.0;
    ThresholdSpectra spectra;
    for (int t : {1, 3, 5, 8, 12}) {
        const auto s = checkprobe_spectrum(grid, t, 57.5, 7.0, 4.0, opt);
        spectra[t] = {s.f_mhz, s.counts};
    }
    const auto fit = fit_checkprobe_linewidth(spectra, 26.0, 400.0);
    REQUIRE(fit.fit.converged);
    CHECK(fit.fit.value("gamma") == doctest::Approx(57.5).epsilon(1e-3));
    CHECK(fit.ratio == doctest::Approx(57.5 / 26.0).epsilon(1e-3));
    CHECK(fit.ratio == doctest::Approx(2.21).epsilon(0.005));
}

TEST_CASE("linewidth fit: Dirac-like density recovers gamma within 1 percent") {
    const auto grid = make_grid(-150.0, 150.0, 61);
    SpectrumOptions opt;
    opt.support_span_mhz = 400.0;
    opt.spacing_mhz = 0.25;
    ThresholdSpectra spectra;
    for (int t : {40, 50, 60}) {
        const auto s = checkprobe_spectrum(grid, t, 39.0, 7.42, 0.0, opt);
        spectra[t] = {s.f_mhz, s.counts};
    }
    const auto fit = fit_checkprobe_linewidth(spectra, 26.0, 400.0);
    REQUIRE(fit.fit.converged);
    CHECK(std::abs(fit.fit.value("gamma") - 39.0) / 39.0 < 0.01);
}

TEST_CASE("linewidth fit: mismatched grids are rejected") {
    ThresholdSpectra spectra;
    spectra[1] = {make_grid(-100.0, 100.0, 11), std::vector<double>(11, 1.0)};
    spectra[2] = {make_grid(-90.0, 100.0, 11), std::vector<double>(11, 1.0)};
    spectra[3] = {make_grid(-100.0, 100.0, 11), std::vector<double>(11, 1.0)};
    CHECK_THROWS_AS(fit_checkprobe_linewidth(spectra, 26.0), std::invalid_argument);
}
