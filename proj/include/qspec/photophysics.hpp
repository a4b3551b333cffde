#pragma once

#include "qspec/optim.hpp"
#include "qspec/rng.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace qspec::photophysics {

/// Spectral parameters of a single emitter. Canonical units: linewidths
/// in MHz, rates in 1/ms (diffusion rate in MHz linewidth-equivalents
/// per ms), counts per probe block.
struct EmitterModel {
    double gamma_mhz = 36.0;        // homogeneous FWHM
    double c0 = 5.0;                // on-resonance mean counts per probe block
    double gamma_d = 0.0;           // spectral diffusion rate
    double gamma_i = 0.0;           // ionization rate
    double f0_ghz = 0.0;            // center frequency offset
    double gamma_lifetime_mhz = 26.0;
    void validate() const;
};

/// One repetition of a check/probe pair. Negative delay means the
/// heralding block came second.
struct CheckProbeRecord {
    std::int64_t rep = 0;
    double delay_ms = 0.0;
    long check_counts = 0;
    long probe_counts = 0;
};

/// Angular far-field power profile, as produced by an external
/// electromagnetic solver. theta ascending in [0, pi/2].
struct FarFieldProfile {
    std::vector<double> theta_rad;
    std::vector<double> p_boundary;
    double p_tot = 0.0;
    void validate() const;
};

/// c0 * (G/2)^2 / (f^2 + (G/2)^2)
double lorentzian_response(double f_mhz, double gamma_mhz, double c0);

/// Normalized upper incomplete gamma Q(a, z) = Gamma(a, z) / Gamma(a),
/// series for z < a+1 and continued fraction otherwise.
double incomplete_gamma(double a, double z);

/// P(Poisson(mean) >= threshold) = 1 - Q(threshold, mean).
double heralding_probability(int threshold, double mean_counts);

/// Post-selected emitter-frequency density on a grid, under a uniform
/// prior over the grid span. truncation_fraction estimates how much of
/// the unbounded-prior mass falls outside the grid (power-law tail
/// extrapolation); consumers decide whether that matters for them.
struct HeraldedDensity {
    std::vector<double> f_mhz;
    std::vector<double> density;
    double truncation_fraction = 0.0;
};

HeraldedDensity heralded_spectral_density(std::span<const double> f_grid_mhz, int threshold,
                                          const EmitterModel& emitter, double f1_mhz);

struct SpectrumOptions {
    double support_span_mhz = 0.0; // 0: span of the output grid, at least 10*gamma
    double spacing_mhz = 0.0;      // 0: gamma/20
};

struct CheckProbeSpectrum {
    std::vector<double> f_mhz;
    std::vector<double> counts;
    double truncation_fraction = 0.0;
};

/// Expected probe counts versus probe detuning: convolution of the
/// heralded density (check laser at f1) with the Lorentzian response,
/// by direct summation on a uniform internal grid.
CheckProbeSpectrum checkprobe_spectrum(std::span<const double> f_grid_mhz, int threshold,
                                       double gamma_mhz, double c0, double f1_mhz,
                                       const SpectrumOptions& opt = {});

struct CheckProbeSpectrumMoments {
    std::vector<double> f_mhz;
    std::vector<double> mean;
    std::vector<double> rep_variance; // per-repetition probe-count variance E[lambda] + Var[lambda]
    double truncation_fraction = 0.0;
};

/// Mean and per-repetition variance of the post-selected probe counts,
/// from the first two moments of the Lorentzian response under the
/// heralded density.
CheckProbeSpectrumMoments checkprobe_spectrum_moments(std::span<const double> f_grid_mhz,
                                                      int threshold, double gamma_mhz, double c0,
                                                      double f1_mhz,
                                                      const SpectrumOptions& opt = {});

/// Distribution the emitter frequency is drawn from at each repetition.
struct PriorSpec {
    enum class Kind { dirac, uniform, gaussian };
    Kind kind = Kind::uniform;
    double center_mhz = 0.0;
    double halfspan_mhz = 200.0; // uniform
    double fwhm_mhz = 0.0;       // gaussian
    double draw(rng::Stream& stream) const;

    static PriorSpec dirac(double center);
    static PriorSpec uniform(double center, double halfspan);
    static PriorSpec gaussian(double center, double fwhm);
};

struct CheckProbeRun {
    std::vector<CheckProbeRecord> records;
    std::vector<double> emitter_freq_mhz; // per record; kept for oracle tests
    std::vector<double> probe_freq_mhz;   // per record
};

/// Zero-delay check/probe simulator. Per repetition the emitter
/// frequency is drawn from the prior and both blocks see it unchanged;
/// check counts are Poisson with the Lorentzian mean at the check laser
/// f1. With probe_grid empty the probe laser also sits at f1, otherwise
/// repetition r probes at probe_grid[r % size] (threshold-swept PLE).
/// Reproducible per seed; repetitions use independent substreams.
CheckProbeRun simulate_check_probe(const EmitterModel& emitter, double f1_mhz,
                                   std::size_t block_pairs, const PriorSpec& prior,
                                   std::uint64_t seed,
                                   std::span<const double> probe_grid_mhz = {});

/// Mean counts at signed delay t: 1/(1 + gamma_d*t/gamma) decay with an
/// ionization factor exp(-gamma_i*t) on the positive side.
double no_recapture_model(double t_ms, double gamma_d, double gamma_i, double gamma_mhz,
                          double c0);
double diffusion_only_model(double t_ms, double gamma_d, double gamma_mhz, double c0);

/// Synthetic delay-scan records, Poisson-sampled from the analytic mean
/// curve; the heralding side sits on resonance at c0. Uses the emitter's
/// gamma_d/gamma_i fields.
std::vector<CheckProbeRecord> simulate_diffusion_records(const EmitterModel& emitter,
                                                         std::span<const double> delays_ms,
                                                         std::size_t reps_per_delay,
                                                         std::uint64_t seed);

enum class DiffusionModel { no_recapture, diffusion_only };

struct DiffusionFit {
    optim::FitResult fit;   // gamma_d, gamma_i (no_recapture only), c0
    double gamma_d = 0.0;   // at the assumed homogeneous linewidth
    double gamma_d_sigma = 0.0;
    double gamma_i = 0.0;
    double gamma_i_sigma = 0.0;
    double band_low = 0.0;  // gamma_d rescaled over the linewidth band
    double band_high = 0.0;
    std::vector<double> delay_ms; // post-selected binned curve
    std::vector<double> mean_counts;
    std::vector<double> sem_counts;
    std::vector<std::size_t> n_used;
};

/// Post-select records on the heralding block (check for t >= 0, probe
/// for t < 0), bin mean counterpart counts by delay and fit the chosen
/// model at a fixed assumed linewidth. The band rescales gamma_d over
/// ratio_band multiples of gamma_lifetime.
DiffusionFit fit_spectral_diffusion(std::span<const CheckProbeRecord> records, int threshold,
                                    DiffusionModel model, double gamma_assumed_mhz,
                                    double gamma_lifetime_mhz,
                                    std::pair<double, double> ratio_band = {1.0, 3.0});

/// threshold -> (frequency grid, mean probe counts)
using ThresholdSpectra = std::map<int, std::pair<std::vector<double>, std::vector<double>>>;

struct ThresholdSpectraSet {
    ThresholdSpectra means;
    ThresholdSpectra sems;      // standard error of each bin mean; NaN when n < 2
    ThresholdSpectra occupancy; // repetitions entering each bin
};

ThresholdSpectraSet build_threshold_spectra_set(const CheckProbeRun& run,
                                                std::span<const double> probe_grid_mhz,
                                                std::span<const int> thresholds);

ThresholdSpectra build_threshold_spectra(const CheckProbeRun& run,
                                         std::span<const double> probe_grid_mhz,
                                         std::span<const int> thresholds);

struct LinewidthFit {
    optim::FitResult fit; // gamma, c0, f1
    double ratio = 0.0;   // gamma / gamma_lifetime
    double ratio_sigma = 0.0;
    double truncation_fraction = 0.0;
};

/// Single global (gamma, c0, f1) fit across all thresholds. With bin
/// occupancies supplied the fit iterates inverse-variance weighting
/// using model-based per-repetition variances (the threshold blocks
/// have wildly different occupancies after post-selection, and weights
/// estimated from the data themselves bias the fit).
LinewidthFit fit_checkprobe_linewidth(const ThresholdSpectra& spectra,
                                      double gamma_lifetime_mhz,
                                      double support_span_mhz = 0.0,
                                      const ThresholdSpectra* occupancy = nullptr);

struct SaturationFit {
    optim::FitResult fit; // A, B, p_sat
    double rho = 0.0;     // signal fraction at saturation power
    double rho_sigma = 0.0;
    bool background_only = false;
};

/// Saturation curve B*p + A*p/(p + p_sat); rho compares the defect
/// signal A/2 against the background B*p_sat at the saturation power.
SaturationFit saturation_fit(std::span<const double> power_uw, std::span<const double> rate_khz);

/// Fraction of emitted power collected inside the aperture: trapezoid
/// integral of p_boundary up to asin(na), over p_tot.
double collection_efficiency(const FarFieldProfile& profile, double na);

} // namespace qspec::photophysics
