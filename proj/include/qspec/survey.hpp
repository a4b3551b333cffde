#pragma once

#include "qspec/optim.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qspec::survey {

/// One resonant-laser scan of a pillar. Frequency offsets in GHz,
/// ascending; count rates in kHz.
struct PleSpectrum {
    std::string pillar_id;
    std::vector<double> frequency_ghz;
    std::vector<double> rate_khz;
    void validate() const;
};

struct PlePeak {
    double center_ghz = 0.0, center_sigma_ghz = 0.0;
    double amplitude_khz = 0.0, amplitude_sigma_khz = 0.0;
    double fwhm_mhz = 0.0, fwhm_sigma_mhz = 0.0;
    double gaussian_sigma_mhz = 0.0; // Voigt Gaussian component
    double lorentz_hwhm_mhz = 0.0;   // Voigt Lorentzian component
};

/// 2D photoluminescence map. counts[row][col], one row per y value.
struct PlMap {
    std::vector<double> x_um;
    std::vector<double> y_um;
    std::vector<std::vector<double>> counts_khz;
    std::size_t baseline_row = 0;
    void validate() const;
};

struct DamageTable {
    std::vector<double> energy_uj;
    std::vector<int> exposed;
    std::vector<int> damaged;
    void validate() const;
};

/// Peak-normalized Voigt profile: amplitude at center, Gaussian sigma
/// and Lorentzian HWHM in the same units as f. Humlicek w4 rational
/// approximation of the Faddeeva function (relative error < 1e-4).
double voigt_profile(double f, double sigma_g, double gamma_l, double amplitude, double center);

/// Olivero-Longbothum FWHM approximation (0.02% accuracy).
double voigt_fwhm(double sigma_g, double gamma_l);

struct DetectionSettings {
    double min_fwhm_mhz = 50.0;
    double max_fwhm_mhz = 3000.0;
    double min_amplitude_khz = 0.03;
    double min_separation_ghz = 2.0;
    double prominence_sigmas = 3.0; // versus the robust noise estimate
    std::size_t median_window = 5;
};

struct DetectionResult {
    std::vector<PlePeak> peaks; // sorted by center
    std::vector<std::string> diagnostics;
};

/// Candidate peaks by prominence on a median-smoothed trace, each fit
/// with a Voigt profile on a local window; candidates violating the
/// width/amplitude/separation constraints are dropped (the weaker of
/// any pair closer than the separation limit goes first).
DetectionResult detect_ple_peaks(const PleSpectrum& spectrum, const DetectionSettings& settings = {});

struct PleSynthSettings {
    std::size_t n_pillars = 100;
    std::size_t points = 1201;
    double span_ghz = 60.0; // scan from -span/2 to +span/2
    int max_peaks = 3;
    double amplitude_lo_khz = 0.2, amplitude_hi_khz = 2.0;
    double fwhm_lo_mhz = 150.0, fwhm_hi_mhz = 800.0;
    double min_separation_ghz = 2.5;
    double noise_khz = 0.02;
    double baseline_khz = 0.05;
    double inhomogeneous_fwhm_ghz = 22.0; // center placement spread
};

struct PleCohort {
    std::vector<PleSpectrum> spectra;
    std::map<std::string, std::vector<PlePeak>> truth;
};

/// Randomized constraint-satisfying pillars (0..max_peaks Voigt peaks
/// each) with Gaussian read noise; the ground truth rides along for
/// precision/recall studies.
PleCohort synthesize_ple_cohort(const PleSynthSettings& settings, std::uint64_t seed);

struct OccurrenceStats {
    std::array<std::size_t, 4> histogram{}; // pillars with 0 / 1 / 2 / 3+ passing peaks
    std::size_t n_pillars = 0;
    double threshold_khz = 0.0;
    std::vector<double> exceedance_thresholds_khz; // ascending
    std::vector<std::size_t> exceedance_counts;    // peaks at or above each threshold
};

OccurrenceStats occurrence_stats(const std::map<std::string, std::vector<PlePeak>>& peaks_by_pillar,
                                 double amplitude_threshold_khz);

std::size_t exceedance_count(const std::map<std::string, std::vector<PlePeak>>& peaks_by_pillar,
                             double amplitude_threshold_khz);

struct InhomogeneousFit {
    optim::FitResult fit; // amplitude, center, fwhm
    double center_ghz = 0.0, center_sigma_ghz = 0.0;
    double fwhm_ghz = 0.0, fwhm_sigma_ghz = 0.0;
    double bin_width_ghz = 2.0;
    std::vector<double> bin_centers_ghz;
    std::vector<double> bin_counts;
};

/// Fixed-width histogram of peak centers fit to a Gaussian.
InhomogeneousFit inhomogeneous_fit(std::span<const double> centers_ghz, double bin_width_ghz = 2.0);

struct RescaledMaps {
    PlMap before;
    PlMap after;
    double beta_before = 1.0;
    double beta_after = 1.0;
};

/// Scale both maps to the geometric-mean baseline so the baseline-row
/// means coincide; the two factors multiply to one.
RescaledMaps rescale_pl_maps(const PlMap& before, const PlMap& after);

enum class DamageRegime { unresolvable, probabilistic, deterministic };

struct AmorphizationFit {
    optim::FitResult fit; // e50, slope
    double e50_uj = 0.0, e50_sigma = 0.0;
    double slope = 0.0, slope_sigma = 0.0;
    bool separable = false;    // slope pinned at its bound
    bool undamaged = false;    // no damage anywhere; no finite midpoint
    std::vector<DamageRegime> regimes; // per input energy
};

/// Binomial maximum-likelihood logistic fit of the damage fraction
/// (least squares on deviance residuals). Regime labels use 2.5% and
/// 97.5% predicted-fraction cuts.
AmorphizationFit amorphization_fit(const DamageTable& table);

const char* to_string(DamageRegime regime);

} // namespace qspec::survey
