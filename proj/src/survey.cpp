#include "qspec/survey.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qspec/rng.hpp"
#include <stdexcept>

namespace qspec::survey {

void PleSpectrum::validate() const {
    if (frequency_ghz.size() != rate_khz.size() || frequency_ghz.size() < 8)
        throw std::invalid_argument("PleSpectrum: need >= 8 matching samples");
    for (std::size_t i = 1; i < frequency_ghz.size(); ++i)
        if (!(frequency_ghz[i] > frequency_ghz[i - 1]))
            throw std::invalid_argument("PleSpectrum: frequency grid must ascend");
    for (double r : rate_khz)
        if (r < 0.0) throw std::invalid_argument("PleSpectrum: negative count rate");
}

void PlMap::validate() const {
    if (counts_khz.empty() || counts_khz.front().empty())
        throw std::invalid_argument("PlMap: empty map");
    if (y_um.size() != counts_khz.size())
        throw std::invalid_argument("PlMap: y axis length mismatch");
    for (const auto& row : counts_khz) {
        if (row.size() != x_um.size()) throw std::invalid_argument("PlMap: ragged rows");
        for (double v : row)
            if (v < 0.0) throw std::invalid_argument("PlMap: negative counts");
    }
    if (baseline_row >= counts_khz.size())
        throw std::invalid_argument("PlMap: baseline row out of range");
}

void DamageTable::validate() const {
    if (energy_uj.size() != exposed.size() || energy_uj.size() != damaged.size())
        throw std::invalid_argument("DamageTable: column length mismatch");
    if (energy_uj.size() < 4) throw std::invalid_argument("DamageTable: need >= 4 energies");
    for (std::size_t i = 0; i < energy_uj.size(); ++i) {
        if (exposed[i] <= 0) throw std::invalid_argument("DamageTable: exposed must be > 0");
        if (damaged[i] < 0 || damaged[i] > exposed[i])
            throw std::invalid_argument("DamageTable: damaged outside [0, exposed]");
        if (i > 0 && !(energy_uj[i] > energy_uj[i - 1]))
            throw std::invalid_argument("DamageTable: energies must ascend");
    }
}

namespace {

std::vector<double> median_filter(std::span<const double> v, std::size_t window) {
    if (window < 3) return {v.begin(), v.end()};
    const std::size_t half = window / 2;
    std::vector<double> out(v.size());
    std::vector<double> buf;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(v.size(), i + half + 1);
        buf.assign(v.begin() + static_cast<std::ptrdiff_t>(lo),
                   v.begin() + static_cast<std::ptrdiff_t>(hi));
        std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2),
                         buf.end());
        out[i] = buf[buf.size() / 2];
    }
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

// MAD-based noise estimate of the raw-minus-smoothed residual. Count
// rates clamp at zero, which deflates the MAD on empty spectra, so the
// upper-quantile spread acts as a floor.
double robust_noise(std::span<const double> raw, std::span<const double> smooth) {
    std::vector<double> res(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) res[i] = raw[i] - smooth[i];
    std::sort(res.begin(), res.end());
    const double med = res[res.size() / 2];
    const double q84 = res[static_cast<std::size_t>(0.8413 * static_cast<double>(res.size() - 1))];
    std::vector<double> dev(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) dev[i] = std::abs(res[i] - med);
    return std::max(1.4826 * median_of(dev), q84 - med);
}

struct Candidate {
    std::size_t index;
    double prominence;
};

// Prominence with the base walk bounded to +-walk_pts around the peak,
// so a long noisy floor does not inflate small bumps.
std::vector<Candidate> prominent_maxima(std::span<const double> y, double min_prominence,
                                        std::size_t walk_pts) {
    std::vector<Candidate> out;
    const std::size_t n = y.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        const double h = y[i];
        double left_min = h, right_min = h;
        const std::size_t lo = i > walk_pts ? i - walk_pts : 0;
        const std::size_t hi = std::min(n, i + walk_pts + 1);
        for (std::size_t j = i; j-- > lo;) {
            if (y[j] > h) break;
            left_min = std::min(left_min, y[j]);
        }
        for (std::size_t j = i + 1; j < hi; ++j) {
            if (y[j] > h) break;
            right_min = std::min(right_min, y[j]);
        }
        const double prom = h - std::max(left_min, right_min);
        if (prom > min_prominence) out.push_back({i, prom});
    }
    std::sort(out.begin(), out.end(),
              [](const Candidate& a, const Candidate& b) { return a.prominence > b.prominence; });
    return out;
}

} // namespace

DetectionResult detect_ple_peaks(const PleSpectrum& spectrum, const DetectionSettings& settings) {
    spectrum.validate();
    const auto& f = spectrum.frequency_ghz;
    const auto& raw = spectrum.rate_khz;
    if (f.back() - f.front() < 20.0)
        throw std::invalid_argument("detect_ple_peaks: scan must cover >= 20 GHz");

    DetectionResult result;
    const std::vector<double> smooth = median_filter(raw, settings.median_window);
    const double noise = robust_noise(raw, smooth);
    const double min_prom = std::max(settings.prominence_sigmas * noise, 1e-12);
    const double step_ghz = (f.back() - f.front()) / static_cast<double>(f.size() - 1);
    const auto walk_pts =
        static_cast<std::size_t>(std::ceil(2.0 * settings.min_separation_ghz / step_ghz));
    const auto candidates = prominent_maxima(smooth, min_prom, walk_pts);

    struct Fitted {
        PlePeak peak;
        double window_lo, window_hi;
    };
    std::vector<Fitted> fitted;

    for (const auto& cand : candidates) {
        const std::size_t ci = cand.index;
        const double height = smooth[ci];
        const double base_guess = median_of({smooth.begin(), smooth.end()});
        const double half = base_guess + 0.5 * (height - base_guess);

        std::size_t lo = ci, hi = ci;
        while (lo > 0 && smooth[lo] > half) --lo;
        while (hi + 1 < smooth.size() && smooth[hi] > half) ++hi;
        const double rough_fwhm = std::max(f[hi] - f[lo], f[1] - f[0]);

        const double w_lo = f[ci] - std::max(3.0 * rough_fwhm, 1.0);
        const double w_hi = f[ci] + std::max(3.0 * rough_fwhm, 1.0);
        std::vector<double> wx, wy;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] >= w_lo && f[i] <= w_hi) {
                wx.push_back(f[i]);
                wy.push_back(raw[i]);
            }
        if (wx.size() < 8) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: window too small, dropped");
            continue;
        }

        const double b0 = *std::min_element(wy.begin(), wy.end());
        std::vector<optim::ParamSpec> specs = {
            {"b", b0, 0.0, optim::kInf, false},
            {"amp", std::max(height - b0, 1e-4), 0.0, optim::kInf, false},
            {"center", f[ci], wx.front(), wx.back(), false},
            {"sigma_g", std::max(0.3 * rough_fwhm, 1e-3), 1e-4, 5.0, false},
            {"gamma_l", std::max(0.25 * rough_fwhm, 1e-3), 1e-4, 5.0, false},
        };
        const auto model = [](std::span<const double> p, double x) {
            return p[0] + voigt_profile(x, p[3], p[4], p[1], p[2]);
        };

        optim::FitResult fit;
        try {
            fit = optim::fit_least_squares(model, specs, wx, wy);
        } catch (const std::exception& e) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: fit failed (" + e.what() + "), dropped");
            continue;
        }

        PlePeak peak;
        peak.center_ghz = fit.value("center");
        peak.center_sigma_ghz = fit.sigma("center");
        peak.amplitude_khz = fit.value("amp");
        peak.amplitude_sigma_khz = fit.sigma("amp");
        peak.gaussian_sigma_mhz = fit.value("sigma_g") * 1e3;
        peak.lorentz_hwhm_mhz = fit.value("gamma_l") * 1e3;
        peak.fwhm_mhz = voigt_fwhm(peak.gaussian_sigma_mhz, peak.lorentz_hwhm_mhz);
        {
            // delta method through the (sigma_g, gamma_l) covariance
            const double fl = 2.0 * peak.lorentz_hwhm_mhz;
            const double fg = 2.3548200450309493 * peak.gaussian_sigma_mhz;
            const double s = std::sqrt(0.2166 * fl * fl + fg * fg);
            const double dgam = 2.0 * (0.5346 + (s > 0.0 ? 0.2166 * fl / s : 0.0));
            const double dsig = 2.3548200450309493 * (s > 0.0 ? fg / s : 1.0);
            const auto is = fit.index("sigma_g");
            const auto ig = fit.index("gamma_l");
            const double var =
                dsig * dsig * fit.covariance(is, is) * 1e6 +
                dgam * dgam * fit.covariance(ig, ig) * 1e6 +
                2.0 * dsig * dgam * fit.covariance(is, ig) * 1e6;
            peak.fwhm_sigma_mhz = std::sqrt(std::max(0.0, var));
        }

        if (peak.center_ghz <= wx.front() || peak.center_ghz >= wx.back()) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: center ran to the window edge, dropped");
            continue;
        }
        if (!(peak.fwhm_mhz > settings.min_fwhm_mhz && peak.fwhm_mhz < settings.max_fwhm_mhz)) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: FWHM outside limits, dropped");
            continue;
        }
        if (peak.amplitude_khz < settings.min_amplitude_khz) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: amplitude below floor, dropped");
            continue;
        }
        if (peak.amplitude_khz < settings.prominence_sigmas * noise) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: amplitude within the noise band, dropped");
            continue;
        }
        if (!(peak.amplitude_khz >= 5.0 * peak.amplitude_sigma_khz)) {
            result.diagnostics.push_back("candidate at " + std::to_string(f[ci]) +
                                         " GHz: amplitude not significant, dropped");
            continue;
        }
        fitted.push_back({peak, w_lo, w_hi});
    }

    // keep the stronger of any pair closer than the separation limit
    std::sort(fitted.begin(), fitted.end(), [](const Fitted& a, const Fitted& b) {
        return a.peak.amplitude_khz > b.peak.amplitude_khz;
    });
    for (const auto& cand : fitted) {
        bool clash = false;
        for (const auto& kept : result.peaks)
            if (std::abs(kept.center_ghz - cand.peak.center_ghz) <= settings.min_separation_ghz) {
                clash = true;
                break;
            }
        if (clash)
            result.diagnostics.push_back("peak at " + std::to_string(cand.peak.center_ghz) +
                                         " GHz: closer than the separation limit to a stronger "
                                         "peak, dropped");
        else
            result.peaks.push_back(cand.peak);
    }
    std::sort(result.peaks.begin(), result.peaks.end(),
              [](const PlePeak& a, const PlePeak& b) { return a.center_ghz < b.center_ghz; });
    return result;
}

PleCohort synthesize_ple_cohort(const PleSynthSettings& st, std::uint64_t seed) {
    if (st.n_pillars < 1 || st.points < 16 || !(st.span_ghz > 20.0))
        throw std::invalid_argument("synthesize_ple_cohort: bad settings");
    PleCohort cohort;
    const double half = 0.5 * st.span_ghz;
    for (std::size_t pi = 0; pi < st.n_pillars; ++pi) {
        rng::Stream gen(seed, "ple_cohort", pi);
        PleSpectrum s;
        s.pillar_id = "pillar" + std::to_string(pi);
        s.frequency_ghz.resize(st.points);
        for (std::size_t i = 0; i < st.points; ++i)
            s.frequency_ghz[i] =
                -half + st.span_ghz * static_cast<double>(i) / static_cast<double>(st.points - 1);

        std::vector<PlePeak> truth;
        const int n_peaks = static_cast<int>(gen.uniform() * (st.max_peaks + 1));
        const double sigma_c = st.inhomogeneous_fwhm_ghz / 2.3548200450309493;
        for (int k = 0; k < n_peaks; ++k) {
            double center = 0.0;
            bool placed = false;
            for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
                center = std::clamp(gen.normal(0.0, sigma_c), -half + 2.0, half - 2.0);
                placed = true;
                for (const auto& prev : truth)
                    if (std::abs(prev.center_ghz - center) < st.min_separation_ghz) placed = false;
            }
            if (!placed) continue;
            PlePeak p;
            p.center_ghz = center;
            p.amplitude_khz = gen.uniform(st.amplitude_lo_khz, st.amplitude_hi_khz);
            p.fwhm_mhz = gen.uniform(st.fwhm_lo_mhz, st.fwhm_hi_mhz);
            // split the width between the Voigt components
            const double frac = gen.uniform(0.2, 0.8);
            p.gaussian_sigma_mhz = frac * p.fwhm_mhz / 2.3548200450309493;
            p.lorentz_hwhm_mhz = 0.5 * (1.0 - frac) * p.fwhm_mhz;
            p.fwhm_mhz = voigt_fwhm(p.gaussian_sigma_mhz, p.lorentz_hwhm_mhz);
            truth.push_back(p);
        }
        std::sort(truth.begin(), truth.end(),
                  [](const PlePeak& a, const PlePeak& b) { return a.center_ghz < b.center_ghz; });

        s.rate_khz.resize(st.points);
        for (std::size_t i = 0; i < st.points; ++i) {
            double v = st.baseline_khz;
            for (const auto& p : truth)
                v += voigt_profile(s.frequency_ghz[i], p.gaussian_sigma_mhz * 1e-3,
                                   p.lorentz_hwhm_mhz * 1e-3, p.amplitude_khz, p.center_ghz);
            if (st.noise_khz > 0.0) v += st.noise_khz * gen.normal();
            s.rate_khz[i] = std::max(v, 0.0);
        }
        cohort.truth[s.pillar_id] = std::move(truth);
        cohort.spectra.push_back(std::move(s));
    }
    return cohort;
}

std::size_t exceedance_count(const std::map<std::string, std::vector<PlePeak>>& peaks_by_pillar,
                             double amplitude_threshold_khz) {
    std::size_t n = 0;
    for (const auto& [id, peaks] : peaks_by_pillar)
        for (const auto& p : peaks)
            if (p.amplitude_khz >= amplitude_threshold_khz) ++n;
    return n;
}

OccurrenceStats occurrence_stats(const std::map<std::string, std::vector<PlePeak>>& peaks_by_pillar,
                                 double amplitude_threshold_khz) {
    if (amplitude_threshold_khz < 0.0)
        throw std::invalid_argument("occurrence_stats: threshold must be >= 0");
    OccurrenceStats out;
    out.threshold_khz = amplitude_threshold_khz;
    out.n_pillars = peaks_by_pillar.size();
    std::vector<double> amplitudes;
    for (const auto& [id, peaks] : peaks_by_pillar) {
        std::size_t passing = 0;
        for (const auto& p : peaks) {
            amplitudes.push_back(p.amplitude_khz);
            if (p.amplitude_khz >= amplitude_threshold_khz) ++passing;
        }
        out.histogram[std::min<std::size_t>(passing, 3)] += 1;
    }
    std::sort(amplitudes.begin(), amplitudes.end());
    amplitudes.erase(std::unique(amplitudes.begin(), amplitudes.end()), amplitudes.end());
    out.exceedance_thresholds_khz = amplitudes;
    out.exceedance_counts.reserve(amplitudes.size());
    for (double thr : amplitudes)
        out.exceedance_counts.push_back(exceedance_count(peaks_by_pillar, thr));
    return out;
}

InhomogeneousFit inhomogeneous_fit(std::span<const double> centers_ghz, double bin_width_ghz) {
    if (centers_ghz.size() < 10)
        throw std::invalid_argument("inhomogeneous_fit: need >= 10 peak centers");
    if (!(bin_width_ghz > 0.0))
        throw std::invalid_argument("inhomogeneous_fit: bin width must be > 0");

    const auto [mn, mx] = std::minmax_element(centers_ghz.begin(), centers_ghz.end());
    if (*mx - *mn <= 0.0)
        throw std::invalid_argument("inhomogeneous_fit: degenerate distribution (all centers equal)");

    const double lo = std::floor(*mn / bin_width_ghz) * bin_width_ghz;
    const std::size_t nbins =
        static_cast<std::size_t>(std::floor((*mx - lo) / bin_width_ghz)) + 1;

    InhomogeneousFit out;
    out.bin_width_ghz = bin_width_ghz;
    out.bin_centers_ghz.resize(nbins);
    out.bin_counts.assign(nbins, 0.0);
    for (std::size_t i = 0; i < nbins; ++i)
        out.bin_centers_ghz[i] = lo + (static_cast<double>(i) + 0.5) * bin_width_ghz;
    for (double c : centers_ghz) {
        auto k = static_cast<std::size_t>(std::floor((c - lo) / bin_width_ghz));
        k = std::min(k, nbins - 1);
        out.bin_counts[k] += 1.0;
    }
    std::size_t occupied = 0;
    for (double c : out.bin_counts)
        if (c > 0.0) ++occupied;
    if (occupied < 4)
        throw std::invalid_argument("inhomogeneous_fit: too few occupied bins; reduce bin width");

    double mean = 0.0;
    for (double c : centers_ghz) mean += c;
    mean /= static_cast<double>(centers_ghz.size());
    double var = 0.0;
    for (double c : centers_ghz) var += (c - mean) * (c - mean);
    var /= static_cast<double>(centers_ghz.size() - 1);
    const double fwhm0 = 2.3548200450309493 * std::sqrt(var);
    const double amp0 = *std::max_element(out.bin_counts.begin(), out.bin_counts.end());

    std::vector<optim::ParamSpec> specs = {
        {"amplitude", amp0, 0.0, optim::kInf, false},
        {"center", mean, *mn - fwhm0, *mx + fwhm0, false},
        {"fwhm", std::max(fwhm0, bin_width_ghz), 0.1 * bin_width_ghz, optim::kInf, false},
    };
    const auto model = [](std::span<const double> p, double x) {
        const double sig = p[2] / 2.3548200450309493;
        const double d = (x - p[1]) / sig;
        return p[0] * std::exp(-0.5 * d * d);
    };
    out.fit = optim::fit_least_squares(model, specs, out.bin_centers_ghz, out.bin_counts);
    out.center_ghz = out.fit.value("center");
    out.center_sigma_ghz = out.fit.sigma("center");
    out.fwhm_ghz = out.fit.value("fwhm");
    out.fwhm_sigma_ghz = out.fit.sigma("fwhm");
    return out;
}

namespace {

double baseline_mean(const PlMap& map) {
    const auto& row = map.counts_khz[map.baseline_row];
    double s = 0.0;
    for (double v : row) s += v;
    return s / static_cast<double>(row.size());
}

} // namespace

RescaledMaps rescale_pl_maps(const PlMap& before, const PlMap& after) {
    before.validate();
    after.validate();
    const double mu_before = baseline_mean(before);
    const double mu_after = baseline_mean(after);
    if (!(mu_before > 0.0) || !(mu_after > 0.0))
        throw std::invalid_argument("rescale_pl_maps: baseline means must be > 0");

    const double alpha = std::sqrt(mu_before * mu_after);
    RescaledMaps out;
    out.beta_before = alpha / mu_before;
    out.beta_after = alpha / mu_after;
    out.before = before;
    out.after = after;
    for (auto& row : out.before.counts_khz)
        for (double& v : row) v *= out.beta_before;
    for (auto& row : out.after.counts_khz)
        for (double& v : row) v *= out.beta_after;
    return out;
}

const char* to_string(DamageRegime regime) {
    switch (regime) {
        case DamageRegime::unresolvable: return "unresolvable";
        case DamageRegime::probabilistic: return "probabilistic";
        case DamageRegime::deterministic: return "deterministic";
    }
    return "?";
}

AmorphizationFit amorphization_fit(const DamageTable& table) {
    table.validate();
    const std::size_t n = table.energy_uj.size();

    AmorphizationFit out;
    long total_damaged = 0, total_intact = 0;
    for (std::size_t i = 0; i < n; ++i) {
        total_damaged += table.damaged[i];
        total_intact += table.exposed[i] - table.damaged[i];
    }
    if (total_damaged == 0 || total_intact == 0) {
        out.undamaged = total_damaged == 0;
        out.e50_uj = std::numeric_limits<double>::quiet_NaN();
        out.e50_sigma = std::numeric_limits<double>::quiet_NaN();
        out.regimes.assign(n, out.undamaged ? DamageRegime::unresolvable
                                            : DamageRegime::deterministic);
        out.fit.converged = false;
        return out;
    }

    const double e_min = table.energy_uj.front();
    const double e_max = table.energy_uj.back();
    const double range = e_max - e_min;
    constexpr double kSlopeMax = 2000.0; // 1/uJ

    // Completely separated data: the likelihood is flat in the midpoint
    // over the gap and unbounded in the slope. Report the gap center
    // with the slope pinned at its bound.
    bool any_intermediate = false;
    double last_intact = -std::numeric_limits<double>::infinity();
    double first_damaged = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (table.damaged[i] > 0 && table.damaged[i] < table.exposed[i]) any_intermediate = true;
        if (table.damaged[i] == 0) last_intact = std::max(last_intact, table.energy_uj[i]);
        if (table.damaged[i] == table.exposed[i])
            first_damaged = std::min(first_damaged, table.energy_uj[i]);
    }
    if (!any_intermediate && last_intact < first_damaged) {
        out.separable = true;
        out.e50_uj = 0.5 * (last_intact + first_damaged);
        out.e50_sigma = 0.25 * (first_damaged - last_intact);
        out.slope = kSlopeMax;
        out.slope_sigma = std::numeric_limits<double>::infinity();
        out.fit.names = {"e50", "slope"};
        out.fit.values = {out.e50_uj, out.slope};
        out.fit.sigmas = {out.e50_sigma, out.slope_sigma};
        out.fit.covariance = Eigen::MatrixXd::Zero(2, 2);
        out.fit.n_points = n;
        out.fit.converged = true;
        out.regimes.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            out.regimes[i] = table.energy_uj[i] <= last_intact ? DamageRegime::unresolvable
                                                               : DamageRegime::deterministic;
        return out;
    }

    double e_lo = e_min, e_hi = e_max;
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(table.damaged[i]) / table.exposed[i];
        if (frac < 0.5) e_lo = table.energy_uj[i];
    }
    for (std::size_t i = n; i-- > 0;) {
        const double frac = static_cast<double>(table.damaged[i]) / table.exposed[i];
        if (frac >= 0.5) e_hi = table.energy_uj[i];
    }
    const double e50_init = 0.5 * (e_lo + e_hi);
    const double slope_init = e_hi > e_lo ? 8.0 / (e_hi - e_lo) : 200.0;

    std::vector<optim::ParamSpec> specs = {
        {"e50", e50_init, e_min - range, e_max + range, false},
        {"slope", std::min(slope_init, 0.5 * kSlopeMax), 1e-3, kSlopeMax, false},
    };

    // least squares on binomial deviance residuals == maximum likelihood
    const auto model = [&table](std::span<const double> p, double xi) {
        const auto i = static_cast<std::size_t>(xi);
        const double nn = static_cast<double>(table.exposed[i]);
        const double k = static_cast<double>(table.damaged[i]);
        double prob = 1.0 / (1.0 + std::exp(-p[1] * (table.energy_uj[i] - p[0])));
        prob = std::clamp(prob, 1e-12, 1.0 - 1e-12);
        double dev = 0.0;
        if (k > 0.0) dev += k * std::log(k / (nn * prob));
        if (k < nn) dev += (nn - k) * std::log((nn - k) / (nn * (1.0 - prob)));
        dev = std::max(dev, 0.0);
        const double sign = k / nn >= prob ? 1.0 : -1.0;
        return sign * std::sqrt(2.0 * dev);
    };
    std::vector<double> xs(n), ys(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) xs[i] = static_cast<double>(i);

    out.fit = optim::fit_least_squares(model, specs, xs, ys);
    out.e50_uj = out.fit.value("e50");
    out.e50_sigma = out.fit.sigma("e50");
    out.slope = out.fit.value("slope");
    out.slope_sigma = out.fit.sigma("slope");
    // quasi-separation: only extreme fractions constrain the slope, so
    // the normal matrix degenerates or the slope runs to its bound
    out.separable = out.slope >= 0.98 * kSlopeMax || out.fit.singular;

    out.regimes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double prob =
            1.0 / (1.0 + std::exp(-out.slope * (table.energy_uj[i] - out.e50_uj)));
        out.regimes[i] = prob < 0.025 ? DamageRegime::unresolvable
                         : prob > 0.975 ? DamageRegime::deterministic
                                        : DamageRegime::probabilistic;
    }
    return out;
}

} // namespace qspec::survey
