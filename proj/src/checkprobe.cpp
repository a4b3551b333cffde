#include "qspec/photophysics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qspec::photophysics {

PriorSpec PriorSpec::dirac(double center) {
    PriorSpec p;
    p.kind = Kind::dirac;
    p.center_mhz = center;
    return p;
}

PriorSpec PriorSpec::uniform(double center, double halfspan) {
    PriorSpec p;
    p.kind = Kind::uniform;
    p.center_mhz = center;
    p.halfspan_mhz = halfspan;
    return p;
}

PriorSpec PriorSpec::gaussian(double center, double fwhm) {
    PriorSpec p;
    p.kind = Kind::gaussian;
    p.center_mhz = center;
    p.fwhm_mhz = fwhm;
    return p;
}

double PriorSpec::draw(rng::Stream& stream) const {
    switch (kind) {
        case Kind::dirac: return center_mhz;
        case Kind::uniform: return stream.uniform(center_mhz - halfspan_mhz, center_mhz + halfspan_mhz);
        case Kind::gaussian: return stream.normal(center_mhz, fwhm_mhz / 2.3548200450309493);
    }
    throw std::logic_error("PriorSpec: bad kind");
}

CheckProbeRun simulate_check_probe(const EmitterModel& emitter, double f1_mhz,
                                   std::size_t block_pairs, const PriorSpec& prior,
                                   std::uint64_t seed, std::span<const double> probe_grid_mhz) {
    if (block_pairs < 1) throw std::invalid_argument("simulate_check_probe: block_pairs >= 1");
    if (!(emitter.c0 >= 0.0) || !(emitter.gamma_mhz > 0.0))
        throw std::invalid_argument("simulate_check_probe: invalid emitter");

    CheckProbeRun run;
    run.records.resize(block_pairs);
    run.emitter_freq_mhz.resize(block_pairs);
    run.probe_freq_mhz.resize(block_pairs);

    for (std::size_t r = 0; r < block_pairs; ++r) {
        rng::Stream stream(seed, "check_probe", r);
        const double fe = prior.draw(stream);
        const double fp = probe_grid_mhz.empty()
                              ? f1_mhz
                              : probe_grid_mhz[r % probe_grid_mhz.size()];
        const double lam_check = lorentzian_response(fe - f1_mhz, emitter.gamma_mhz, emitter.c0);
        const double lam_probe = lorentzian_response(fe - fp, emitter.gamma_mhz, emitter.c0);
        auto& rec = run.records[r];
        rec.rep = static_cast<std::int64_t>(r);
        rec.delay_ms = 0.0;
        rec.check_counts = stream.poisson(lam_check);
        rec.probe_counts = stream.poisson(lam_probe);
        run.emitter_freq_mhz[r] = fe;
        run.probe_freq_mhz[r] = fp;
    }
    return run;
}

std::vector<CheckProbeRecord> simulate_diffusion_records(const EmitterModel& emitter,
                                                         std::span<const double> delays_ms,
                                                         std::size_t reps_per_delay,
                                                         std::uint64_t seed) {
    emitter.validate();
    if (delays_ms.empty() || reps_per_delay < 1)
        throw std::invalid_argument("simulate_diffusion_records: empty plan");
    std::vector<CheckProbeRecord> records;
    records.reserve(delays_ms.size() * reps_per_delay);
    std::int64_t rep = 0;
    for (const double t : delays_ms) {
        const double mean =
            no_recapture_model(t, emitter.gamma_d, emitter.gamma_i, emitter.gamma_mhz, emitter.c0);
        for (std::size_t k = 0; k < reps_per_delay; ++k) {
            rng::Stream stream(seed, "diffusion_records", static_cast<std::uint64_t>(rep));
            CheckProbeRecord rec;
            rec.rep = rep++;
            rec.delay_ms = t;
            if (t >= 0.0) {
                rec.check_counts = stream.poisson(emitter.c0);
                rec.probe_counts = stream.poisson(mean);
            } else {
                rec.probe_counts = stream.poisson(emitter.c0);
                rec.check_counts = stream.poisson(mean);
            }
            records.push_back(rec);
        }
    }
    return records;
}

DiffusionFit fit_spectral_diffusion(std::span<const CheckProbeRecord> records, int threshold,
                                    DiffusionModel model, double gamma_assumed_mhz,
                                    double gamma_lifetime_mhz,
                                    std::pair<double, double> ratio_band) {
    if (threshold < 1) throw std::invalid_argument("fit_spectral_diffusion: threshold >= 1");
    if (!(gamma_assumed_mhz > 0.0) || !(gamma_lifetime_mhz > 0.0))
        throw std::invalid_argument("fit_spectral_diffusion: linewidths must be > 0");

    bool has_pos = false, has_neg = false;
    struct Bin {
        double sum = 0.0, sum2 = 0.0;
        std::size_t n = 0;
    };
    std::map<double, Bin> bins;
    for (const auto& rec : records) {
        if (rec.delay_ms >= 0.0)
            has_pos = true;
        else
            has_neg = true;
        // herald on the earlier block, average the later one (and the
        // mirror image for negative delays)
        const long herald = rec.delay_ms >= 0.0 ? rec.check_counts : rec.probe_counts;
        const long counted = rec.delay_ms >= 0.0 ? rec.probe_counts : rec.check_counts;
        if (herald < threshold) continue;
        auto& b = bins[rec.delay_ms];
        b.sum += static_cast<double>(counted);
        b.sum2 += static_cast<double>(counted) * static_cast<double>(counted);
        b.n += 1;
    }
    if (!has_pos || !has_neg)
        throw std::invalid_argument("fit_spectral_diffusion: records must contain both delay signs");

    DiffusionFit out;
    for (const auto& [delay, b] : bins) {
        if (b.n < 2) continue;
        const double mean = b.sum / static_cast<double>(b.n);
        const double var = std::max(0.0, (b.sum2 - b.sum * mean) / static_cast<double>(b.n - 1));
        out.delay_ms.push_back(delay);
        out.mean_counts.push_back(mean);
        out.sem_counts.push_back(std::max(std::sqrt(var / static_cast<double>(b.n)), 1e-9));
        out.n_used.push_back(b.n);
    }
    if (out.delay_ms.size() < 5)
        throw std::invalid_argument("fit_spectral_diffusion: fewer than 5 delay bins pass the threshold");

    const double c0_init = *std::max_element(out.mean_counts.begin(), out.mean_counts.end());
    const double t_span = std::max(std::abs(out.delay_ms.front()), std::abs(out.delay_ms.back()));
    const bool with_ion = model == DiffusionModel::no_recapture;

    std::vector<optim::ParamSpec> specs = {
        {"gamma_d", gamma_assumed_mhz / std::max(t_span, 1e-6), 0.0, optim::kInf, false},
        {"gamma_i", with_ion ? 0.01 : 0.0, 0.0, optim::kInf, !with_ion},
        {"c0", std::max(c0_init, 1e-6), 1e-12, optim::kInf, false},
    };
    const double gamma = gamma_assumed_mhz;
    const auto fn = [gamma](std::span<const double> p, double t) {
        return no_recapture_model(t, p[0], p[1], gamma, p[2]);
    };
    out.fit = optim::fit_least_squares(fn, specs, out.delay_ms, out.mean_counts, out.sem_counts);

    out.gamma_d = out.fit.value("gamma_d");
    out.gamma_d_sigma = out.fit.sigma("gamma_d");
    out.gamma_i = out.fit.value("gamma_i");
    out.gamma_i_sigma = out.fit.sigma("gamma_i");
    // gamma_d scales linearly with the assumed homogeneous linewidth
    out.band_low = out.gamma_d * ratio_band.first * gamma_lifetime_mhz / gamma_assumed_mhz;
    out.band_high = out.gamma_d * ratio_band.second * gamma_lifetime_mhz / gamma_assumed_mhz;
    return out;
}

ThresholdSpectraSet build_threshold_spectra_set(const CheckProbeRun& run,
                                                std::span<const double> probe_grid_mhz,
                                                std::span<const int> thresholds) {
    if (probe_grid_mhz.empty()) throw std::invalid_argument("build_threshold_spectra: empty grid");
    const std::size_t npts = probe_grid_mhz.size();
    const std::vector<double> grid(probe_grid_mhz.begin(), probe_grid_mhz.end());
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    ThresholdSpectraSet out;
    for (int t : thresholds) {
        std::vector<double> sum(npts, 0.0), sum2(npts, 0.0);
        std::vector<std::size_t> n(npts, 0);
        for (std::size_t r = 0; r < run.records.size(); ++r) {
            if (run.records[r].check_counts < t) continue;
            const std::size_t k = r % npts;
            const double v = static_cast<double>(run.records[r].probe_counts);
            sum[k] += v;
            sum2[k] += v * v;
            n[k] += 1;
        }
        std::vector<double> mean(npts, nan), sem(npts, nan), occ(npts, 0.0);
        for (std::size_t k = 0; k < npts; ++k) {
            occ[k] = static_cast<double>(n[k]);
            if (n[k] == 0) continue;
            const double nn = static_cast<double>(n[k]);
            mean[k] = sum[k] / nn;
            if (n[k] < 2) continue;
            const double var = std::max(0.0, (sum2[k] - sum[k] * mean[k]) / (nn - 1.0));
            // counts-based floor keeps all-zero bins from acquiring
            // infinite weight
            sem[k] = std::max(std::sqrt(var / nn), std::sqrt(sum[k] + 1.0) / nn);
        }
        out.means[t] = {grid, std::move(mean)};
        out.sems[t] = {grid, std::move(sem)};
        out.occupancy[t] = {grid, std::move(occ)};
    }
    return out;
}

ThresholdSpectra build_threshold_spectra(const CheckProbeRun& run,
                                         std::span<const double> probe_grid_mhz,
                                         std::span<const int> thresholds) {
    return build_threshold_spectra_set(run, probe_grid_mhz, thresholds).means;
}

namespace {

// Inverse-variance weights from the model's per-repetition variance and
// the bin occupancies; keeps the weights independent of the measured
// bin fluctuations.
std::vector<double> model_based_sigmas(const std::vector<int>& thresholds,
                                       const std::vector<double>& grid,
                                       const std::vector<double>& x,
                                       const std::vector<double>& occupancy_by_x, double gamma,
                                       double c0, double f1, double support_span) {
    SpectrumOptions opt;
    opt.support_span_mhz = support_span;
    std::vector<std::vector<double>> var_by_block;
    var_by_block.reserve(thresholds.size());
    for (int t : thresholds)
        var_by_block.push_back(
            checkprobe_spectrum_moments(grid, t, gamma, c0, f1, opt).rep_variance);
    std::vector<double> sig(x.size());
    const double floor_var = std::max(1e-6 * c0, 1e-9);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto flat = static_cast<std::size_t>(x[i]);
        const std::size_t block = flat / grid.size();
        const std::size_t point = flat % grid.size();
        const double var = std::max(var_by_block[block][point], floor_var);
        sig[i] = std::sqrt(var / occupancy_by_x[i]);
    }
    return sig;
}

} // namespace

namespace {

// Evaluates the full stacked model once per distinct parameter vector;
// fit_least_squares walks the points with a fixed vector, so this turns
// the per-point interface into one spectrum evaluation per probe.
class StackedSpectrumModel {
  public:
    StackedSpectrumModel(std::vector<int> thresholds, std::vector<double> grid,
                         double support_span)
        : thresholds_(std::move(thresholds)), grid_(std::move(grid)),
          support_span_(support_span) {}

    double operator()(std::span<const double> p, double x) const {
        if (p.size() != last_p_.size() || !std::equal(p.begin(), p.end(), last_p_.begin())) {
            last_p_.assign(p.begin(), p.end());
            evaluate(p);
        }
        return values_[static_cast<std::size_t>(x)];
    }

  private:
    void evaluate(std::span<const double> p) const {
        values_.clear();
        SpectrumOptions opt;
        opt.support_span_mhz = support_span_;
        for (int t : thresholds_) {
            const auto spec = checkprobe_spectrum(grid_, t, p[0], p[1], p[2], opt);
            values_.insert(values_.end(), spec.counts.begin(), spec.counts.end());
        }
    }

    std::vector<int> thresholds_;
    std::vector<double> grid_;
    double support_span_;
    mutable std::vector<double> last_p_;
    mutable std::vector<double> values_;
};

} // namespace

LinewidthFit fit_checkprobe_linewidth(const ThresholdSpectra& spectra, double gamma_lifetime_mhz,
                                      double support_span_mhz, const ThresholdSpectra* occupancy) {
    if (spectra.size() < 3)
        throw std::invalid_argument("fit_checkprobe_linewidth: need >= 3 thresholds");
    if (!(gamma_lifetime_mhz > 0.0))
        throw std::invalid_argument("fit_checkprobe_linewidth: gamma_lifetime must be > 0");

    const auto& ref_grid = spectra.begin()->second.first;
    for (const auto& [t, sp] : spectra) {
        if (sp.first != ref_grid)
            throw std::invalid_argument("fit_checkprobe_linewidth: spectra must share one grid");
        if (sp.second.size() != ref_grid.size())
            throw std::invalid_argument("fit_checkprobe_linewidth: grid/counts length mismatch");
    }

    std::vector<int> thresholds;
    std::vector<double> x, y, occ;
    for (const auto& [t, sp] : spectra) {
        thresholds.push_back(t);
        const std::vector<double>* n_bin = nullptr;
        if (occupancy) {
            const auto it = occupancy->find(t);
            if (it == occupancy->end())
                throw std::invalid_argument("fit_checkprobe_linewidth: missing occupancy spectrum");
            n_bin = &it->second.second;
        }
        for (std::size_t i = 0; i < sp.second.size(); ++i) {
            if (!std::isfinite(sp.second[i])) continue; // empty probe bin
            if (n_bin && !((*n_bin)[i] >= 1.0)) continue;
            x.push_back(static_cast<double>(thresholds.size() - 1) *
                            static_cast<double>(ref_grid.size()) +
                        static_cast<double>(i));
            y.push_back(sp.second[i]);
            if (n_bin) occ.push_back((*n_bin)[i]);
        }
    }

    // initials from a mid-threshold spectrum: moderately narrowed but
    // still well populated after post-selection
    auto init_it = spectra.begin();
    std::advance(init_it, static_cast<std::ptrdiff_t>(spectra.size() / 2));
    const auto& top = init_it->second.second;
    double peak = 0.0, f1_init = ref_grid[ref_grid.size() / 2];
    for (std::size_t i = 0; i < top.size(); ++i) {
        if (std::isfinite(top[i]) && top[i] > peak) {
            peak = top[i];
            f1_init = ref_grid[i];
        }
    }
    double half_lo = ref_grid.front(), half_hi = ref_grid.back();
    for (std::size_t i = 0; i < top.size(); ++i) {
        if (!std::isfinite(top[i])) continue;
        if (top[i] >= 0.5 * peak) {
            half_lo = ref_grid[i];
            break;
        }
    }
    for (std::size_t i = top.size(); i-- > 0;) {
        if (!std::isfinite(top[i])) continue;
        if (top[i] >= 0.5 * peak) {
            half_hi = ref_grid[i];
            break;
        }
    }
    const double gamma_init = std::clamp(half_hi - half_lo, 2.0, 400.0);

    // stacked fit: x indexes (threshold block, grid point)
    StackedSpectrumModel model(thresholds, ref_grid, support_span_mhz);

    std::vector<optim::ParamSpec> specs = {
        {"gamma", gamma_init, 1.0, 500.0, false},
        {"c0", std::max(peak, 0.1), 1e-6, optim::kInf, false},
        {"f1", f1_init, ref_grid.front(), ref_grid.back(), false},
    };

    LinewidthFit out;
    out.fit = optim::fit_least_squares(std::cref(model), specs, x, y);
    if (occupancy) {
        // reweight with model-based variances and refit; one extra pass
        // settles the weights
        for (int pass = 0; pass < 2; ++pass) {
            const auto sig = model_based_sigmas(thresholds, ref_grid, x, occ,
                                                out.fit.value("gamma"), out.fit.value("c0"),
                                                out.fit.value("f1"), support_span_mhz);
            for (std::size_t k = 0; k < specs.size(); ++k) specs[k].initial = out.fit.values[k];
            out.fit = optim::fit_least_squares(std::cref(model), specs, x, y, sig);
        }
    }
    out.ratio = out.fit.value("gamma") / gamma_lifetime_mhz;
    out.ratio_sigma = out.fit.sigma("gamma") / gamma_lifetime_mhz;

    SpectrumOptions opt;
    opt.support_span_mhz = support_span_mhz;
    out.truncation_fraction =
        checkprobe_spectrum(ref_grid, thresholds.front(), out.fit.value("gamma"),
                            out.fit.value("c0"), out.fit.value("f1"), opt)
            .truncation_fraction;
    return out;
}

} // namespace qspec::photophysics
