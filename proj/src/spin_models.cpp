#include "qspec/spin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qspec::spin {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoSqrtLn2 = 1.6651092223153954; // 2*sqrt(ln 2)
} // namespace

double SpinModel::t2_ms(int n_pulses) const {
    if (n_pulses < 1) throw std::invalid_argument("SpinModel::t2_ms: n_pulses >= 1");
    if (use_power_law) return t2_beta_ms * std::pow(static_cast<double>(n_pulses), t2_alpha);
    return t2_fixed_ms;
}

void SpinModel::validate() const {
    if (!(rabi_mhz > 0.0)) throw std::invalid_argument("SpinModel: rabi frequency must be > 0");
    if (fhf_mhz < 0.0) throw std::invalid_argument("SpinModel: hyperfine splitting must be >= 0");
    if (!(t2star_us > 0.0)) throw std::invalid_argument("SpinModel: t2star must be > 0");
    if (use_power_law && !(t2_alpha > 0.0 && t2_alpha < 1.5))
        throw std::invalid_argument("SpinModel: alpha must be in (0, 1.5)");
    if (readout_contrast <= 0.0 || readout_contrast > 1.0)
        throw std::invalid_argument("SpinModel: contrast must be in (0, 1]");
}

double rabi_chevron(double t_us, double detuning_mhz, double omega_mhz, double fhf_mhz) {
    if (!(omega_mhz > 0.0)) throw std::invalid_argument("rabi_chevron: omega must be > 0");
    const double o2 = omega_mhz * omega_mhz;
    double p = 0.0;
    for (const double sign : {+1.0, -1.0}) {
        const double d = detuning_mhz + sign * 0.5 * fhf_mhz;
        const double eff2 = o2 + d * d;
        const double s = std::sin(kPi * std::sqrt(eff2) * t_us);
        p += 0.5 * (o2 / eff2) * s * s;
    }
    return p;
}

RabiFit rabi_fit(std::span<const double> t_us, std::span<const double> r,
                 std::span<const double> r_sigma) {
    if (t_us.size() != r.size()) throw std::invalid_argument("rabi_fit: length mismatch");
    if (t_us.size() < 8) throw std::invalid_argument("rabi_fit: too few durations");

    double dt_min = optim::kInf;
    for (std::size_t i = 1; i < t_us.size(); ++i) {
        if (!(t_us[i] > t_us[i - 1])) throw std::invalid_argument("rabi_fit: durations must ascend");
        dt_min = std::min(dt_min, t_us[i] - t_us[i - 1]);
    }
    const double f_nyq = 0.5 / dt_min;
    const double span = t_us.back() - t_us.front();

    double mean = 0.0, ymin = r[0], ymax = r[0];
    for (double v : r) {
        mean += v;
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    mean /= static_cast<double>(r.size());

    // strongest periodogram line seeds the oscillation frequency
    double f0 = 0.25 * f_nyq, best = -1.0;
    const std::size_t n_freq = std::max<std::size_t>(256, 8 * t_us.size());
    for (std::size_t k = 1; k <= n_freq; ++k) {
        const double f = f_nyq * static_cast<double>(k) / static_cast<double>(n_freq);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < t_us.size(); ++i) {
            const double ph = -2.0 * kPi * f * t_us[i];
            acc += (r[i] - mean) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        if (std::norm(acc) > best) {
            best = std::norm(acc);
            f0 = f;
        }
    }

    std::vector<optim::ParamSpec> specs = {
        {"b", mean, -optim::kInf, optim::kInf, false},
        {"A", 0.5 * (ymax - ymin), -2.0, 2.0, false},
        {"phi", kPi, -2.0 * kPi, 2.0 * kPi, false},
        {"omega", f0, 1e-3 * f_nyq, 1.05 * f_nyq, false},
        {"tau", 5.0 * span, 0.1 * dt_min, 1e3 * span, false},
    };
    const auto model = [](std::span<const double> p, double t) {
        return p[0] + p[1] * std::cos(2.0 * kPi * p[3] * t + p[2]) * std::exp(-t / p[4]);
    };
    RabiFit out;
    out.fit = optim::fit_least_squares(model, specs, t_us, r, r_sigma);
    out.omega_mhz = out.fit.value("omega");
    out.omega_sigma = out.fit.sigma("omega");
    out.pi_time_us = 0.5 / out.omega_mhz;
    return out;
}

DesrFit desr_fit(std::span<const double> f_mhz, std::span<const double> r,
                 std::span<const double> r_sigma) {
    if (f_mhz.size() != r.size()) throw std::invalid_argument("desr_fit: length mismatch");
    if (f_mhz.size() < 10) throw std::invalid_argument("desr_fit: need >= 10 frequency points");

    const std::size_t n = f_mhz.size();
    const double span = f_mhz.back() - f_mhz.front();
    double base = *std::min_element(r.begin(), r.end());

    // seed the two centers: global maximum, then the best point at least
    // a tenth of the span away
    std::size_t i1 = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (r[i] > r[i1]) i1 = i;
    std::size_t i2 = n; // invalid
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(f_mhz[i] - f_mhz[i1]) < 0.1 * span) continue;
        if (i2 == n || r[i] > r[i2]) i2 = i;
    }
    if (i2 == n) i2 = i1 == 0 ? n - 1 : 0;

    const double amp1 = std::max(r[i1] - base, 1e-6);
    const double amp2 = std::max(r[i2] - base, 1e-6);
    double c1 = f_mhz[std::min(i1, i2)];
    double c2 = f_mhz[std::max(i1, i2)];
    if (c1 == c2) c2 = c1 + 0.05 * span;

    // width seed from the half-maximum crossing around the main peak
    double fwhm0 = 0.1 * span;
    {
        const double half = base + 0.5 * amp1;
        std::size_t lo = i1, hi = i1;
        while (lo > 0 && r[lo] > half) --lo;
        while (hi + 1 < n && r[hi] > half) ++hi;
        const double w = f_mhz[hi] - f_mhz[lo];
        if (w > 0.0) fwhm0 = w;
    }

    std::vector<optim::ParamSpec> specs = {
        {"b", base, -optim::kInf, optim::kInf, false},
        {"a1", amp1, 0.0, optim::kInf, false},
        {"c1", c1, f_mhz.front() - span, f_mhz.back() + span, false},
        {"a2", amp2, 0.0, optim::kInf, false},
        {"c2", c2, f_mhz.front() - span, f_mhz.back() + span, false},
        {"fwhm", fwhm0, 1e-6 * span, 10.0 * span, false},
    };
    const auto model = [](std::span<const double> p, double f) {
        const double sig = p[5] / 2.3548200450309493;
        const double d1 = (f - p[2]) / sig;
        const double d2 = (f - p[4]) / sig;
        return p[0] + p[1] * std::exp(-0.5 * d1 * d1) + p[3] * std::exp(-0.5 * d2 * d2);
    };

    DesrFit out;
    out.fit = optim::fit_least_squares(model, specs, f_mhz, r, r_sigma);

    double cc1 = out.fit.value("c1"), cc2 = out.fit.value("c2");
    const std::size_t j1 = out.fit.index("c1"), j2 = out.fit.index("c2");
    out.fhf_mhz = std::abs(cc2 - cc1);
    const double var = out.fit.covariance(j1, j1) + out.fit.covariance(j2, j2) -
                       2.0 * out.fit.covariance(j1, j2);
    out.fhf_sigma = std::sqrt(std::max(0.0, var));

    const double fwhm = out.fit.value("fwhm");
    out.t2star_us = kTwoSqrtLn2 / (kPi * fwhm);
    out.t2star_sigma = out.t2star_us * out.fit.sigma("fwhm") / fwhm;

    const double a2_fit = std::min(out.fit.value("a1"), out.fit.value("a2"));
    const double a2_sig = std::max(out.fit.sigma("a1"), out.fit.sigma("a2"));
    out.unresolved = !(a2_fit > 2.0 * a2_sig) || !std::isfinite(a2_sig);
    return out;
}

namespace {

// plain periodogram on an arbitrary delay grid
std::vector<std::pair<double, double>> periodogram_peaks(std::span<const double> tau,
                                                         std::span<const double> y,
                                                         double f_max, std::size_t n_freq) {
    const std::size_t n = tau.size();
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> power(n_freq);
    std::vector<double> freq(n_freq);
    for (std::size_t k = 0; k < n_freq; ++k) {
        const double f = f_max * static_cast<double>(k + 1) / static_cast<double>(n_freq);
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const double ph = -2.0 * kPi * f * tau[i];
            acc += (y[i] - mean) * std::complex<double>(std::cos(ph), std::sin(ph));
        }
        freq[k] = f;
        power[k] = std::norm(acc);
    }
    std::vector<std::pair<double, double>> peaks; // (power, freq), local maxima
    for (std::size_t k = 1; k + 1 < n_freq; ++k)
        if (power[k] > power[k - 1] && power[k] >= power[k + 1])
            peaks.emplace_back(power[k], freq[k]);
    std::sort(peaks.rbegin(), peaks.rend());
    return peaks;
}

} // namespace

RamseyFit ramsey_fit(std::span<const double> tau_us, std::span<const double> r,
                     std::span<const double> r_sigma, int n_components) {
    if (tau_us.size() != r.size()) throw std::invalid_argument("ramsey_fit: length mismatch");
    if (tau_us.size() < 8) throw std::invalid_argument("ramsey_fit: too few delays");
    if (n_components != 1 && n_components != 2)
        throw std::invalid_argument("ramsey_fit: n_components must be 1 or 2");

    const std::size_t n = tau_us.size();
    double dt_min = optim::kInf;
    for (std::size_t i = 1; i < n; ++i) {
        if (!(tau_us[i] > tau_us[i - 1]))
            throw std::invalid_argument("ramsey_fit: delays must ascend");
        dt_min = std::min(dt_min, tau_us[i] - tau_us[i - 1]);
    }
    const double f_nyq = 0.5 / dt_min;
    const double span = tau_us.back() - tau_us.front();

    const auto peaks = periodogram_peaks(tau_us, r, f_nyq, std::max<std::size_t>(256, 8 * n));
    double f_lo = peaks.empty() ? 0.1 * f_nyq : peaks[0].second;
    double f_hi = f_lo;
    if (n_components == 2) {
        if (peaks.size() > 1)
            f_hi = peaks[1].second;
        else
            f_hi = std::min(f_lo + 1.0 / std::max(span, 1e-9), 0.9 * f_nyq);
        if (f_hi < f_lo) std::swap(f_lo, f_hi);
    }

    double ymin = r[0], ymax = r[0], mean = 0.0;
    for (double v : r) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
        mean += v;
    }
    mean /= static_cast<double>(n);
    const double amp0 = std::max(0.25 * (ymax - ymin), 1e-6);

    const bool two = n_components == 2;
    std::vector<optim::ParamSpec> specs = {
        {"b", mean, -optim::kInf, optim::kInf, false},
        {"a0", amp0, -2.0, 2.0, false},
        {"phi0", 0.0, -2.0 * kPi, 2.0 * kPi, false},
        {"a1", two ? amp0 : 0.0, -2.0, 2.0, !two},
        {"phi1", 0.0, -2.0 * kPi, 2.0 * kPi, !two},
        {"fc", 0.5 * (f_lo + f_hi), 0.0, 1.05 * f_nyq, false},
        {"fhf", two ? std::max(f_hi - f_lo, 1e-4) : 0.0, 0.0, 1.05 * f_nyq, !two},
        {"t2star", std::max(0.5 * span, 2.0 * dt_min), 0.05 * dt_min, 50.0 * span, false},
    };
    const auto model = [](std::span<const double> p, double t) {
        const double env = std::exp(-(t / p[7]) * (t / p[7]));
        const double w0 = 2.0 * kPi * (p[5] + 0.5 * p[6]);
        const double w1 = 2.0 * kPi * (p[5] - 0.5 * p[6]);
        return p[0] + env * (p[1] * std::cos(w0 * t + p[2]) + p[3] * std::cos(w1 * t + p[4]));
    };

    RamseyFit out;
    out.fit = optim::fit_least_squares(model, specs, tau_us, r, r_sigma);
    out.fc_mhz = out.fit.value("fc");
    out.fc_sigma = out.fit.sigma("fc");
    out.fhf_mhz = std::abs(out.fit.value("fhf"));
    out.fhf_sigma = out.fit.sigma("fhf");
    out.t2star_us = out.fit.value("t2star");
    out.t2star_sigma = out.fit.sigma("t2star");
    out.aliasing_warning = out.fc_mhz + 0.5 * out.fhf_mhz > 0.98 * f_nyq;
    return out;
}

DecayFit stretched_decay_fit(std::span<const double> total_time, std::span<const double> r,
                             std::span<const double> r_sigma) {
    if (total_time.size() != r.size())
        throw std::invalid_argument("stretched_decay_fit: length mismatch");
    if (total_time.size() < 5) throw std::invalid_argument("stretched_decay_fit: too few points");
    for (std::size_t i = 0; i < total_time.size(); ++i) {
        if (!(total_time[i] > 0.0))
            throw std::invalid_argument("stretched_decay_fit: times must be > 0");
        if (i > 0 && !(total_time[i] > total_time[i - 1]))
            throw std::invalid_argument("stretched_decay_fit: times must ascend");
    }

    const std::size_t n = total_time.size();
    // baseline from the tail of the sweep
    double base = 0.0;
    const std::size_t n_tail = std::max<std::size_t>(2, n / 6);
    for (std::size_t i = n - n_tail; i < n; ++i) base += r[i];
    base /= static_cast<double>(n_tail);
    const double amp = r.front() - base;

    double t2_init = total_time[n / 2];
    if (std::abs(amp) > 0.0) {
        const double target = base + amp / std::numbers::e;
        for (std::size_t i = 0; i < n; ++i) {
            const bool crossed = amp > 0.0 ? r[i] <= target : r[i] >= target;
            if (crossed) {
                t2_init = total_time[i];
                break;
            }
        }
    }
    const double t_max = total_time.back();

    std::vector<optim::ParamSpec> specs = {
        {"b", base, -optim::kInf, optim::kInf, false},
        {"A", amp, -optim::kInf, optim::kInf, false},
        {"T2", std::clamp(t2_init, 1e-6 * t_max, 50.0 * t_max), 1e-6 * t_max, 100.0 * t_max, false},
        {"n", 1.5, 0.05, 6.0, false},
    };
    const auto model = [](std::span<const double> p, double t) {
        return p[0] + p[1] * std::exp(-std::pow(t / p[2], p[3]));
    };

    DecayFit out;
    out.fit = optim::fit_least_squares(model, specs, total_time, r, r_sigma);
    out.t2 = out.fit.value("T2");
    out.t2_sigma = out.fit.sigma("T2");
    out.n = out.fit.value("n");
    out.n_sigma = out.fit.sigma("n");
    if (out.t2 >= 99.0 * t_max) out.fit.converged = false; // no decay inside the span
    return out;
}

double PowerLawFit::predict(double n_pulses) const {
    return beta * std::pow(n_pulses, alpha);
}

PowerLawFit t2_power_law_fit(std::span<const int> pulse_counts, std::span<const double> t2_values) {
    if (pulse_counts.size() != t2_values.size())
        throw std::invalid_argument("t2_power_law_fit: length mismatch");
    if (pulse_counts.size() < 3) throw std::invalid_argument("t2_power_law_fit: need >= 3 points");
    for (std::size_t i = 0; i < pulse_counts.size(); ++i) {
        if (pulse_counts[i] < 2)
            throw std::invalid_argument("t2_power_law_fit: N must be >= 2 (echo excluded)");
        if (!(t2_values[i] > 0.0)) throw std::domain_error("t2_power_law_fit: T2 must be > 0");
    }

    std::vector<double> lx(pulse_counts.size()), ly(t2_values.size());
    for (std::size_t i = 0; i < pulse_counts.size(); ++i) {
        lx[i] = std::log(static_cast<double>(pulse_counts[i]));
        ly[i] = std::log(t2_values[i]);
    }
    std::vector<optim::ParamSpec> specs = {
        {"alpha", 0.7, 0.0, optim::kInf, false},
        {"log_beta", ly[0] - 0.7 * lx[0], -optim::kInf, optim::kInf, false},
    };
    const auto model = [](std::span<const double> p, double x) { return p[0] * x + p[1]; };

    PowerLawFit out;
    out.fit = optim::fit_least_squares(model, specs, lx, ly);
    out.alpha = out.fit.value("alpha");
    out.alpha_sigma = out.fit.sigma("alpha");
    out.beta = std::exp(out.fit.value("log_beta"));
    out.beta_sigma = out.beta * out.fit.sigma("log_beta");
    return out;
}

std::vector<ReadoutPoint> normalize_readout(std::span<const SpinSweepRecord> records,
                                            long check_threshold) {
    struct Acc {
        double sa = 0, sa2 = 0, sb = 0, sb2 = 0, sc = 0, sc2 = 0;
        std::size_t n = 0;
    };
    std::map<double, Acc> groups;
    for (const auto& rec : records) {
        if (rec.check_counts < check_threshold) continue;
        auto& g = groups[rec.sweep_value];
        const double a = static_cast<double>(rec.norm1_counts);
        const double b = static_cast<double>(rec.norm0_counts);
        const double c = static_cast<double>(rec.ro_counts);
        g.sa += a;
        g.sa2 += a * a;
        g.sb += b;
        g.sb2 += b * b;
        g.sc += c;
        g.sc2 += c * c;
        g.n += 1;
    }

    std::vector<ReadoutPoint> out;
    out.reserve(groups.size());
    for (const auto& [sweep, g] : groups) {
        if (g.n < 2)
            throw std::invalid_argument("normalize_readout: fewer than 2 repetitions pass the "
                                        "threshold at a sweep value");
        const double nn = static_cast<double>(g.n);
        ReadoutPoint pt;
        pt.sweep_value = sweep;
        pt.n_used = g.n;
        pt.a = g.sa / nn;
        pt.b = g.sb / nn;
        pt.c = g.sc / nn;
        // standard errors of the means from the unbiased sample variances
        pt.sigma_a = std::sqrt(std::max(0.0, (g.sa2 - g.sa * pt.a) / (nn - 1.0)) / nn);
        pt.sigma_b = std::sqrt(std::max(0.0, (g.sb2 - g.sb * pt.b) / (nn - 1.0)) / nn);
        pt.sigma_c = std::sqrt(std::max(0.0, (g.sc2 - g.sc * pt.c) / (nn - 1.0)) / nn);

        const double d = pt.a - pt.b;
        if (std::abs(d) <= 1e-12 * std::max({std::abs(pt.a), std::abs(pt.b), 1.0})) {
            pt.degenerate = true;
            pt.r = std::numeric_limits<double>::quiet_NaN();
            pt.sigma_r = std::numeric_limits<double>::quiet_NaN();
        } else {
            pt.r = (pt.c - pt.b) / d;
            const double d2 = d * d;
            const double var = (pt.c - pt.b) * (pt.c - pt.b) / (d2 * d2) * pt.sigma_a * pt.sigma_a +
                               (pt.a - pt.c) * (pt.a - pt.c) / (d2 * d2) * pt.sigma_b * pt.sigma_b +
                               pt.sigma_c * pt.sigma_c / d2;
            pt.sigma_r = std::sqrt(var);
        }
        out.push_back(pt);
    }
    return out;
}

} // namespace qspec::spin
