#include "qspec/photophysics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qspec::photophysics {

void EmitterModel::validate() const {
    if (!(gamma_lifetime_mhz > 0.0))
        throw std::invalid_argument("EmitterModel: gamma_lifetime must be > 0");
    if (!(gamma_mhz >= gamma_lifetime_mhz))
        throw std::invalid_argument("EmitterModel: gamma must be >= gamma_lifetime");
    if (!(c0 > 0.0)) throw std::invalid_argument("EmitterModel: c0 must be > 0");
    if (gamma_d < 0.0 || gamma_i < 0.0)
        throw std::invalid_argument("EmitterModel: rates must be >= 0");
}

void FarFieldProfile::validate() const {
    if (theta_rad.size() != p_boundary.size() || theta_rad.size() < 2)
        throw std::invalid_argument("FarFieldProfile: need >= 2 matching samples");
    constexpr double half_pi = 1.5707963267948966;
    for (std::size_t i = 0; i < theta_rad.size(); ++i) {
        if (theta_rad[i] < -1e-12 || theta_rad[i] > half_pi + 1e-9)
            throw std::invalid_argument("FarFieldProfile: theta outside [0, pi/2]");
        if (i > 0 && !(theta_rad[i] > theta_rad[i - 1]))
            throw std::invalid_argument("FarFieldProfile: theta must ascend");
        if (p_boundary[i] < 0.0)
            throw std::invalid_argument("FarFieldProfile: p_boundary must be >= 0");
    }
    if (!(p_tot > 0.0)) throw std::invalid_argument("FarFieldProfile: p_tot must be > 0");
    double integral = 0.0;
    for (std::size_t i = 1; i < theta_rad.size(); ++i)
        integral += 0.5 * (p_boundary[i] + p_boundary[i - 1]) * (theta_rad[i] - theta_rad[i - 1]);
    if (integral > p_tot * (1.0 + 1e-9))
        throw std::invalid_argument("FarFieldProfile: boundary integral exceeds p_tot");
}

double lorentzian_response(double f_mhz, double gamma_mhz, double c0) {
    const double h = 0.5 * gamma_mhz;
    return c0 * h * h / (f_mhz * f_mhz + h * h);
}

namespace {

// Lower regularized gamma P(a, z) by series expansion, z < a+1.
double gamma_p_series(double a, double z) {
    const double lg = std::lgamma(a);
    double ap = a;
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 0; n < 800; ++n) {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-z + a * std::log(z) - lg);
}

// Upper regularized gamma Q(a, z) by modified Lentz continued fraction, z >= a+1.
double gamma_q_contfrac(double a, double z) {
    const double lg = std::lgamma(a);
    const double tiny = 1e-300;
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 800; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-z + a * std::log(z) - lg) * h;
}

} // namespace

double incomplete_gamma(double a, double z) {
    if (!(a > 0.0)) throw std::domain_error("incomplete_gamma: a must be > 0");
    if (!(z >= 0.0)) throw std::domain_error("incomplete_gamma: z must be >= 0");
    if (z == 0.0) return 1.0;
    if (z < a + 1.0) return 1.0 - gamma_p_series(a, z);
    return gamma_q_contfrac(a, z);
}

double heralding_probability(int threshold, double mean_counts) {
    if (threshold < 1) throw std::domain_error("heralding_probability: threshold must be >= 1");
    if (mean_counts < 0.0) throw std::domain_error("heralding_probability: negative mean");
    if (mean_counts == 0.0) return 0.0;
    // P(Poisson(z) >= a) equals the lower regularized gamma P(a, z); the
    // series branch keeps tiny tail probabilities accurate where
    // 1 - Q(a, z) would cancel.
    const double a = static_cast<double>(threshold);
    if (mean_counts < a + 1.0) return gamma_p_series(a, mean_counts);
    return 1.0 - gamma_q_contfrac(a, mean_counts);
}

namespace {

double trapezoid(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return s;
}

// Out-of-grid mass of the unnormalized heralding profile, assuming the
// f^(-2T) far tail of P(Poisson(lambda(f)) >= T).
double tail_mass_estimate(double u_edge, double dist_edge, int threshold) {
    if (u_edge <= 0.0 || dist_edge <= 0.0) return 0.0;
    return u_edge * dist_edge / (2.0 * threshold - 1.0);
}

} // namespace

HeraldedDensity heralded_spectral_density(std::span<const double> f_grid_mhz, int threshold,
                                          const EmitterModel& emitter, double f1_mhz) {
    emitter.validate();
    if (threshold < 1) throw std::invalid_argument("heralded_spectral_density: threshold >= 1");
    if (f_grid_mhz.size() < 3) throw std::invalid_argument("heralded_spectral_density: grid too small");
    for (std::size_t i = 1; i < f_grid_mhz.size(); ++i)
        if (!(f_grid_mhz[i] > f_grid_mhz[i - 1]))
            throw std::invalid_argument("heralded_spectral_density: grid must ascend");
    const double span = f_grid_mhz.back() - f_grid_mhz.front();
    if (span < 10.0 * emitter.gamma_mhz)
        throw std::invalid_argument("heralded_spectral_density: grid must span >= 10*gamma");

    HeraldedDensity out;
    out.f_mhz.assign(f_grid_mhz.begin(), f_grid_mhz.end());
    out.density.resize(f_grid_mhz.size());
    for (std::size_t i = 0; i < f_grid_mhz.size(); ++i) {
        const double lam = lorentzian_response(f_grid_mhz[i] - f1_mhz, emitter.gamma_mhz, emitter.c0);
        out.density[i] = heralding_probability(threshold, lam);
    }
    const double norm = trapezoid(out.f_mhz, out.density);
    if (!(norm > 0.0))
        throw std::invalid_argument("heralded_spectral_density: threshold unreachable on this grid");

    const double tail = tail_mass_estimate(out.density.front(), f1_mhz - f_grid_mhz.front(), threshold) +
                        tail_mass_estimate(out.density.back(), f_grid_mhz.back() - f1_mhz, threshold);
    out.truncation_fraction = tail / (norm + tail);

    for (double& d : out.density) d /= norm;
    return out;
}

CheckProbeSpectrumMoments checkprobe_spectrum_moments(std::span<const double> f_grid_mhz,
                                                      int threshold, double gamma_mhz, double c0,
                                                      double f1_mhz, const SpectrumOptions& opt) {
    if (!(gamma_mhz > 0.0) || !(c0 >= 0.0))
        throw std::invalid_argument("checkprobe_spectrum: invalid gamma or c0");
    if (f_grid_mhz.empty()) throw std::invalid_argument("checkprobe_spectrum: empty grid");

    double span = opt.support_span_mhz;
    if (span <= 0.0) span = f_grid_mhz.back() - f_grid_mhz.front();
    span = std::max(span, 10.0 * gamma_mhz);
    double h = opt.spacing_mhz > 0.0 ? opt.spacing_mhz : gamma_mhz / 20.0;
    std::size_t n = static_cast<std::size_t>(std::ceil(span / h)) + 1;
    if (n > 400000) {
        n = 400000;
        h = span / static_cast<double>(n - 1);
    }

    // heralded density on the uniform internal grid
    std::vector<double> g(n), u(n);
    const double g0 = f1_mhz - 0.5 * span;
    for (std::size_t j = 0; j < n; ++j) {
        g[j] = g0 + h * static_cast<double>(j);
        u[j] = heralding_probability(threshold, lorentzian_response(g[j] - f1_mhz, gamma_mhz, c0));
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        norm += u[j] * ((j == 0 || j + 1 == n) ? 0.5 : 1.0);
    norm *= h;
    if (!(norm > 0.0))
        throw std::invalid_argument("checkprobe_spectrum: threshold unreachable");

    CheckProbeSpectrumMoments out;
    out.f_mhz.assign(f_grid_mhz.begin(), f_grid_mhz.end());
    out.mean.resize(f_grid_mhz.size());
    out.rep_variance.resize(f_grid_mhz.size());
    const double tail = tail_mass_estimate(u.front(), 0.5 * span, threshold) +
                        tail_mass_estimate(u.back(), 0.5 * span, threshold);
    out.truncation_fraction = tail / (norm + tail);

    for (std::size_t i = 0; i < f_grid_mhz.size(); ++i) {
        const double f = f_grid_mhz[i];
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            const double lam = lorentzian_response(f - g[j], gamma_mhz, c0);
            acc += w * u[j] * lam;
            acc2 += w * u[j] * lam * lam;
        }
        const double mean = acc * h / norm;
        const double second = acc2 * h / norm;
        out.mean[i] = mean;
        // total variance of one probe draw: Poisson part plus the
        // posterior spread of the rate
        out.rep_variance[i] = mean + std::max(0.0, second - mean * mean);
    }
    return out;
}

CheckProbeSpectrum checkprobe_spectrum(std::span<const double> f_grid_mhz, int threshold,
                                       double gamma_mhz, double c0, double f1_mhz,
                                       const SpectrumOptions& opt) {
    auto moments = checkprobe_spectrum_moments(f_grid_mhz, threshold, gamma_mhz, c0, f1_mhz, opt);
    CheckProbeSpectrum out;
    out.f_mhz = std::move(moments.f_mhz);
    out.counts = std::move(moments.mean);
    out.truncation_fraction = moments.truncation_fraction;
    return out;
}

double no_recapture_model(double t_ms, double gamma_d, double gamma_i, double gamma_mhz,
                          double c0) {
    if (!(gamma_mhz > 0.0)) throw std::invalid_argument("no_recapture_model: gamma must be > 0");
    if (gamma_d < 0.0 || gamma_i < 0.0)
        throw std::invalid_argument("no_recapture_model: rates must be >= 0");
    if (t_ms > 0.0)
        return c0 / (1.0 + gamma_d * t_ms / gamma_mhz) * std::exp(-gamma_i * t_ms);
    return c0 / (1.0 - gamma_d * t_ms / gamma_mhz);
}

double diffusion_only_model(double t_ms, double gamma_d, double gamma_mhz, double c0) {
    return no_recapture_model(t_ms, gamma_d, 0.0, gamma_mhz, c0);
}

SaturationFit saturation_fit(std::span<const double> power_uw, std::span<const double> rate_khz) {
    if (power_uw.size() != rate_khz.size())
        throw std::invalid_argument("saturation_fit: length mismatch");
    std::vector<double> distinct(power_uw.begin(), power_uw.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 5)
        throw std::invalid_argument("saturation_fit: need >= 5 distinct powers");
    for (double r : rate_khz)
        if (r < 0.0) throw std::invalid_argument("saturation_fit: negative count rate");

    const double p_max = distinct.back();
    const double y_max = *std::max_element(rate_khz.begin(), rate_khz.end());

    // rough initials: slope from the top of the sweep, defect amplitude from the rest
    double b0 = 0.0;
    if (p_max > 0.0) b0 = 0.5 * y_max / p_max;
    double a0 = std::max(0.5 * y_max, 1e-6);
    double psat0 = std::max(0.25 * p_max, distinct[1]);

    std::vector<optim::ParamSpec> specs = {
        {"A", a0, 0.0, optim::kInf, false},
        {"B", b0, 0.0, optim::kInf, false},
        {"p_sat", psat0, 1e-9, optim::kInf, false},
    };
    const auto model = [](std::span<const double> p, double x) {
        return p[1] * x + p[0] * x / (x + p[2]);
    };
    SaturationFit out;
    out.fit = optim::fit_least_squares(model, specs, power_uw, rate_khz);

    const double a = out.fit.value("A");
    const double b = out.fit.value("B");
    const double psat = out.fit.value("p_sat");
    const double a_sat = 0.5 * a;
    const double b_sat = b * psat;
    const double denom = a_sat + b_sat;

    if (denom <= 0.0 || a_sat < 1e-3 * denom) {
        out.rho = 0.0;
        out.rho_sigma = 0.0;
        out.background_only = true;
        return out;
    }
    out.rho = a_sat / denom;

    // delta-method uncertainty through the covariance of (A, B, p_sat)
    Eigen::Vector3d grad;
    grad[0] = 0.5 * b_sat / (denom * denom);
    grad[1] = -a_sat * psat / (denom * denom);
    grad[2] = -a_sat * b / (denom * denom);
    Eigen::Matrix3d cov;
    const auto ia = out.fit.index("A");
    const auto ib = out.fit.index("B");
    const auto ip = out.fit.index("p_sat");
    const std::size_t idx[3] = {ia, ib, ip};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            cov(r, c) = out.fit.covariance(static_cast<Eigen::Index>(idx[r]),
                                           static_cast<Eigen::Index>(idx[c]));
    out.rho_sigma = std::sqrt(std::max(0.0, grad.dot(cov * grad)));
    return out;
}

double collection_efficiency(const FarFieldProfile& profile, double na) {
    profile.validate();
    if (!(na > 0.0) || na > 1.0)
        throw std::domain_error("collection_efficiency: NA must be in (0, 1]");
    const double theta_max = std::asin(na);
    const auto& th = profile.theta_rad;
    const auto& pb = profile.p_boundary;

    double integral = 0.0;
    for (std::size_t i = 1; i < th.size(); ++i) {
        if (th[i] <= theta_max) {
            integral += 0.5 * (pb[i] + pb[i - 1]) * (th[i] - th[i - 1]);
        } else {
            if (th[i - 1] < theta_max) {
                const double t = (theta_max - th[i - 1]) / (th[i] - th[i - 1]);
                const double p_cut = pb[i - 1] + t * (pb[i] - pb[i - 1]);
                integral += 0.5 * (p_cut + pb[i - 1]) * (theta_max - th[i - 1]);
            }
            break;
        }
    }
    return integral / profile.p_tot;
}

} // namespace qspec::photophysics
