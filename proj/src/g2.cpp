#include "qspec/g2.hpp"

#include "qspec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qspec::g2 {

G2Histogram g2_histogram(const TimestampList& ts, double bin_width_ns, double max_tau_ns) {
    if (!(bin_width_ns > 0.0)) throw std::invalid_argument("g2_histogram: bin_width must be > 0");
    if (!(max_tau_ns > bin_width_ns)) throw std::invalid_argument("g2_histogram: max_tau too small");
    if (ts.channel0_ns.empty() || ts.channel1_ns.empty())
        throw std::invalid_argument("g2_histogram: empty detection channel");

    const auto& a = ts.channel0_ns;
    const auto& b = ts.channel1_ns;
    const long k_max = std::lround(std::floor(max_tau_ns / bin_width_ns));
    const std::size_t nbins = static_cast<std::size_t>(2 * k_max + 1);

    G2Histogram h;
    h.counts.assign(nbins, 0);
    h.tau_ns.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i)
        h.tau_ns[i] = (static_cast<double>(i) - static_cast<double>(k_max)) * bin_width_ns;

    const double window = (static_cast<double>(k_max) + 0.5) * bin_width_ns;
    std::size_t lo = 0;
    for (const double t0 : a) {
        while (lo < b.size() && b[lo] < t0 - window) ++lo;
        for (std::size_t j = lo; j < b.size() && b[j] < t0 + window; ++j) {
            const long k = std::lround((b[j] - t0) / bin_width_ns);
            if (k >= -k_max && k <= k_max)
                h.counts[static_cast<std::size_t>(k + k_max)] += 1;
        }
    }

    const double t_begin = std::min(a.front(), b.front());
    const double t_end = std::max(a.back(), b.back());
    const double duration = t_end - t_begin;
    if (!(duration > 0.0)) throw std::invalid_argument("g2_histogram: zero-length record");

    h.expected_per_bin = static_cast<double>(a.size()) * static_cast<double>(b.size()) *
                         bin_width_ns / duration;
    h.g2.resize(nbins);
    h.sigma.resize(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        h.g2[i] = static_cast<double>(h.counts[i]) / h.expected_per_bin;
        h.sigma[i] = std::sqrt(std::max<double>(1.0, static_cast<double>(h.counts[i]))) /
                     h.expected_per_bin;
    }
    return h;
}

TimestampList simulate_g2(double signal_fraction, double rate_hz, double duration_s,
                          std::uint64_t seed) {
    if (signal_fraction < 0.0 || signal_fraction > 1.0)
        throw std::invalid_argument("simulate_g2: signal_fraction must be in [0, 1]");
    if (!(rate_hz > 0.0) || !(duration_s > 0.0))
        throw std::invalid_argument("simulate_g2: rate and duration must be > 0");

    const double duration_ns = duration_s * 1e9;
    const double rate_per_ns = rate_hz * 1e-9;
    const double signal_rate = signal_fraction * rate_per_ns;
    const double background_rate = (1.0 - signal_fraction) * rate_per_ns;

    TimestampList out;
    const std::size_t expect =
        static_cast<std::size_t>(rate_per_ns * duration_ns * 0.55) + 16;
    out.channel0_ns.reserve(expect);
    out.channel1_ns.reserve(expect);

    if (signal_rate > 0.0) {
        const double mean_gap = 1.0 / signal_rate;
        if (mean_gap <= kReexcitationMeanNs)
            throw std::invalid_argument("simulate_g2: signal rate exceeds the re-excitation bottleneck");
        const double emission_mean = mean_gap - kReexcitationMeanNs;
        rng::Stream stream(seed, "g2_signal", 0);
        double t = stream.exponential(emission_mean);
        while (t < duration_ns) {
            (stream.uniform() < 0.5 ? out.channel0_ns : out.channel1_ns).push_back(t);
            t += stream.exponential(kReexcitationMeanNs) + stream.exponential(emission_mean);
        }
    }
    if (background_rate > 0.0) {
        for (int ch = 0; ch < 2; ++ch) {
            rng::Stream stream(seed, "g2_background", static_cast<std::uint64_t>(ch));
            auto& dst = ch == 0 ? out.channel0_ns : out.channel1_ns;
            std::vector<double> bg;
            const double mean_gap = 2.0 / background_rate; // per-channel split of the Poisson stream
            double t = stream.exponential(mean_gap);
            while (t < duration_ns) {
                bg.push_back(t);
                t += stream.exponential(mean_gap);
            }
            std::vector<double> merged(dst.size() + bg.size());
            std::merge(dst.begin(), dst.end(), bg.begin(), bg.end(), merged.begin());
            dst = std::move(merged);
        }
    }
    if (out.channel0_ns.empty() || out.channel1_ns.empty())
        throw std::runtime_error("simulate_g2: a channel ended up empty; increase duration");
    return out;
}

} // namespace qspec::g2
