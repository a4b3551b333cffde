#pragma once

#include <cstdint>
#include <vector>

namespace qspec::g2 {

/// Photon arrival times split over the two detection channels of a
/// Hanbury Brown-Twiss setup, each ascending, in ns.
struct TimestampList {
    std::vector<double> channel0_ns;
    std::vector<double> channel1_ns;
};

struct G2Histogram {
    std::vector<double> tau_ns; // bin centers, symmetric about 0
    std::vector<double> g2;
    std::vector<double> sigma;  // Poisson error per bin
    std::vector<std::uint64_t> counts;
    double expected_per_bin = 0.0; // uncorrelated-coincidence normalization
};

/// Cross-correlation histogram of channel-1 minus channel-0 arrival
/// times, normalized by the uncorrelated expectation N0*N1*bin/T so the
/// long-delay limit is 1.
G2Histogram g2_histogram(const TimestampList& ts, double bin_width_ns, double max_tau_ns);

/// Mean re-excitation delay of the simulated emitter; any value well
/// above the analysis bin width keeps same-bin signal pairs negligible.
inline constexpr double kReexcitationMeanNs = 10.0;

/// Single-emitter photon stream (consecutive signal photons separated
/// by a re-excitation wait plus the emission wait) mixed with Poissonian
/// background; signal_fraction is the signal share of the total rate.
/// Photons land on either channel with probability 1/2.
TimestampList simulate_g2(double signal_fraction, double rate_hz, double duration_s,
                          std::uint64_t seed);

} // namespace qspec::g2
