#pragma once

#include "qspec/optim.hpp"
#include "qspec/photophysics.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qspec::spin {

enum class Laser { off_resonant, a1, a2, none };
enum class BlockKind { repump, check, spin_pump, norm1, norm0, mw, readout, wait };

enum class MwKind { rabi_burst, pi_pulse, ramsey, hahn, xy4, xy8_n };
enum class SweepParam { duration_us, frequency_mhz, tau_us };

/// One microwave rotation in an expanded sequence.
struct MwPulse {
    double angle_deg;  // 90 or 180
    double phase_deg;  // 0 = X, 90 = Y, 180 = -X
};

/// Parametrized microwave payload. The swept quantity depends on the
/// kind: burst duration for Rabi, carrier frequency for a fixed pi
/// pulse, interpulse delay for Ramsey/echo/decoupling.
struct MwSequence {
    MwKind kind = MwKind::rabi_burst;
    double f_mhz = 0.0;     // carrier
    double omega_mhz = 1.0; // Rabi frequency
    SweepParam sweep = SweepParam::duration_us;
    std::vector<double> sweep_values;
    std::vector<double> phases_deg; // optional explicit pattern, validated against the kind
    int repeats = 1;                // xy8_n blocks

    double pi_duration_us() const { return 1.0 / (2.0 * omega_mhz); }
    int n_pi_pulses() const;
    void validate() const;
};

/// Phase patterns the decoupling kinds must follow.
std::vector<double> xy4_phases();
std::vector<double> xy8_phases(int repeats = 1);

/// Expanded pulse list (bracketing pi/2 pulses included) for one value
/// of the swept parameter.
std::vector<MwPulse> expand_mw_sequence(const MwSequence& seq, double sweep_value);

struct PulseBlock {
    BlockKind kind = BlockKind::wait;
    double duration_us = 1.0;
    Laser laser = Laser::none;
    double power_nw = 0.0;
    std::optional<MwSequence> mw_payload;
    bool counts_recorded = false;
    void validate() const;
};

struct SpinSweepRecord {
    double sweep_value = 0.0;
    std::int64_t rep = 0;
    long check_counts = 0;
    long norm1_counts = 0;
    long norm0_counts = 0;
    long ro_counts = 0;
};

/// Spin transition parameters plus the coherence law used by the
/// executor. T2(N) follows beta*N^alpha when use_power_law is set,
/// otherwise the fixed value; the stretch exponent applies to both.
struct SpinModel {
    double rabi_mhz = 1.0;
    double f0_mhz = 181.8;
    double fhf_mhz = 0.0;
    double t2star_us = 1.0;
    bool use_power_law = true;
    double t2_beta_ms = 0.46;
    double t2_alpha = 0.73;
    double t2_fixed_ms = 0.49;
    double decay_exponent = 2.0;
    double readout_contrast = 0.8;

    double t2_ms(int n_pulses) const;
    void validate() const;
};

/// Two-level transition probability averaged over the two nuclear-spin
/// projections (static detunings +-fhf/2). Frequencies in MHz, time in us.
double rabi_chevron(double t_us, double detuning_mhz, double omega_mhz, double fhf_mhz);

struct RabiFit {
    optim::FitResult fit; // b, A, phi, omega, tau
    double omega_mhz = 0.0, omega_sigma = 0.0;
    double pi_time_us = 0.0;
};

/// Damped oscillation b + A*cos(2*pi*omega*t + phi)*exp(-t/tau) against
/// the burst duration.
RabiFit rabi_fit(std::span<const double> t_us, std::span<const double> r,
                 std::span<const double> r_sigma = {});

struct DesrFit {
    optim::FitResult fit; // b, a1, c1, a2, c2, fwhm
    double fhf_mhz = 0.0, fhf_sigma = 0.0;
    double t2star_us = 0.0, t2star_sigma = 0.0;
    bool unresolved = false; // second peak consistent with zero amplitude
};

/// Two Gaussians with a shared FWHM; the dephasing time follows from
/// the shared width as 2*sqrt(ln 2)/(pi*FWHM).
DesrFit desr_fit(std::span<const double> f_mhz, std::span<const double> r,
                 std::span<const double> r_sigma = {});

struct RamseyFit {
    optim::FitResult fit; // b, a0, phi0, a1, phi1, fc, fhf, t2star
    double fc_mhz = 0.0, fc_sigma = 0.0;
    double fhf_mhz = 0.0, fhf_sigma = 0.0;
    double t2star_us = 0.0, t2star_sigma = 0.0;
    bool aliasing_warning = false;
};

/// Gaussian-envelope beat with two components split by fhf about fc.
/// Frequency initials come from the two largest periodogram peaks.
RamseyFit ramsey_fit(std::span<const double> tau_us, std::span<const double> r,
                     std::span<const double> r_sigma = {}, int n_components = 2);

struct DecayFit {
    optim::FitResult fit; // b, A, T2, n
    double t2 = 0.0, t2_sigma = 0.0;
    double n = 0.0, n_sigma = 0.0;
};

/// Stretched decay b + A*exp(-(t/T2)^n) against total free-evolution time.
DecayFit stretched_decay_fit(std::span<const double> total_time, std::span<const double> r,
                             std::span<const double> r_sigma = {});

struct PowerLawFit {
    optim::FitResult fit; // log-space slope and intercept
    double alpha = 0.0, alpha_sigma = 0.0;
    double beta = 0.0, beta_sigma = 0.0;
    double predict(double n_pulses) const;
};

/// T2 = beta * N^alpha fitted in log-log space.
PowerLawFit t2_power_law_fit(std::span<const int> pulse_counts, std::span<const double> t2_values);

struct ReadoutPoint {
    double sweep_value = 0.0;
    double r = 0.0, sigma_r = 0.0;
    double a = 0.0, b = 0.0, c = 0.0;
    double sigma_a = 0.0, sigma_b = 0.0, sigma_c = 0.0;
    std::size_t n_used = 0;
    bool degenerate = false; // bright and dark references coincide
};

/// Threshold on the check block, then R = (C-B)/(A-B) per sweep value
/// with the closed-form error propagation. Sigmas are standard errors
/// of the block means (unbiased variance estimators).
std::vector<ReadoutPoint> normalize_readout(std::span<const SpinSweepRecord> records,
                                            long check_threshold);

struct SequenceConfig {
    double reference_block_ms = 2.0; // duration at which EmitterModel::c0 applies
};

/// Discrete-event execution of one pulse sequence: per repetition a
/// quasi-static detuning is drawn from the dephasing model, the MW
/// payload sets the transfer probability into the readout subspace, and
/// the counting blocks emit Poisson counts. Deterministic per seed;
/// records come out sorted by (sweep index, rep).
std::vector<SpinSweepRecord> run_spin_sequence(const std::vector<PulseBlock>& sequence,
                                               const SpinModel& spin,
                                               const photophysics::EmitterModel& emitter,
                                               std::size_t reps_per_value, std::uint64_t seed,
                                               const SequenceConfig& cfg = {});

} // namespace qspec::spin
