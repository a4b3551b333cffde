#include "qspec/spin.hpp"

#include "qspec/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qspec::spin {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<double> xy4_phases() { return {0.0, 90.0, 0.0, 90.0}; }

std::vector<double> xy8_phases(int repeats) {
    const double block[8] = {0.0, 90.0, 0.0, 90.0, 90.0, 0.0, 90.0, 0.0};
    std::vector<double> out;
    out.reserve(8 * static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) out.insert(out.end(), block, block + 8);
    return out;
}

int MwSequence::n_pi_pulses() const {
    switch (kind) {
        case MwKind::rabi_burst:
        case MwKind::pi_pulse: return 0;
        case MwKind::ramsey: return 0;
        case MwKind::hahn: return 1;
        case MwKind::xy4: return 4;
        case MwKind::xy8_n: return 8 * repeats;
    }
    throw std::logic_error("MwSequence: bad kind");
}

void MwSequence::validate() const {
    if (!(omega_mhz > 0.0)) throw std::invalid_argument("MwSequence: omega must be > 0");
    if (sweep_values.empty()) throw std::invalid_argument("MwSequence: empty sweep grid");
    if (repeats < 1) throw std::invalid_argument("MwSequence: repeats must be >= 1");

    const auto expect_sweep = [this](SweepParam want, const char* msg) {
        if (sweep != want) throw std::invalid_argument(msg);
    };
    switch (kind) {
        case MwKind::rabi_burst:
            expect_sweep(SweepParam::duration_us, "MwSequence: rabi_burst sweeps duration_us");
            break;
        case MwKind::pi_pulse:
            expect_sweep(SweepParam::frequency_mhz, "MwSequence: pi_pulse sweeps frequency_mhz");
            break;
        case MwKind::ramsey:
        case MwKind::hahn:
        case MwKind::xy4:
        case MwKind::xy8_n:
            expect_sweep(SweepParam::tau_us, "MwSequence: delay sequences sweep tau_us");
            break;
    }
    if (!phases_deg.empty()) {
        std::vector<double> want;
        if (kind == MwKind::xy4)
            want = xy4_phases();
        else if (kind == MwKind::xy8_n)
            want = xy8_phases(repeats);
        else if (kind == MwKind::hahn)
            want = {0.0};
        else
            return; // free-phase kinds
        if (phases_deg != want)
            throw std::invalid_argument("MwSequence: phase pattern does not match the kind");
    }
}

std::vector<MwPulse> expand_mw_sequence(const MwSequence& seq, double sweep_value) {
    seq.validate();
    std::vector<MwPulse> out;
    switch (seq.kind) {
        case MwKind::rabi_burst: {
            // one burst of the swept duration; angle in units of a pi rotation
            const double angle = 180.0 * sweep_value / seq.pi_duration_us();
            out.push_back({angle, 0.0});
            break;
        }
        case MwKind::pi_pulse:
            out.push_back({180.0, 0.0});
            break;
        case MwKind::ramsey:
            out.push_back({90.0, 0.0});
            out.push_back({90.0, 0.0});
            break;
        case MwKind::hahn:
            out.push_back({90.0, 0.0});
            out.push_back({180.0, 0.0});
            out.push_back({90.0, 0.0});
            break;
        case MwKind::xy4:
        case MwKind::xy8_n: {
            out.push_back({90.0, 0.0});
            const auto phases = seq.kind == MwKind::xy4 ? xy4_phases() : xy8_phases(seq.repeats);
            for (double ph : phases) out.push_back({180.0, ph});
            out.push_back({90.0, 0.0});
            break;
        }
    }
    return out;
}

void PulseBlock::validate() const {
    if (!(duration_us > 0.0)) throw std::invalid_argument("PulseBlock: duration must be > 0");
    if (kind == BlockKind::mw && !mw_payload)
        throw std::invalid_argument("PulseBlock: mw block without payload");
    if (kind != BlockKind::mw && mw_payload)
        throw std::invalid_argument("PulseBlock: payload on a non-mw block");
    if (counts_recorded && laser == Laser::none)
        throw std::invalid_argument("PulseBlock: counting block needs a laser");
}

namespace {

// Probability of ending in the readout subspace after the payload, for
// one repetition with quasi-static detuning offset eps.
double transfer_probability(const MwSequence& seq, const SpinModel& spin, double sweep_value,
                            double eps_mhz) {
    switch (seq.kind) {
        case MwKind::rabi_burst: {
            const double det = seq.f_mhz - spin.f0_mhz + eps_mhz;
            return rabi_chevron(sweep_value, det, seq.omega_mhz, spin.fhf_mhz);
        }
        case MwKind::pi_pulse: {
            const double det = sweep_value - spin.f0_mhz + eps_mhz;
            return rabi_chevron(seq.pi_duration_us(), det, seq.omega_mhz, spin.fhf_mhz);
        }
        case MwKind::ramsey: {
            // ideal pi/2 pulses; the envelope emerges from averaging eps
            const double det = seq.f_mhz - spin.f0_mhz + eps_mhz;
            double p = 0.0;
            for (const double sign : {+1.0, -1.0}) {
                const double d = det + sign * 0.5 * spin.fhf_mhz;
                p += 0.25 * (1.0 + std::cos(2.0 * kPi * d * sweep_value));
            }
            return p;
        }
        case MwKind::hahn:
        case MwKind::xy4:
        case MwKind::xy8_n: {
            const int n_pi = std::max(seq.n_pi_pulses(), 1);
            const double total_ms = 2.0 * n_pi * sweep_value * 1e-3;
            const double t2 = spin.t2_ms(n_pi);
            const double coherence = std::exp(-std::pow(total_ms / t2, spin.decay_exponent));
            return 0.5 + 0.5 * coherence;
        }
    }
    throw std::logic_error("transfer_probability: bad kind");
}

} // namespace

std::vector<SpinSweepRecord> run_spin_sequence(const std::vector<PulseBlock>& sequence,
                                               const SpinModel& spin,
                                               const photophysics::EmitterModel& emitter,
                                               std::size_t reps_per_value, std::uint64_t seed,
                                               const SequenceConfig& cfg) {
    spin.validate();
    emitter.validate();
    if (reps_per_value < 1) throw std::invalid_argument("run_spin_sequence: reps must be >= 1");

    const MwSequence* payload = nullptr;
    int n_readout = 0;
    for (const auto& blk : sequence) {
        blk.validate();
        if (blk.kind == BlockKind::mw) {
            blk.mw_payload->validate();
            payload = &*blk.mw_payload;
        }
        if (blk.kind == BlockKind::readout) ++n_readout;
    }
    if (n_readout != 1)
        throw std::invalid_argument("run_spin_sequence: sequence needs exactly one readout block");
    if (!payload) throw std::invalid_argument("run_spin_sequence: sequence has no mw block");

    const double rate_per_us = emitter.c0 / (cfg.reference_block_ms * 1e3);
    const double sigma_eps = 1.0 / (std::sqrt(2.0) * kPi * spin.t2star_us);

    const auto& sweep = payload->sweep_values;
    std::vector<SpinSweepRecord> out;
    out.reserve(sweep.size() * reps_per_value);

    for (std::size_t si = 0; si < sweep.size(); ++si) {
        for (std::size_t rep = 0; rep < reps_per_value; ++rep) {
            rng::Stream stream(seed, "spin_sequence", si * reps_per_value + rep);
            const double eps = stream.normal(0.0, sigma_eps);
            const double p = transfer_probability(*payload, spin, sweep[si], eps);

            SpinSweepRecord rec;
            rec.sweep_value = sweep[si];
            rec.rep = static_cast<std::int64_t>(rep);
            for (const auto& blk : sequence) {
                if (!blk.counts_recorded) continue;
                const double bright = rate_per_us * blk.duration_us;
                const double dark = bright * (1.0 - spin.readout_contrast);
                switch (blk.kind) {
                    case BlockKind::check: rec.check_counts = stream.poisson(bright); break;
                    case BlockKind::norm1: rec.norm1_counts = stream.poisson(bright); break;
                    case BlockKind::norm0: rec.norm0_counts = stream.poisson(dark); break;
                    case BlockKind::readout:
                        rec.ro_counts = stream.poisson(dark + p * (bright - dark));
                        break;
                    default: break; // counts on other blocks are not modeled
                }
            }
            out.push_back(rec);
        }
    }
    return out;
}

} // namespace qspec::spin
