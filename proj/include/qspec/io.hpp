#pragma once

#include "qspec/g2.hpp"
#include "qspec/optim.hpp"
#include "qspec/photophysics.hpp"
#include "qspec/spin.hpp"
#include "qspec/survey.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qspec::io {

using json = nlohmann::json;

/// {"model": ..., "params": {name: {"value","sigma"}}, "chi2_reduced",
/// "converged", "covariance": row-major}
json fit_result_to_json(const optim::FitResult& fit, const std::string& model_name);

/// CSV files carry an optional `# meta: {...}` preamble line ahead of
/// the header so every output embeds its resolved configuration.
void write_checkprobe_csv(const std::filesystem::path& path,
                          const std::vector<photophysics::CheckProbeRecord>& records,
                          const json* meta = nullptr);
std::vector<photophysics::CheckProbeRecord> read_checkprobe_csv(const std::filesystem::path& path,
                                                                json* meta_out = nullptr);

void write_spin_csv(const std::filesystem::path& path,
                    const std::vector<spin::SpinSweepRecord>& records, const json* meta = nullptr);
std::vector<spin::SpinSweepRecord> read_spin_csv(const std::filesystem::path& path,
                                                 json* meta_out = nullptr);

void write_timestamps_csv(const std::filesystem::path& path, const g2::TimestampList& ts,
                          const json* meta = nullptr);
g2::TimestampList read_timestamps_csv(const std::filesystem::path& path, json* meta_out = nullptr);

void write_ple_csv(const std::filesystem::path& path,
                   const std::vector<survey::PleSpectrum>& spectra, const json* meta = nullptr);
std::vector<survey::PleSpectrum> read_ple_csv(const std::filesystem::path& path,
                                              json* meta_out = nullptr);

void write_plmap_csv(const std::filesystem::path& path, const survey::PlMap& map,
                     const json* meta = nullptr);
survey::PlMap read_plmap_csv(const std::filesystem::path& path, json* meta_out = nullptr);

void write_damage_csv(const std::filesystem::path& path, const survey::DamageTable& table,
                      const json* meta = nullptr);
survey::DamageTable read_damage_csv(const std::filesystem::path& path, json* meta_out = nullptr);

/// Generic numeric table with a caller-provided header, for the small
/// two/three-column formats (saturation sweeps, readout curves, T2
/// scaling tables).
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns, const json* meta = nullptr);
std::vector<std::vector<double>> read_table_csv(const std::filesystem::path& path,
                                                std::vector<std::string>* header_out = nullptr,
                                                json* meta_out = nullptr);

json peaks_to_json(const std::map<std::string, std::vector<survey::PlePeak>>& peaks_by_pillar);
std::map<std::string, std::vector<survey::PlePeak>> peaks_from_json(const json& j);

/// Sequence descriptor: line-oriented `block`/`mw` statements with
/// key=value fields; see the bundled examples for the grammar.
std::vector<spin::PulseBlock> read_sequence_file(const std::filesystem::path& path);
void write_sequence_file(const std::filesystem::path& path,
                         const std::vector<spin::PulseBlock>& sequence);

std::string format_double(double v); // shortest round-trip decimal

} // namespace qspec::io
