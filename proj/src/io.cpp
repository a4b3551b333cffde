#include "qspec/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qspec::io {

namespace {

void split_csv(const std::string& line, std::vector<std::string>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field '" + s + "'");
    }
}

long parse_long(const std::string& s) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad integer field '" + s + "'");
    }
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return f;
}

void write_meta(std::ofstream& f, const json* meta) {
    if (meta && !meta->is_null()) f << "# meta: " << meta->dump() << "\n";
}

// Reads preamble `#` lines (capturing `# meta: ...`), then the header line.
std::string read_header(std::ifstream& f, json* meta_out) {
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string tag = "# meta: ";
            if (meta_out && line.rfind(tag, 0) == 0) *meta_out = json::parse(line.substr(tag.size()));
            continue;
        }
        return line;
    }
    throw std::runtime_error("file has no header line");
}

void expect_header(const std::string& got, const std::string& want) {
    if (got != want)
        throw std::runtime_error("unexpected CSV header '" + got + "', expected '" + want + "'");
}

} // namespace

std::string format_double(double v) {
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json fit_result_to_json(const optim::FitResult& fit, const std::string& model_name) {
    json params = json::object();
    for (std::size_t i = 0; i < fit.names.size(); ++i)
        params[fit.names[i]] = {{"value", fit.values[i]}, {"sigma", fit.sigmas[i]}};
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(fit.covariance.size()));
    for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r)
        for (Eigen::Index c = 0; c < fit.covariance.cols(); ++c)
            cov.push_back(fit.covariance(r, c));
    return json{{"model", model_name},
                {"params", params},
                {"param_order", fit.names},
                {"chi2_reduced", fit.chi2_reduced},
                {"n_points", fit.n_points},
                {"n_iterations", fit.n_iterations},
                {"converged", fit.converged},
                {"covariance", cov}};
}

void write_checkprobe_csv(const std::filesystem::path& path,
                          const std::vector<photophysics::CheckProbeRecord>& records,
                          const json* meta) {
    auto f = open_out(path);
    write_meta(f, meta);
    f << "rep,delay_ms,check_counts,probe_counts\n";
    for (const auto& r : records)
        f << r.rep << ',' << format_double(r.delay_ms) << ',' << r.check_counts << ','
          << r.probe_counts << '\n';
}

std::vector<photophysics::CheckProbeRecord> read_checkprobe_csv(const std::filesystem::path& path,
                                                                json* meta_out) {
    auto f = open_in(path);
    expect_header(read_header(f, meta_out), "rep,delay_ms,check_counts,probe_counts");
    std::vector<photophysics::CheckProbeRecord> out;
    std::string line;
    std::vector<std::string> cells;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != 4) throw std::runtime_error("bad check/probe row: " + line);
        photophysics::CheckProbeRecord rec{parse_long(cells[0]), parse_double(cells[1]),
                                           parse_long(cells[2]), parse_long(cells[3])};
        if (rec.check_counts < 0 || rec.probe_counts < 0 || !std::isfinite(rec.delay_ms))
            throw std::runtime_error("invalid check/probe row: " + line);
        out.push_back(rec);
    }
    return out;
}

void write_spin_csv(const std::filesystem::path& path,
                    const std::vector<spin::SpinSweepRecord>& records, const json* meta) {
    auto f = open_out(path);
    write_meta(f, meta);
    f << "sweep_value,rep,check,norm1,norm0,ro\n";
    for (const auto& r : records)
        f << format_double(r.sweep_value) << ',' << r.rep << ',' << r.check_counts << ','
          << r.norm1_counts << ',' << r.norm0_counts << ',' << r.ro_counts << '\n';
}

std::vector<spin::SpinSweepRecord> read_spin_csv(const std::filesystem::path& path,
                                                 json* meta_out) {
    auto f = open_in(path);
    expect_header(read_header(f, meta_out), "sweep_value,rep,check,norm1,norm0,ro");
    std::vector<spin::SpinSweepRecord> out;
    std::string line;
    std::vector<std::string> cells;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != 6) throw std::runtime_error("bad spin sweep row: " + line);
        out.push_back({parse_double(cells[0]), parse_long(cells[1]), parse_long(cells[2]),
                       parse_long(cells[3]), parse_long(cells[4]), parse_long(cells[5])});
    }
    return out;
}

void write_timestamps_csv(const std::filesystem::path& path, const g2::TimestampList& ts,
                          const json* meta) {
    auto f = open_out(path);
    write_meta(f, meta);
    f << "channel,time_ns\n";
    // interleave the channels in global time order
    std::size_t i = 0, j = 0;
    while (i < ts.channel0_ns.size() || j < ts.channel1_ns.size()) {
        const bool take0 = j >= ts.channel1_ns.size() ||
                           (i < ts.channel0_ns.size() && ts.channel0_ns[i] <= ts.channel1_ns[j]);
        if (take0) {
            f << "0," << format_double(ts.channel0_ns[i++]) << '\n';
        } else {
            f << "1," << format_double(ts.channel1_ns[j++]) << '\n';
        }
    }
}

g2::TimestampList read_timestamps_csv(const std::filesystem::path& path, json* meta_out) {
    auto f = open_in(path);
    expect_header(read_header(f, meta_out), "channel,time_ns");
    g2::TimestampList out;
    std::string line;
    std::vector<std::string> cells;
    double last = -std::numeric_limits<double>::infinity();
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != 2) throw std::runtime_error("bad timestamp row: " + line);
        const long ch = parse_long(cells[0]);
        const double t = parse_double(cells[1]);
        if (t < last) throw std::runtime_error("timestamps must ascend");
        last = t;
        if (ch == 0)
            out.channel0_ns.push_back(t);
        else if (ch == 1)
            out.channel1_ns.push_back(t);
        else
            throw std::runtime_error("timestamp channel must be 0 or 1");
    }
    return out;
}

void write_ple_csv(const std::filesystem::path& path,
                   const std::vector<survey::PleSpectrum>& spectra, const json* meta) {
    auto f = open_out(path);
    write_meta(f, meta);
    f << "pillar_id,frequency_ghz,rate_khz\n";
    for (const auto& s : spectra)
        for (std::size_t i = 0; i < s.frequency_ghz.size(); ++i)
            f << s.pillar_id << ',' << format_double(s.frequency_ghz[i]) << ','
              << format_double(s.rate_khz[i]) << '\n';
}

std::vector<survey::PleSpectrum> read_ple_csv(const std::filesystem::path& path, json* meta_out) {
    auto f = open_in(path);
    expect_header(read_header(f, meta_out), "pillar_id,frequency_ghz,rate_khz");
    std::vector<survey::PleSpectrum> out;
    std::string line;
    std::vector<std::string> cells;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != 3) throw std::runtime_error("bad PLE row: " + line);
        if (out.empty() || out.back().pillar_id != cells[0]) {
            out.emplace_back();
            out.back().pillar_id = cells[0];
        }
        out.back().frequency_ghz.push_back(parse_double(cells[1]));
        out.back().rate_khz.push_back(parse_double(cells[2]));
    }
    return out;
}

void write_plmap_csv(const std::filesystem::path& path, const survey::PlMap& map,
                     const json* meta) {
    map.validate();
    auto f = open_out(path);
    write_meta(f, meta);
    f << "# baseline_row: " << map.baseline_row << "\n";
    f << "y_um\\x_um";
    for (double x : map.x_um) f << ',' << format_double(x);
    f << '\n';
    for (std::size_t r = 0; r < map.counts_khz.size(); ++r) {
        f << format_double(map.y_um[r]);
        for (double v : map.counts_khz[r]) f << ',' << format_double(v);
        f << '\n';
    }
}

survey::PlMap read_plmap_csv(const std::filesystem::path& path, json* meta_out) {
    auto f = open_in(path);
    survey::PlMap map;
    std::string line;
    std::string header;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::string meta_tag = "# meta: ";
            const std::string base_tag = "# baseline_row: ";
            if (meta_out && line.rfind(meta_tag, 0) == 0)
                *meta_out = json::parse(line.substr(meta_tag.size()));
            if (line.rfind(base_tag, 0) == 0)
                map.baseline_row = static_cast<std::size_t>(parse_long(line.substr(base_tag.size())));
            continue;
        }
        header = line;
        break;
    }
    std::vector<std::string> cells;
    split_csv(header, cells);
    if (cells.empty() || cells[0] != "y_um\\x_um")
        throw std::runtime_error("bad map header: " + header);
    for (std::size_t i = 1; i < cells.size(); ++i) map.x_um.push_back(parse_double(cells[i]));
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != map.x_um.size() + 1)
            throw std::runtime_error("ragged map row: " + line);
        map.y_um.push_back(parse_double(cells[0]));
        std::vector<double> row;
        for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(parse_double(cells[i]));
        map.counts_khz.push_back(std::move(row));
    }
    map.validate();
    return map;
}

void write_damage_csv(const std::filesystem::path& path, const survey::DamageTable& table,
                      const json* meta) {
    auto f = open_out(path);
    write_meta(f, meta);
    f << "energy_uj,exposed,damaged\n";
    for (std::size_t i = 0; i < table.energy_uj.size(); ++i)
        f << format_double(table.energy_uj[i]) << ',' << table.exposed[i] << ','
          << table.damaged[i] << '\n';
}

survey::DamageTable read_damage_csv(const std::filesystem::path& path, json* meta_out) {
    auto f = open_in(path);
    expect_header(read_header(f, meta_out), "energy_uj,exposed,damaged");
    survey::DamageTable out;
    std::string line;
    std::vector<std::string> cells;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != 3) throw std::runtime_error("bad damage row: " + line);
        out.energy_uj.push_back(parse_double(cells[0]));
        out.exposed.push_back(static_cast<int>(parse_long(cells[1])));
        out.damaged.push_back(static_cast<int>(parse_long(cells[2])));
    }
    return out;
}

void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns, const json* meta) {
    if (header.size() != columns.size())
        throw std::invalid_argument("write_table_csv: header/column mismatch");
    for (const auto& c : columns)
        if (c.size() != columns.front().size())
            throw std::invalid_argument("write_table_csv: ragged columns");
    auto f = open_out(path);
    write_meta(f, meta);
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (std::size_t r = 0; r < columns.front().size(); ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            f << (c ? "," : "") << format_double(columns[c][r]);
        f << '\n';
    }
}

std::vector<std::vector<double>> read_table_csv(const std::filesystem::path& path,
                                                std::vector<std::string>* header_out,
                                                json* meta_out) {
    auto f = open_in(path);
    const std::string header = read_header(f, meta_out);
    std::vector<std::string> names;
    split_csv(header, names);
    if (header_out) *header_out = names;
    std::vector<std::vector<double>> cols(names.size());
    std::string line;
    std::vector<std::string> cells;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        split_csv(line, cells);
        if (cells.size() != names.size()) throw std::runtime_error("ragged table row: " + line);
        for (std::size_t c = 0; c < cells.size(); ++c) cols[c].push_back(parse_double(cells[c]));
    }
    return cols;
}

json peaks_to_json(const std::map<std::string, std::vector<survey::PlePeak>>& peaks_by_pillar) {
    json out = json::object();
    for (const auto& [id, peaks] : peaks_by_pillar) {
        json arr = json::array();
        for (const auto& p : peaks)
            arr.push_back({{"center_ghz", p.center_ghz},
                           {"center_sigma_ghz", p.center_sigma_ghz},
                           {"amplitude_khz", p.amplitude_khz},
                           {"amplitude_sigma_khz", p.amplitude_sigma_khz},
                           {"fwhm_mhz", p.fwhm_mhz},
                           {"fwhm_sigma_mhz", p.fwhm_sigma_mhz},
                           {"gaussian_sigma_mhz", p.gaussian_sigma_mhz},
                           {"lorentz_hwhm_mhz", p.lorentz_hwhm_mhz}});
        out[id] = std::move(arr);
    }
    return out;
}

std::map<std::string, std::vector<survey::PlePeak>> peaks_from_json(const json& j) {
    std::map<std::string, std::vector<survey::PlePeak>> out;
    for (const auto& [id, arr] : j.items()) {
        std::vector<survey::PlePeak> peaks;
        for (const auto& p : arr) {
            survey::PlePeak peak;
            peak.center_ghz = p.at("center_ghz").get<double>();
            peak.center_sigma_ghz = p.value("center_sigma_ghz", 0.0);
            peak.amplitude_khz = p.at("amplitude_khz").get<double>();
            peak.amplitude_sigma_khz = p.value("amplitude_sigma_khz", 0.0);
            peak.fwhm_mhz = p.value("fwhm_mhz", 0.0);
            peak.fwhm_sigma_mhz = p.value("fwhm_sigma_mhz", 0.0);
            peak.gaussian_sigma_mhz = p.value("gaussian_sigma_mhz", 0.0);
            peak.lorentz_hwhm_mhz = p.value("lorentz_hwhm_mhz", 0.0);
            peaks.push_back(peak);
        }
        out[id] = std::move(peaks);
    }
    return out;
}

namespace {

using KeyValues = std::map<std::string, std::string>;

KeyValues parse_fields(std::istringstream& in, const std::string& context) {
    KeyValues kv;
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("sequence file: expected key=value in " + context + ": " + tok);
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

std::string need(const KeyValues& kv, const std::string& key, const std::string& context) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw std::runtime_error("sequence file: missing '" + key + "' in " + context);
    return it->second;
}

std::vector<double> parse_grid(const std::string& s) {
    // start:step:stop (inclusive within half a step) or a comma list
    const auto c1 = s.find(':');
    if (c1 != std::string::npos) {
        const auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos) throw std::runtime_error("bad grid spec: " + s);
        const double start = parse_double(s.substr(0, c1));
        const double step = parse_double(s.substr(c1 + 1, c2 - c1 - 1));
        const double stop = parse_double(s.substr(c2 + 1));
        if (!(step > 0.0)) throw std::runtime_error("grid step must be > 0: " + s);
        std::vector<double> out;
        for (double v = start; v <= stop + 0.5 * step; v += step) out.push_back(v);
        return out;
    }
    std::vector<std::string> cells;
    split_csv(s, cells);
    std::vector<double> out;
    for (const auto& c : cells) out.push_back(parse_double(c));
    return out;
}

spin::Laser parse_laser(const std::string& s) {
    if (s == "off_resonant") return spin::Laser::off_resonant;
    if (s == "a1") return spin::Laser::a1;
    if (s == "a2") return spin::Laser::a2;
    if (s == "none") return spin::Laser::none;
    throw std::runtime_error("unknown laser: " + s);
}

const char* laser_name(spin::Laser l) {
    switch (l) {
        case spin::Laser::off_resonant: return "off_resonant";
        case spin::Laser::a1: return "a1";
        case spin::Laser::a2: return "a2";
        case spin::Laser::none: return "none";
    }
    return "?";
}

spin::BlockKind parse_block_kind(const std::string& s) {
    if (s == "repump") return spin::BlockKind::repump;
    if (s == "check") return spin::BlockKind::check;
    if (s == "spin_pump") return spin::BlockKind::spin_pump;
    if (s == "norm1") return spin::BlockKind::norm1;
    if (s == "norm0") return spin::BlockKind::norm0;
    if (s == "mw") return spin::BlockKind::mw;
    if (s == "readout") return spin::BlockKind::readout;
    if (s == "wait") return spin::BlockKind::wait;
    throw std::runtime_error("unknown block kind: " + s);
}

const char* block_kind_name(spin::BlockKind k) {
    switch (k) {
        case spin::BlockKind::repump: return "repump";
        case spin::BlockKind::check: return "check";
        case spin::BlockKind::spin_pump: return "spin_pump";
        case spin::BlockKind::norm1: return "norm1";
        case spin::BlockKind::norm0: return "norm0";
        case spin::BlockKind::mw: return "mw";
        case spin::BlockKind::readout: return "readout";
        case spin::BlockKind::wait: return "wait";
    }
    return "?";
}

spin::MwKind parse_mw_kind(const std::string& s) {
    if (s == "rabi_burst") return spin::MwKind::rabi_burst;
    if (s == "pi_pulse") return spin::MwKind::pi_pulse;
    if (s == "ramsey") return spin::MwKind::ramsey;
    if (s == "hahn") return spin::MwKind::hahn;
    if (s == "xy4") return spin::MwKind::xy4;
    if (s == "xy8_n") return spin::MwKind::xy8_n;
    throw std::runtime_error("unknown mw kind: " + s);
}

const char* mw_kind_name(spin::MwKind k) {
    switch (k) {
        case spin::MwKind::rabi_burst: return "rabi_burst";
        case spin::MwKind::pi_pulse: return "pi_pulse";
        case spin::MwKind::ramsey: return "ramsey";
        case spin::MwKind::hahn: return "hahn";
        case spin::MwKind::xy4: return "xy4";
        case spin::MwKind::xy8_n: return "xy8_n";
    }
    return "?";
}

spin::SweepParam parse_sweep(const std::string& s) {
    if (s == "duration_us") return spin::SweepParam::duration_us;
    if (s == "frequency_mhz") return spin::SweepParam::frequency_mhz;
    if (s == "tau_us") return spin::SweepParam::tau_us;
    throw std::runtime_error("unknown sweep parameter: " + s);
}

const char* sweep_name(spin::SweepParam p) {
    switch (p) {
        case spin::SweepParam::duration_us: return "duration_us";
        case spin::SweepParam::frequency_mhz: return "frequency_mhz";
        case spin::SweepParam::tau_us: return "tau_us";
    }
    return "?";
}

} // namespace

std::vector<spin::PulseBlock> read_sequence_file(const std::filesystem::path& path) {
    auto f = open_in(path);
    struct PendingBlock {
        spin::PulseBlock block;
        std::string payload_name;
    };
    std::vector<PendingBlock> blocks;
    std::map<std::string, spin::MwSequence> payloads;

    std::string line;
    while (std::getline(f, line)) {
        if (line.empty() || line.front() == '#') continue;
        std::istringstream in(line);
        std::string word;
        in >> word;
        if (word == "block") {
            std::string kind;
            in >> kind;
            auto kv = parse_fields(in, "block " + kind);
            PendingBlock pb;
            pb.block.kind = parse_block_kind(kind);
            pb.block.duration_us = parse_double(need(kv, "duration_us", "block " + kind));
            if (kv.count("laser")) pb.block.laser = parse_laser(kv["laser"]);
            if (kv.count("power_nw")) pb.block.power_nw = parse_double(kv["power_nw"]);
            if (kv.count("counts")) pb.block.counts_recorded = parse_long(kv["counts"]) != 0;
            if (kv.count("payload")) pb.payload_name = kv["payload"];
            blocks.push_back(std::move(pb));
        } else if (word == "mw") {
            std::string name;
            in >> name;
            auto kv = parse_fields(in, "mw " + name);
            spin::MwSequence seq;
            seq.kind = parse_mw_kind(need(kv, "kind", "mw " + name));
            seq.f_mhz = parse_double(need(kv, "f_mhz", "mw " + name));
            seq.omega_mhz = parse_double(need(kv, "omega_mhz", "mw " + name));
            seq.sweep = parse_sweep(need(kv, "sweep", "mw " + name));
            seq.sweep_values = parse_grid(need(kv, "grid", "mw " + name));
            if (kv.count("repeats")) seq.repeats = static_cast<int>(parse_long(kv["repeats"]));
            if (kv.count("phases")) {
                std::vector<std::string> cells;
                split_csv(kv["phases"], cells);
                for (const auto& c : cells) seq.phases_deg.push_back(parse_double(c));
            }
            seq.validate();
            payloads[name] = std::move(seq);
        } else {
            throw std::runtime_error("sequence file: unknown statement '" + word + "'");
        }
    }

    std::vector<spin::PulseBlock> out;
    for (auto& pb : blocks) {
        if (pb.block.kind == spin::BlockKind::mw) {
            const auto it = payloads.find(pb.payload_name);
            if (it == payloads.end())
                throw std::runtime_error("sequence file: mw block references unknown payload '" +
                                         pb.payload_name + "'");
            pb.block.mw_payload = it->second;
        }
        pb.block.validate();
        out.push_back(std::move(pb.block));
    }
    return out;
}

void write_sequence_file(const std::filesystem::path& path,
                         const std::vector<spin::PulseBlock>& sequence) {
    auto f = open_out(path);
    int payload_index = 0;
    std::vector<std::pair<std::string, spin::MwSequence>> payloads;
    for (const auto& blk : sequence) {
        f << "block " << block_kind_name(blk.kind)
          << " duration_us=" << format_double(blk.duration_us);
        if (blk.laser != spin::Laser::none) f << " laser=" << laser_name(blk.laser);
        if (blk.power_nw > 0.0) f << " power_nw=" << format_double(blk.power_nw);
        if (blk.counts_recorded) f << " counts=1";
        if (blk.mw_payload) {
            const std::string name = "p" + std::to_string(payload_index++);
            payloads.emplace_back(name, *blk.mw_payload);
            f << " payload=" << name;
        }
        f << '\n';
    }
    for (const auto& [name, seq] : payloads) {
        f << "mw " << name << " kind=" << mw_kind_name(seq.kind)
          << " f_mhz=" << format_double(seq.f_mhz)
          << " omega_mhz=" << format_double(seq.omega_mhz) << " sweep=" << sweep_name(seq.sweep)
          << " grid=";
        for (std::size_t i = 0; i < seq.sweep_values.size(); ++i)
            f << (i ? "," : "") << format_double(seq.sweep_values[i]);
        if (seq.repeats != 1) f << " repeats=" << seq.repeats;
        if (!seq.phases_deg.empty()) {
            f << " phases=";
            for (std::size_t i = 0; i < seq.phases_deg.size(); ++i)
                f << (i ? "," : "") << format_double(seq.phases_deg[i]);
        }
        f << '\n';
    }
}

} // namespace qspec::io
