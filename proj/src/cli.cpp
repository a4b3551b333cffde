#include "qspec/cli.hpp"

#include "qspec/g2.hpp"
#include "qspec/io.hpp"
#include "qspec/optim.hpp"
#include "qspec/photophysics.hpp"
#include "qspec/rng.hpp"
#include "qspec/spin.hpp"
#include "qspec/survey.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

namespace qspec::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

// "a:b:c" (start:step:stop) or "a:b" (unit step) or "v1,v2,..."
std::vector<double> parse_grid_spec(const std::string& s) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::string tok;
        std::istringstream in(s);
        while (std::getline(in, tok, ':')) parts.push_back(std::stod(tok));
        if (parts.size() == 2) {
            for (double v = parts[0]; v <= parts[1] + 1e-12; v += 1.0) out.push_back(v);
        } else if (parts.size() == 3) {
            if (!(parts[1] > 0.0)) throw CLI::ValidationError("grid step must be > 0");
            for (double v = parts[0]; v <= parts[2] + 0.5 * parts[1]; v += parts[1])
                out.push_back(v);
        } else {
            throw CLI::ValidationError("bad grid spec: " + s);
        }
        return out;
    }
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_int_range(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_grid_spec(s)) out.push_back(static_cast<int>(std::lround(v)));
    return out;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << j.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return json::parse(f);
}

// Resolved-configuration echo carried by every output file.
json make_meta(const std::string& command, const json& options) {
    return json{{"command", command}, {"options", options}};
}

int finish_fit_output(const fs::path& out, json result, const optim::FitResult& fit,
                      const json& meta) {
    result["meta"] = meta;
    write_json_file(out, result);
    return fit.converged ? kExitOk : kExitNotConverged;
}

template <typename T>
bool meta_option(const json& meta, const std::string& key, T& out) {
    if (!meta.contains("options")) return false;
    const auto& opts = meta["options"];
    if (!opts.contains(key)) return false;
    out = opts[key].get<T>();
    return true;
}

// ---- sim check-probe -------------------------------------------------------

struct SimCheckProbeArgs {
    double gamma_mhz = 39.0;
    double c0 = 7.42;
    double gamma_lifetime_mhz = 26.0;
    double f1_mhz = 0.0;
    std::size_t reps = 100000;
    std::uint64_t seed = 1;
    std::string prior = "uniform";
    double prior_center_mhz = 0.0;
    double prior_halfspan_mhz = 200.0;
    double prior_fwhm_mhz = 100.0;
    double sweep_span_mhz = 400.0;
    std::size_t sweep_points = 41;
    std::string delays_ms; // non-empty switches to the delay-scan mode
    double gamma_d = 0.0;  // linewidths per ms
    double gamma_i = 0.0;  // 1/ms
    std::string out;
};

int run_sim_check_probe(const SimCheckProbeArgs& a) {
    photophysics::EmitterModel em;
    em.gamma_mhz = a.gamma_mhz;
    em.c0 = a.c0;
    em.gamma_lifetime_mhz = std::min(a.gamma_lifetime_mhz, a.gamma_mhz);
    em.gamma_d = a.gamma_d;
    em.gamma_i = a.gamma_i;

    const json meta = make_meta("sim check-probe",
                                json{{"gamma-mhz", a.gamma_mhz},
                                     {"c0", a.c0},
                                     {"gamma-lifetime-mhz", a.gamma_lifetime_mhz},
                                     {"f1-mhz", a.f1_mhz},
                                     {"reps", a.reps},
                                     {"seed", a.seed},
                                     {"prior", a.prior},
                                     {"prior-center-mhz", a.prior_center_mhz},
                                     {"prior-halfspan-mhz", a.prior_halfspan_mhz},
                                     {"prior-fwhm-mhz", a.prior_fwhm_mhz},
                                     {"sweep-span-mhz", a.sweep_span_mhz},
                                     {"sweep-points", a.sweep_points},
                                     {"delays-ms", a.delays_ms},
                                     {"gamma-d", a.gamma_d},
                                     {"gamma-i", a.gamma_i},
                                     {"o", a.out}});

    if (!a.delays_ms.empty()) {
        std::vector<double> signed_delays;
        for (double t : parse_grid_spec(a.delays_ms)) {
            signed_delays.push_back(t);
            if (t > 0.0) signed_delays.push_back(-t);
        }
        const std::size_t reps_per_delay =
            std::max<std::size_t>(1, a.reps / signed_delays.size());
        const auto records =
            photophysics::simulate_diffusion_records(em, signed_delays, reps_per_delay, a.seed);
        io::write_checkprobe_csv(a.out, records, &meta);
        return kExitOk;
    }

    photophysics::PriorSpec prior;
    if (a.prior == "dirac")
        prior = photophysics::PriorSpec::dirac(a.prior_center_mhz);
    else if (a.prior == "uniform")
        prior = photophysics::PriorSpec::uniform(a.prior_center_mhz, a.prior_halfspan_mhz);
    else if (a.prior == "gaussian")
        prior = photophysics::PriorSpec::gaussian(a.prior_center_mhz, a.prior_fwhm_mhz);
    else
        throw CLI::ValidationError("unknown prior: " + a.prior);

    std::vector<double> probe_grid;
    if (a.sweep_points > 0)
        probe_grid = linspace(a.f1_mhz - 0.5 * a.sweep_span_mhz,
                              a.f1_mhz + 0.5 * a.sweep_span_mhz, a.sweep_points);
    const auto run =
        photophysics::simulate_check_probe(em, a.f1_mhz, a.reps, prior, a.seed, probe_grid);
    io::write_checkprobe_csv(a.out, run.records, &meta);
    return kExitOk;
}

// ---- fit diffusion ---------------------------------------------------------

int run_fit_diffusion(const std::string& input, int threshold, const std::string& model_name,
                      double gamma_assumed, double gamma_lifetime, const std::string& band_spec,
                      const std::string& out) {
    json meta_in;
    const auto records = io::read_checkprobe_csv(input, &meta_in);
    std::vector<double> band;
    {
        std::istringstream in(band_spec);
        std::string tok;
        while (std::getline(in, tok, ':')) band.push_back(std::stod(tok));
    }
    if (band.size() != 2 || !(band[0] > 0.0) || !(band[1] >= band[0]))
        throw CLI::ValidationError("--band expects lo:hi linewidth multipliers");
    photophysics::DiffusionModel model;
    if (model_name == "no-recapture")
        model = photophysics::DiffusionModel::no_recapture;
    else if (model_name == "diffusion-only")
        model = photophysics::DiffusionModel::diffusion_only;
    else
        throw CLI::ValidationError("unknown model: " + model_name);

    const auto fit = photophysics::fit_spectral_diffusion(
        records, threshold, model, gamma_assumed, gamma_lifetime, {band[0], band[1]});
    std::vector<double> model_curve(fit.delay_ms.size());
    for (std::size_t i = 0; i < fit.delay_ms.size(); ++i)
        model_curve[i] = photophysics::no_recapture_model(fit.delay_ms[i], fit.gamma_d,
                                                          fit.gamma_i, gamma_assumed,
                                                          fit.fit.value("c0"));
    json result = {{"fit", io::fit_result_to_json(fit.fit, "spectral_diffusion_" + model_name)},
                   {"gamma_d", fit.gamma_d},
                   {"gamma_d_sigma", fit.gamma_d_sigma},
                   {"gamma_i", fit.gamma_i},
                   {"gamma_i_sigma", fit.gamma_i_sigma},
                   {"band_low", fit.band_low},
                   {"band_high", fit.band_high},
                   {"curve",
                    {{"x", fit.delay_ms},
                     {"x_label", "delay_ms"},
                     {"y_data", fit.mean_counts},
                     {"y_sigma", fit.sem_counts},
                     {"y_model", model_curve}}}};
    const json meta = make_meta("fit diffusion", json{{"i", input},
                                                      {"threshold", threshold},
                                                      {"model", model_name},
                                                      {"gamma-assumed-mhz", gamma_assumed},
                                                      {"gamma-lifetime-mhz", gamma_lifetime},
                                                      {"band", band_spec},
                                                      {"o", out},
                                                      {"input_meta", meta_in}});
    return finish_fit_output(out, std::move(result), fit.fit, meta);
}

// ---- fit cp-ple ------------------------------------------------------------

int run_fit_cp_ple(const std::string& input, const std::string& thresholds_spec,
                   double gamma_lifetime, double support_span, double sweep_span,
                   std::size_t sweep_points, double f1_mhz, const std::string& out) {
    json meta_in;
    const auto records = io::read_checkprobe_csv(input, &meta_in);
    // the probe grid comes from the embedded echo unless given explicitly
    if (sweep_points == 0) {
        if (!meta_option(meta_in, "sweep-points", sweep_points) ||
            !meta_option(meta_in, "sweep-span-mhz", sweep_span) ||
            !meta_option(meta_in, "f1-mhz", f1_mhz))
            throw CLI::ValidationError(
                "input carries no sweep echo; pass --sweep-span-mhz/--sweep-points/--f1-mhz");
    }
    if (sweep_points < 3) throw CLI::ValidationError("sweep grid needs >= 3 points");
    const auto grid =
        linspace(f1_mhz - 0.5 * sweep_span, f1_mhz + 0.5 * sweep_span, sweep_points);

    if (support_span <= 0.0) {
        double halfspan = 0.0;
        support_span = meta_option(meta_in, "prior-halfspan-mhz", halfspan) ? 2.0 * halfspan
                                                                            : sweep_span;
    }

    photophysics::CheckProbeRun run;
    run.records = records;
    const auto thresholds = parse_int_range(thresholds_spec);
    const auto set = photophysics::build_threshold_spectra_set(run, grid, thresholds);
    const auto& spectra = set.means;
    const auto fit = photophysics::fit_checkprobe_linewidth(spectra, gamma_lifetime, support_span,
                                                            &set.occupancy);

    json curves = json::array();
    photophysics::SpectrumOptions opt;
    opt.support_span_mhz = support_span;
    for (const auto& [t, sp] : spectra) {
        const auto model = photophysics::checkprobe_spectrum(
            sp.first, t, fit.fit.value("gamma"), fit.fit.value("c0"), fit.fit.value("f1"), opt);
        curves.push_back({{"threshold", t},
                          {"x", sp.first},
                          {"x_label", "probe_detuning_mhz"},
                          {"y_data", sp.second},
                          {"y_model", model.counts}});
    }
    json result = {{"fit", io::fit_result_to_json(fit.fit, "checkprobe_linewidth")},
                   {"ratio", fit.ratio},
                   {"ratio_sigma", fit.ratio_sigma},
                   {"truncation_fraction", fit.truncation_fraction},
                   {"curves", curves}};
    const json meta = make_meta("fit cp-ple", json{{"i", input},
                                                   {"thresholds", thresholds_spec},
                                                   {"gamma-lifetime-mhz", gamma_lifetime},
                                                   {"support-span-mhz", support_span},
                                                   {"sweep-span-mhz", sweep_span},
                                                   {"sweep-points", sweep_points},
                                                   {"f1-mhz", f1_mhz},
                                                   {"o", out},
                                                   {"input_meta", meta_in}});
    return finish_fit_output(out, std::move(result), fit.fit, meta);
}

// ---- fit saturation --------------------------------------------------------

int run_fit_saturation(const std::string& input, const std::string& out) {
    std::vector<std::string> header;
    json meta_in;
    const auto cols = io::read_table_csv(input, &header, &meta_in);
    if (cols.size() < 2) throw CLI::ValidationError("saturation table needs two columns");
    const auto fit = photophysics::saturation_fit(cols[0], cols[1]);

    std::vector<double> model(cols[0].size());
    for (std::size_t i = 0; i < cols[0].size(); ++i)
        model[i] = fit.fit.value("B") * cols[0][i] +
                   fit.fit.value("A") * cols[0][i] / (cols[0][i] + fit.fit.value("p_sat"));
    json result = {{"fit", io::fit_result_to_json(fit.fit, "saturation")},
                   {"rho_at_psat", fit.rho},
                   {"rho_sigma", fit.rho_sigma},
                   {"background_only", fit.background_only},
                   {"curve",
                    {{"x", cols[0]},
                     {"x_label", header.empty() ? "power_uw" : header[0]},
                     {"y_data", cols[1]},
                     {"y_model", model}}}};
    const json meta = make_meta("fit saturation",
                                json{{"i", input}, {"o", out}, {"input_meta", meta_in}});
    return finish_fit_output(out, std::move(result), fit.fit, meta);
}

// ---- fit spin ----------------------------------------------------------------

struct SpinFitInput {
    std::vector<double> x, r, sigma;
};

// Raw sweep records are normalized first; two/three-column tables pass
// through unchanged.
SpinFitInput load_spin_fit_input(const std::string& input, long check_threshold, json* meta_in) {
    std::ifstream probe(input);
    std::string first_line;
    while (std::getline(probe, first_line))
        if (!first_line.empty() && first_line.front() != '#') break;
    SpinFitInput out;
    if (first_line.rfind("sweep_value,rep,check", 0) == 0) {
        const auto records = io::read_spin_csv(input, meta_in);
        const auto pts = spin::normalize_readout(records, check_threshold);
        for (const auto& p : pts) {
            if (p.degenerate) continue;
            out.x.push_back(p.sweep_value);
            out.r.push_back(p.r);
            out.sigma.push_back(p.sigma_r);
        }
        return out;
    }
    const auto cols = io::read_table_csv(input, nullptr, meta_in);
    if (cols.size() < 2) throw CLI::ValidationError("spin fit table needs >= 2 columns");
    out.x = cols[0];
    out.r = cols[1];
    if (cols.size() > 2) out.sigma = cols[2];
    return out;
}

json curve_json(const SpinFitInput& data, const std::function<double(double)>& model,
                const std::string& x_label) {
    std::vector<double> y(data.x.size());
    for (std::size_t i = 0; i < data.x.size(); ++i) y[i] = model(data.x[i]);
    json c = {{"x", data.x}, {"x_label", x_label}, {"y_data", data.r}, {"y_model", y}};
    if (!data.sigma.empty()) c["y_sigma"] = data.sigma;
    return c;
}

int run_fit_spin(const std::string& kind, const std::string& input, long check_threshold,
                 int n_pulses, const std::string& out) {
    json meta_in;
    const auto make_spin_meta = [&] {
        return make_meta("fit spin " + kind, json{{"i", input},
                                                  {"check-threshold", check_threshold},
                                                  {"n-pulses", n_pulses},
                                                  {"o", out},
                                                  {"input_meta", meta_in}});
    };

    if (kind == "scaling") {
        std::vector<std::string> header;
        const auto cols = io::read_table_csv(input, &header, &meta_in);
        if (cols.size() < 2) throw CLI::ValidationError("scaling table needs two columns");
        std::vector<int> n(cols[0].size());
        for (std::size_t i = 0; i < n.size(); ++i)
            n[i] = static_cast<int>(std::lround(cols[0][i]));
        const auto fit = spin::t2_power_law_fit(n, cols[1]);
        std::vector<double> model(n.size());
        for (std::size_t i = 0; i < n.size(); ++i) model[i] = fit.predict(cols[0][i]);
        json result = {{"fit", io::fit_result_to_json(fit.fit, "t2_power_law")},
                       {"alpha", fit.alpha},
                       {"alpha_sigma", fit.alpha_sigma},
                       {"beta_ms", fit.beta},
                       {"beta_sigma_ms", fit.beta_sigma},
                       {"curve",
                        {{"x", cols[0]},
                         {"x_label", "n_pulses"},
                         {"y_data", cols[1]},
                         {"y_model", model}}}};
        return finish_fit_output(out, std::move(result), fit.fit, make_spin_meta());
    }

    const auto data = load_spin_fit_input(input, check_threshold, &meta_in);
    if (data.x.size() < 5) throw CLI::ValidationError("too few usable sweep points");

    if (kind == "rabi") {
        const auto fit = spin::rabi_fit(data.x, data.r, data.sigma);
        const auto& f = fit.fit;
        json result = {{"fit", io::fit_result_to_json(f, "rabi_oscillation")},
                       {"omega_mhz", fit.omega_mhz},
                       {"omega_sigma", fit.omega_sigma},
                       {"pi_time_us", fit.pi_time_us},
                       {"curve", curve_json(data,
                                            [&](double t) {
                                                return f.value("b") +
                                                       f.value("A") *
                                                           std::cos(2.0 * std::numbers::pi *
                                                                        f.value("omega") * t +
                                                                    f.value("phi")) *
                                                           std::exp(-t / f.value("tau"));
                                            },
                                            "duration_us")}};
        return finish_fit_output(out, std::move(result), f, make_spin_meta());
    }
    if (kind == "desr") {
        const auto fit = spin::desr_fit(data.x, data.r, data.sigma);
        const auto& f = fit.fit;
        json result = {{"fit", io::fit_result_to_json(f, "desr_double_gaussian")},
                       {"fhf_mhz", fit.fhf_mhz},
                       {"fhf_sigma", fit.fhf_sigma},
                       {"t2star_us", fit.t2star_us},
                       {"t2star_sigma", fit.t2star_sigma},
                       {"unresolved", fit.unresolved},
                       {"curve", curve_json(data,
                                            [&](double x) {
                                                const double sig =
                                                    f.value("fwhm") / 2.3548200450309493;
                                                const double d1 = (x - f.value("c1")) / sig;
                                                const double d2 = (x - f.value("c2")) / sig;
                                                return f.value("b") +
                                                       f.value("a1") * std::exp(-0.5 * d1 * d1) +
                                                       f.value("a2") * std::exp(-0.5 * d2 * d2);
                                            },
                                            "frequency_mhz")}};
        return finish_fit_output(out, std::move(result), f, make_spin_meta());
    }
    if (kind == "ramsey") {
        const auto fit = spin::ramsey_fit(data.x, data.r, data.sigma);
        const auto& f = fit.fit;
        json result = {{"fit", io::fit_result_to_json(f, "ramsey_two_component")},
                       {"fc_mhz", fit.fc_mhz},
                       {"fc_sigma", fit.fc_sigma},
                       {"fhf_mhz", fit.fhf_mhz},
                       {"fhf_sigma", fit.fhf_sigma},
                       {"t2star_us", fit.t2star_us},
                       {"t2star_sigma", fit.t2star_sigma},
                       {"aliasing_warning", fit.aliasing_warning},
                       {"curve", curve_json(data,
                                            [&](double t) {
                                                const double u = t / f.value("t2star");
                                                const double env = std::exp(-u * u);
                                                const double w0 =
                                                    2.0 * std::numbers::pi *
                                                    (f.value("fc") + 0.5 * f.value("fhf"));
                                                const double w1 =
                                                    2.0 * std::numbers::pi *
                                                    (f.value("fc") - 0.5 * f.value("fhf"));
                                                return f.value("b") +
                                                       env * (f.value("a0") *
                                                                  std::cos(w0 * t +
                                                                           f.value("phi0")) +
                                                              f.value("a1") *
                                                                  std::cos(w1 * t +
                                                                           f.value("phi1")));
                                            },
                                            "tau_us")}};
        return finish_fit_output(out, std::move(result), f, make_spin_meta());
    }
    if (kind == "decay") {
        // sweep values are interpulse delays in us; total time is 2*N*tau in ms
        SpinFitInput scaled = data;
        for (double& t : scaled.x) t = 2.0 * n_pulses * t * 1e-3;
        const auto fit = spin::stretched_decay_fit(scaled.x, scaled.r, scaled.sigma);
        const auto& f = fit.fit;
        json result = {{"fit", io::fit_result_to_json(f, "stretched_decay")},
                       {"t2_ms", fit.t2},
                       {"t2_sigma_ms", fit.t2_sigma},
                       {"n", fit.n},
                       {"n_sigma", fit.n_sigma},
                       {"n_pulses", n_pulses},
                       {"curve", curve_json(scaled,
                                            [&](double t) {
                                                return f.value("b") +
                                                       f.value("A") *
                                                           std::exp(-std::pow(t / f.value("T2"),
                                                                              f.value("n")));
                                            },
                                            "total_time_ms")}};
        return finish_fit_output(out, std::move(result), f, make_spin_meta());
    }
    throw CLI::ValidationError("unknown spin fit kind: " + kind);
}

// ---- sim spin ----------------------------------------------------------------

int run_sim_spin(const std::string& sequence_path, const spin::SpinModel& model, double c0,
                 double ref_block_ms, std::size_t reps, std::uint64_t seed,
                 const std::string& out) {
    const auto sequence = io::read_sequence_file(sequence_path);
    photophysics::EmitterModel em;
    em.c0 = c0;
    em.gamma_mhz = 39.0;
    em.gamma_lifetime_mhz = 26.0;
    spin::SequenceConfig cfg;
    cfg.reference_block_ms = ref_block_ms;
    const auto records = spin::run_spin_sequence(sequence, model, em, reps, seed, cfg);

    std::string sequence_text;
    {
        std::ifstream f(sequence_path);
        std::ostringstream ss;
        ss << f.rdbuf();
        sequence_text = ss.str();
    }
    const json meta = make_meta("sim spin", json{{"sequence", sequence_path},
                                                 {"sequence_text", sequence_text},
                                                 {"rabi-mhz", model.rabi_mhz},
                                                 {"f0-mhz", model.f0_mhz},
                                                 {"fhf-mhz", model.fhf_mhz},
                                                 {"t2star-us", model.t2star_us},
                                                 {"fixed-t2", !model.use_power_law},
                                                 {"t2-beta-ms", model.t2_beta_ms},
                                                 {"t2-alpha", model.t2_alpha},
                                                 {"t2-fixed-ms", model.t2_fixed_ms},
                                                 {"decay-exponent", model.decay_exponent},
                                                 {"contrast", model.readout_contrast},
                                                 {"c0", c0},
                                                 {"ref-block-ms", ref_block_ms},
                                                 {"reps", reps},
                                                 {"seed", seed},
                                                 {"o", out}});
    io::write_spin_csv(out, records, &meta);
    return kExitOk;
}

// ---- sim ple -----------------------------------------------------------------

int run_sim_ple(const survey::PleSynthSettings& st, std::uint64_t seed, const std::string& out,
                const std::string& truth_out) {
    const auto cohort = survey::synthesize_ple_cohort(st, seed);
    const json meta = make_meta("sim ple", json{{"pillars", st.n_pillars},
                                                {"points", st.points},
                                                {"span-ghz", st.span_ghz},
                                                {"max-peaks", st.max_peaks},
                                                {"amp-lo-khz", st.amplitude_lo_khz},
                                                {"amp-hi-khz", st.amplitude_hi_khz},
                                                {"fwhm-lo-mhz", st.fwhm_lo_mhz},
                                                {"fwhm-hi-mhz", st.fwhm_hi_mhz},
                                                {"noise-khz", st.noise_khz},
                                                {"baseline-khz", st.baseline_khz},
                                                {"seed", seed},
                                                {"o", out},
                                                {"truth", truth_out}});
    io::write_ple_csv(out, cohort.spectra, &meta);
    if (!truth_out.empty()) {
        json t = {{"peaks", io::peaks_to_json(cohort.truth)}, {"meta", meta}};
        write_json_file(truth_out, t);
    }
    return kExitOk;
}

// ---- sim g2 ------------------------------------------------------------------

int run_sim_g2(double signal_fraction, double rate_hz, double duration_s, std::uint64_t seed,
               const std::string& out, double bin_ns, double max_tau_ns,
               const std::string& histogram_out) {
    const auto ts = g2::simulate_g2(signal_fraction, rate_hz, duration_s, seed);
    const json meta = make_meta("sim g2", json{{"signal-fraction", signal_fraction},
                                               {"rate-hz", rate_hz},
                                               {"duration-s", duration_s},
                                               {"seed", seed},
                                               {"bin-ns", bin_ns},
                                               {"max-tau-ns", max_tau_ns},
                                               {"o", out},
                                               {"histogram", histogram_out}});
    io::write_timestamps_csv(out, ts, &meta);
    if (!histogram_out.empty()) {
        const auto h = g2::g2_histogram(ts, bin_ns, max_tau_ns);
        std::vector<double> counts(h.counts.begin(), h.counts.end());
        io::write_table_csv(histogram_out, {"tau_ns", "g2", "sigma", "counts"},
                            {h.tau_ns, h.g2, h.sigma, counts}, &meta);
    }
    return kExitOk;
}

// ---- survey ------------------------------------------------------------------

int run_survey_peaks(const std::string& input, const std::string& out, bool with_diagnostics) {
    json meta_in;
    const auto spectra = io::read_ple_csv(input, &meta_in);
    std::map<std::string, std::vector<survey::PlePeak>> peaks;
    json diagnostics = json::object();
    for (const auto& s : spectra) {
        const auto res = survey::detect_ple_peaks(s);
        peaks[s.pillar_id] = res.peaks;
        if (with_diagnostics && !res.diagnostics.empty())
            diagnostics[s.pillar_id] = res.diagnostics;
    }
    json doc = {{"peaks", io::peaks_to_json(peaks)},
                {"meta", make_meta("survey peaks", json{{"i", input},
                                                        {"o", out},
                                                        {"input_meta", meta_in}})}};
    if (with_diagnostics) doc["diagnostics"] = diagnostics;
    write_json_file(out, doc);
    return kExitOk;
}

std::map<std::string, std::vector<survey::PlePeak>> load_peak_inputs(const std::string& input) {
    std::map<std::string, std::vector<survey::PlePeak>> merged;
    const auto load_one = [&merged](const fs::path& p) {
        const json doc = read_json_file(p);
        const json& peaks = doc.contains("peaks") ? doc["peaks"] : doc;
        for (auto& [id, arr] : io::peaks_from_json(peaks)) {
            auto key = id;
            int suffix = 1;
            while (merged.count(key)) key = id + "#" + std::to_string(suffix++);
            merged[key] = arr;
        }
    };
    if (fs::is_directory(input)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(input))
            if (e.path().extension() == ".json") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) load_one(f);
    } else {
        load_one(input);
    }
    return merged;
}

int run_survey_occurrence(const std::string& input, double threshold, const std::string& out) {
    const auto peaks = load_peak_inputs(input);
    const auto stats = survey::occurrence_stats(peaks, threshold);
    json doc = {{"n_pillars", stats.n_pillars},
                {"threshold_khz", stats.threshold_khz},
                {"histogram",
                 {{"0", stats.histogram[0]},
                  {"1", stats.histogram[1]},
                  {"2", stats.histogram[2]},
                  {"3+", stats.histogram[3]}}},
                {"exceedance",
                 {{"thresholds_khz", stats.exceedance_thresholds_khz},
                  {"counts", stats.exceedance_counts}}},
                {"meta", make_meta("survey occurrence",
                                   json{{"i", input}, {"threshold-khz", threshold}, {"o", out}})}};
    write_json_file(out, doc);
    return kExitOk;
}

int run_survey_inhomogeneous(const std::string& input, double threshold, double bin_width,
                             const std::string& out) {
    std::vector<double> centers;
    if (input.size() > 4 && input.substr(input.size() - 4) == ".csv") {
        const auto cols = io::read_table_csv(input);
        if (cols.empty()) throw CLI::ValidationError("empty centers table");
        centers = cols[0];
    } else {
        for (const auto& [id, peaks] : load_peak_inputs(input))
            for (const auto& p : peaks)
                if (p.amplitude_khz >= threshold) centers.push_back(p.center_ghz);
    }
    const auto fit = survey::inhomogeneous_fit(centers, bin_width);
    std::vector<double> model(fit.bin_centers_ghz.size());
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double sig = fit.fwhm_ghz / 2.3548200450309493;
        const double d = (fit.bin_centers_ghz[i] - fit.center_ghz) / sig;
        model[i] = fit.fit.value("amplitude") * std::exp(-0.5 * d * d);
    }
    json result = {{"fit", io::fit_result_to_json(fit.fit, "inhomogeneous_gaussian")},
                   {"center_ghz", fit.center_ghz},
                   {"center_sigma_ghz", fit.center_sigma_ghz},
                   {"fwhm_ghz", fit.fwhm_ghz},
                   {"fwhm_sigma_ghz", fit.fwhm_sigma_ghz},
                   {"n_centers", centers.size()},
                   {"curve",
                    {{"x", fit.bin_centers_ghz},
                     {"x_label", "frequency_ghz"},
                     {"y_data", fit.bin_counts},
                     {"y_model", model}}}};
    const json meta = make_meta("survey inhomogeneous", json{{"i", input},
                                                             {"threshold-khz", threshold},
                                                             {"bin-width-ghz", bin_width},
                                                             {"o", out}});
    return finish_fit_output(out, std::move(result), fit.fit, meta);
}

int run_survey_plmap(const std::string& before_path, const std::string& after_path,
                     const std::string& out, const std::string& scaled_before,
                     const std::string& scaled_after) {
    const auto before = io::read_plmap_csv(before_path);
    const auto after = io::read_plmap_csv(after_path);
    const auto scaled = survey::rescale_pl_maps(before, after);
    const json meta = make_meta("survey plmap", json{{"before", before_path},
                                                     {"after", after_path},
                                                     {"o", out},
                                                     {"scaled-before", scaled_before},
                                                     {"scaled-after", scaled_after}});
    json doc = {{"beta_before", scaled.beta_before},
                {"beta_after", scaled.beta_after},
                {"product", scaled.beta_before * scaled.beta_after},
                {"meta", meta}};
    write_json_file(out, doc);
    if (!scaled_before.empty()) io::write_plmap_csv(scaled_before, scaled.before, &meta);
    if (!scaled_after.empty()) io::write_plmap_csv(scaled_after, scaled.after, &meta);
    return kExitOk;
}

int run_survey_damage(const std::string& input, const std::string& out) {
    json meta_in;
    const auto table = io::read_damage_csv(input, &meta_in);
    const auto fit = survey::amorphization_fit(table);
    json regimes = json::array();
    for (std::size_t i = 0; i < table.energy_uj.size(); ++i)
        regimes.push_back(
            {{"energy_uj", table.energy_uj[i]}, {"regime", survey::to_string(fit.regimes[i])}});
    std::vector<double> fraction(table.energy_uj.size()), model(table.energy_uj.size());
    for (std::size_t i = 0; i < table.energy_uj.size(); ++i) {
        fraction[i] = static_cast<double>(table.damaged[i]) / table.exposed[i];
        model[i] = fit.undamaged
                       ? 0.0
                       : 1.0 / (1.0 + std::exp(-fit.slope * (table.energy_uj[i] - fit.e50_uj)));
    }
    json result = {{"fit", io::fit_result_to_json(fit.fit, "amorphization_logistic")},
                   {"e50_uj", fit.e50_uj},
                   {"e50_sigma_uj", fit.e50_sigma},
                   {"slope_per_uj", fit.slope},
                   {"slope_sigma_per_uj", fit.slope_sigma},
                   {"separable", fit.separable},
                   {"undamaged", fit.undamaged},
                   {"regimes", regimes},
                   {"curve",
                    {{"x", table.energy_uj},
                     {"x_label", "energy_uj"},
                     {"y_data", fraction},
                     {"y_model", model}}},
                   {"meta", make_meta("survey damage", json{{"i", input},
                                                            {"o", out},
                                                            {"input_meta", meta_in}})}};
    write_json_file(out, result);
    return fit.undamaged ? kExitNotConverged : kExitOk;
}

// ---- report ------------------------------------------------------------------

int run_report(const std::string& input_dir, const std::string& out, const std::string& csv_dir) {
    if (!fs::is_directory(input_dir)) throw CLI::ValidationError("-i must be a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(input_dir))
        if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    json bundle = json::object();
    if (!csv_dir.empty()) fs::create_directories(csv_dir);
    for (const auto& f : files) {
        json doc = read_json_file(f);
        const std::string name = f.stem().string();
        const auto emit_curve = [&](const json& curve, const std::string& suffix) {
            if (csv_dir.empty() || !curve.contains("x")) return;
            std::vector<std::string> header{curve.value("x_label", std::string("x")), "y_data"};
            std::vector<std::vector<double>> cols{curve["x"].get<std::vector<double>>(),
                                                  curve["y_data"].get<std::vector<double>>()};
            if (curve.contains("y_sigma")) {
                header.push_back("y_sigma");
                cols.push_back(curve["y_sigma"].get<std::vector<double>>());
            }
            if (curve.contains("y_model")) {
                header.push_back("y_model");
                cols.push_back(curve["y_model"].get<std::vector<double>>());
            }
            io::write_table_csv(fs::path(csv_dir) / (name + suffix + ".csv"), header, cols);
        };
        if (doc.contains("curve")) {
            emit_curve(doc["curve"], "");
            doc.erase("curve");
        }
        if (doc.contains("curves")) {
            int k = 0;
            for (const auto& c : doc["curves"]) {
                emit_curve(c, "_" + std::to_string(c.contains("threshold")
                                                       ? c["threshold"].get<int>()
                                                       : k));
                ++k;
            }
            doc.erase("curves");
        }
        bundle[name] = std::move(doc);
    }
    json doc = {{"reports", bundle},
                {"meta", make_meta("report", json{{"i", input_dir},
                                                  {"o", out},
                                                  {"csv-dir", csv_dir},
                                                  {"n_inputs", files.size()}})}};
    write_json_file(out, doc);
    return kExitOk;
}

// Expand `--config file.json` (an output meta echo) into the equivalent
// argument list; flags given explicitly on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config_path.empty()) return rest;

    json cfg = read_json_file(config_path);
    if (cfg.contains("meta")) cfg = cfg["meta"]; // accept whole output files
    std::vector<std::string> out;
    {
        std::istringstream in(cfg.at("command").get<std::string>());
        std::string word;
        while (in >> word) out.push_back(word);
    }
    std::set<std::string> given;
    for (const auto& a : rest)
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));
    for (const auto& [key, value] : cfg.at("options").items()) {
        if (key == "input_meta" || key == "sequence_text" || given.count(key)) continue;
        std::string v;
        if (value.is_string())
            v = value.get<std::string>();
        else if (value.is_boolean())
            v = value.get<bool>() ? "1" : "0";
        else if (value.is_number_integer())
            v = std::to_string(value.get<long long>());
        else if (value.is_number_unsigned())
            v = std::to_string(value.get<unsigned long long>());
        else
            v = io::format_double(value.get<double>());
        if (v.empty()) continue;
        out.push_back("--" + key + "=" + v); // single-letter keys all have long aliases
    }
    for (const auto& a : rest)
        if (a.rfind("-", 0) == 0) out.push_back(a);
    return out;
}

} // namespace

int run(const std::vector<std::string>& raw_args) {
    CLI::App app{"Quantum-emitter spectroscopy and spin-coherence toolkit"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("sim", "forward simulators");
    sim->require_subcommand(1);

    SimCheckProbeArgs cp;
    auto* sim_cp = sim->add_subcommand("check-probe", "check/probe photon-counting simulator");
    sim_cp->add_option("--gamma-mhz", cp.gamma_mhz, "homogeneous FWHM linewidth");
    sim_cp->add_option("--c0", cp.c0, "on-resonance mean counts per block");
    sim_cp->add_option("--gamma-lifetime-mhz", cp.gamma_lifetime_mhz, "lifetime-limited FWHM");
    sim_cp->add_option("--f1-mhz", cp.f1_mhz, "check laser detuning");
    sim_cp->add_option("--reps", cp.reps, "number of block pairs");
    sim_cp->add_option("--seed", cp.seed, "top-level random seed");
    sim_cp->add_option("--prior", cp.prior, "emitter frequency prior: dirac|uniform|gaussian");
    sim_cp->add_option("--prior-center-mhz", cp.prior_center_mhz);
    sim_cp->add_option("--prior-halfspan-mhz", cp.prior_halfspan_mhz);
    sim_cp->add_option("--prior-fwhm-mhz", cp.prior_fwhm_mhz);
    sim_cp->add_option("--sweep-span-mhz", cp.sweep_span_mhz, "probe sweep span");
    sim_cp->add_option("--sweep-points", cp.sweep_points, "probe sweep points (0 = fixed probe)");
    sim_cp->add_option("--delays-ms", cp.delays_ms,
                       "delay grid start:step:stop; enables the delay-scan mode");
    sim_cp->add_option("--gamma-d", cp.gamma_d, "diffusion rate (linewidths/ms), delay mode");
    sim_cp->add_option("--gamma-i", cp.gamma_i, "ionization rate (1/ms), delay mode");
    sim_cp->add_option("-o,--o", cp.out, "output CSV")->required();

    spin::SpinModel spin_model;
    std::string spin_sequence;
    double spin_c0 = 800.0, spin_ref_ms = 2.0;
    std::size_t spin_reps = 200;
    std::uint64_t spin_seed = 1;
    std::string spin_out;
    bool fixed_t2 = false;
    auto* sim_spin = sim->add_subcommand("spin", "pulse-sequence executor");
    sim_spin->add_option("--sequence", spin_sequence, "sequence descriptor file")->required();
    sim_spin->add_option("--rabi-mhz", spin_model.rabi_mhz);
    sim_spin->add_option("--f0-mhz", spin_model.f0_mhz);
    sim_spin->add_option("--fhf-mhz", spin_model.fhf_mhz);
    sim_spin->add_option("--t2star-us", spin_model.t2star_us);
    sim_spin->add_flag("--fixed-t2", fixed_t2, "use the fixed T2 instead of the power law");
    sim_spin->add_option("--t2-beta-ms", spin_model.t2_beta_ms);
    sim_spin->add_option("--t2-alpha", spin_model.t2_alpha);
    sim_spin->add_option("--t2-fixed-ms", spin_model.t2_fixed_ms);
    sim_spin->add_option("--decay-exponent", spin_model.decay_exponent);
    sim_spin->add_option("--contrast", spin_model.readout_contrast);
    sim_spin->add_option("--c0", spin_c0, "emitter counts per reference block");
    sim_spin->add_option("--ref-block-ms", spin_ref_ms);
    sim_spin->add_option("--reps", spin_reps, "repetitions per sweep value");
    sim_spin->add_option("--seed", spin_seed);
    sim_spin->add_option("-o,--o", spin_out, "output CSV")->required();

    survey::PleSynthSettings ple;
    std::uint64_t ple_seed = 1;
    std::string ple_out, ple_truth;
    auto* sim_ple = sim->add_subcommand("ple", "synthetic PLE cohort");
    sim_ple->add_option("--pillars", ple.n_pillars);
    sim_ple->add_option("--points", ple.points);
    sim_ple->add_option("--span-ghz", ple.span_ghz);
    sim_ple->add_option("--max-peaks", ple.max_peaks);
    sim_ple->add_option("--amp-lo-khz", ple.amplitude_lo_khz);
    sim_ple->add_option("--amp-hi-khz", ple.amplitude_hi_khz);
    sim_ple->add_option("--fwhm-lo-mhz", ple.fwhm_lo_mhz);
    sim_ple->add_option("--fwhm-hi-mhz", ple.fwhm_hi_mhz);
    sim_ple->add_option("--noise-khz", ple.noise_khz);
    sim_ple->add_option("--baseline-khz", ple.baseline_khz);
    sim_ple->add_option("--seed", ple_seed);
    sim_ple->add_option("-o,--o", ple_out, "output CSV")->required();
    sim_ple->add_option("--truth", ple_truth, "ground-truth peaks JSON");

    double g2_fraction = 0.9, g2_rate = 1e6, g2_duration = 1.0, g2_bin = 0.4, g2_tau = 50.0;
    std::uint64_t g2_seed = 1;
    std::string g2_out, g2_hist;
    auto* sim_g2 = sim->add_subcommand("g2", "two-channel photon stream simulator");
    sim_g2->add_option("--signal-fraction", g2_fraction)->check(CLI::Range(0.0, 1.0));
    sim_g2->add_option("--rate-hz", g2_rate);
    sim_g2->add_option("--duration-s", g2_duration);
    sim_g2->add_option("--seed", g2_seed);
    sim_g2->add_option("--bin-ns", g2_bin);
    sim_g2->add_option("--max-tau-ns", g2_tau);
    sim_g2->add_option("-o,--o", g2_out, "timestamps CSV")->required();
    sim_g2->add_option("--histogram", g2_hist, "also write the normalized histogram CSV");

    auto* fit = app.add_subcommand("fit", "model fits");
    fit->require_subcommand(1);

    std::string fd_in, fd_model = "no-recapture", fd_band = "1:3", fd_out;
    int fd_threshold = 1;
    double fd_gamma = 36.0, fd_lifetime = 26.0;
    auto* fit_diff = fit->add_subcommand("diffusion", "spectral-diffusion delay-scan fit");
    fit_diff->add_option("-i,--i", fd_in)->required();
    fit_diff->add_option("--threshold", fd_threshold);
    fit_diff->add_option("--model", fd_model, "no-recapture|diffusion-only");
    fit_diff->add_option("--gamma-assumed-mhz", fd_gamma);
    fit_diff->add_option("--gamma-lifetime-mhz", fd_lifetime);
    fit_diff->add_option("--band", fd_band, "linewidth band multipliers lo:hi");
    fit_diff->add_option("-o,--o", fd_out)->required();

    std::string cpp_in, cpp_thresholds = "1:17", cpp_out;
    double cpp_lifetime = 26.0, cpp_support = 0.0, cpp_span = 0.0, cpp_f1 = 0.0;
    std::size_t cpp_points = 0;
    auto* fit_cpple = fit->add_subcommand("cp-ple", "threshold-swept linewidth fit");
    fit_cpple->add_option("-i,--i", cpp_in)->required();
    fit_cpple->add_option("--thresholds", cpp_thresholds, "e.g. 1:17");
    fit_cpple->add_option("--gamma-lifetime-mhz", cpp_lifetime);
    fit_cpple->add_option("--support-span-mhz", cpp_support,
                          "density support (0: from the input echo)");
    fit_cpple->add_option("--sweep-span-mhz", cpp_span, "probe grid span (0: from the input echo)");
    fit_cpple->add_option("--sweep-points", cpp_points,
                          "probe grid points (0: from the input echo)");
    fit_cpple->add_option("--f1-mhz", cpp_f1);
    fit_cpple->add_option("-o,--o", cpp_out)->required();

    std::string sat_in, sat_out;
    auto* fit_sat = fit->add_subcommand("saturation", "saturation-plus-background fit");
    fit_sat->add_option("-i,--i", sat_in)->required();
    fit_sat->add_option("-o,--o", sat_out)->required();

    std::string sp_kind, sp_in, sp_out;
    long sp_threshold = 1;
    int sp_npulses = 1;
    auto* fit_spin = fit->add_subcommand("spin", "spin sweep fits");
    fit_spin->add_option("kind", sp_kind, "rabi|desr|ramsey|decay|scaling")->required();
    fit_spin->add_option("-i,--i", sp_in)->required();
    fit_spin->add_option("--check-threshold", sp_threshold, "raw-record normalization threshold");
    fit_spin->add_option("--n-pulses", sp_npulses, "refocusing pulses (decay time axis)");
    fit_spin->add_option("-o,--o", sp_out)->required();

    auto* survey_cmd = app.add_subcommand("survey", "PLE survey analysis");
    survey_cmd->require_subcommand(1);

    std::string pk_in, pk_out;
    bool pk_diag = false;
    auto* survey_peaks = survey_cmd->add_subcommand("peaks", "detect peaks in PLE spectra");
    survey_peaks->add_option("-i,--i", pk_in)->required();
    survey_peaks->add_option("-o,--o", pk_out)->required();
    survey_peaks->add_flag("--diagnostics", pk_diag);

    std::string oc_in, oc_out;
    double oc_threshold = 0.3;
    auto* survey_occ = survey_cmd->add_subcommand("occurrence", "per-pillar peak statistics");
    survey_occ->add_option("-i,--i", oc_in, "peaks JSON file or directory")->required();
    survey_occ->add_option("--threshold-khz", oc_threshold);
    survey_occ->add_option("-o,--o", oc_out)->required();

    std::string ih_in, ih_out;
    double ih_threshold = 0.0, ih_bin = 2.0;
    auto* survey_inh = survey_cmd->add_subcommand("inhomogeneous", "ensemble distribution fit");
    survey_inh->add_option("-i,--i", ih_in, "peaks JSON/directory or centers CSV")->required();
    survey_inh->add_option("--threshold-khz", ih_threshold);
    survey_inh->add_option("--bin-width-ghz", ih_bin);
    survey_inh->add_option("-o,--o", ih_out)->required();

    std::string pm_before, pm_after, pm_out, pm_sb, pm_sa;
    auto* survey_pm = survey_cmd->add_subcommand("plmap", "before/after map rescaling");
    survey_pm->add_option("--before", pm_before)->required();
    survey_pm->add_option("--after", pm_after)->required();
    survey_pm->add_option("-o,--o", pm_out)->required();
    survey_pm->add_option("--scaled-before", pm_sb);
    survey_pm->add_option("--scaled-after", pm_sa);

    std::string dm_in, dm_out;
    auto* survey_dm = survey_cmd->add_subcommand("damage", "amorphization threshold fit");
    survey_dm->add_option("-i,--i", dm_in)->required();
    survey_dm->add_option("-o,--o", dm_out)->required();

    std::string rp_in, rp_out, rp_csv;
    auto* report = app.add_subcommand("report", "bundle fit outputs and plot-ready CSVs");
    report->add_option("-i,--i", rp_in, "directory of fit JSON files")->required();
    report->add_option("-o,--o", rp_out)->required();
    report->add_option("--csv-dir", rp_csv);

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim_cp->parsed()) return run_sim_check_probe(cp);
        if (sim_spin->parsed()) {
            spin_model.use_power_law = !fixed_t2;
            return run_sim_spin(spin_sequence, spin_model, spin_c0, spin_ref_ms, spin_reps,
                                spin_seed, spin_out);
        }
        if (sim_ple->parsed()) return run_sim_ple(ple, ple_seed, ple_out, ple_truth);
        if (sim_g2->parsed())
            return run_sim_g2(g2_fraction, g2_rate, g2_duration, g2_seed, g2_out, g2_bin, g2_tau,
                              g2_hist);
        if (fit_diff->parsed())
            return run_fit_diffusion(fd_in, fd_threshold, fd_model, fd_gamma, fd_lifetime,
                                     fd_band, fd_out);
        if (fit_cpple->parsed())
            return run_fit_cp_ple(cpp_in, cpp_thresholds, cpp_lifetime, cpp_support, cpp_span,
                                  cpp_points, cpp_f1, cpp_out);
        if (fit_sat->parsed()) return run_fit_saturation(sat_in, sat_out);
        if (fit_spin->parsed())
            return run_fit_spin(sp_kind, sp_in, sp_threshold, sp_npulses, sp_out);
        if (survey_peaks->parsed()) return run_survey_peaks(pk_in, pk_out, pk_diag);
        if (survey_occ->parsed()) return run_survey_occurrence(oc_in, oc_threshold, oc_out);
        if (survey_inh->parsed())
            return run_survey_inhomogeneous(ih_in, ih_threshold, ih_bin, ih_out);
        if (survey_pm->parsed())
            return run_survey_plmap(pm_before, pm_after, pm_out, pm_sb, pm_sa);
        if (survey_dm->parsed()) return run_survey_damage(dm_in, dm_out);
        if (report->parsed()) return run_report(rp_in, rp_out, rp_csv);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace qspec::cli
