#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "decoh/coherence.hpp"
#include "decoh/errors.hpp"
#include "decoh/io.hpp"
#include "decoh/oracle.hpp"
#include "decoh/sequences.hpp"
#include "decoh/spectra.hpp"
#include "decoh/trap.hpp"

using namespace decoh;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string format = "csv";
    std::string out;
    std::string config;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", c.out, "Output file (default: standard output)");
    sub->add_option("--config", c.config, "Config file (key = value lines or a JSON object)");
}

// Fills options that were not given on the command line from the config file.
void apply_config(CLI::App* sub, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : load_config(path)) {
        if (key == "config") continue;
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw ConfigError("config key '" + key + "' is not an option of " + sub->get_name());
        }
        if (opt->count() > 0) continue;
        if (opt->get_expected_max() == 0) {
            if (value == "true" || value == "1") opt->add_result("true");
            continue;
        }
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }
}

// Required options may come from the command line or the config file.
void require_options(CLI::App* sub) {
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_group() == "Required" && opt->count() == 0) {
            throw ConfigError(opt->get_name() + " is required (command line or config file)");
        }
    }
}

json base_provenance(const std::string& command) {
    json p;
    p["tool"] = "decoh";
    p["version"] = kVersion;
    p["command"] = command;
    return p;
}

std::string render(const Common& c, const json& prov, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
    if (c.format == "csv") return render_csv(prov, header, rows);
    json j = prov;
    auto& data = j["data"] = json::array();
    for (const auto& row : rows) {
        json r;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (std::isfinite(row[i])) {
                r[header[i]] = row[i];
            } else {
                r[header[i]] = nullptr;
            }
        }
        data.push_back(r);
    }
    return j.dump(2) + "\n";
}

PowerSpectrum resolve_spectrum(const std::string& text, double calibrate_t2, json& prov) {
    PowerSpectrum s = parse_spectrum(text);
    prov["spectrum_spec"] = text;
    if (calibrate_t2 > 0.0) {
        s = calibrate_to_fid_t2(s, calibrate_t2);
        prov["calibrated_fid_t2_s"] = calibrate_t2;
    }
    prov["spectrum"] = s.id();
    return s;
}

void write_gnuplot(const std::string& path, const std::string& data_path, const std::string& xlabel,
                   const std::string& ylabel, int x_col, int y_col, bool logscale) {
    if (path.empty()) return;
    if (data_path.empty() || data_path == "-") throw ConfigError("--gnuplot needs --out to name the data file");
    std::ostringstream g;
    g << "set datafile separator ','\n";
    g << "set key autotitle columnhead\n";
    g << "set xlabel '" << xlabel << "'\n";
    g << "set ylabel '" << ylabel << "'\n";
    if (logscale) g << "set logscale x\n";
    g << "plot '" << data_path << "' using " << x_col << ":" << y_col << " with lines\n";
    write_output(path, g.str());
}

struct CurveArgs {
    Common c;
    std::string spectrum;
    std::string seq = "fid";
    std::string grid;
    double tol = kDefaultCurveTol;
    double calibrate_t2 = 0.0;
    std::string gnuplot;
};

int cmd_w_curve(const CurveArgs& a) {
    json prov = base_provenance("w-curve");
    const PowerSpectrum s = resolve_spectrum(a.spectrum, a.calibrate_t2, prov);
    const PulseSequence seq = parse_sequence(a.seq);
    const auto times = parse_time_grid(a.grid);
    prov["sequence"] = seq.id();
    prov["time_grid"] = a.grid;
    prov["tol"] = a.tol;
    const auto curve = decoherence_curve(s, seq, times, a.tol);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < curve.times.size(); ++i) rows.push_back({curve.times[i], curve.w[i]});
    write_output(a.c.out, render(a.c, prov, {"t_s", "w"}, rows));
    if (a.c.format == "csv") write_gnuplot(a.gnuplot, a.c.out, "t (s)", "W", 1, 2, false);
    return kExitOk;
}

struct ScanArgs {
    Common c;
    std::string spectrum;
    std::string family = "cpmg";
    std::string n_list;
    double t_max = 5000.0;
    double tol = kDefaultScanTol;
    double calibrate_t2 = 0.0;
    std::string gnuplot;
};

int cmd_t2_scan(const ScanArgs& a) {
    json prov = base_provenance("t2-scan");
    const PowerSpectrum s = resolve_spectrum(a.spectrum, a.calibrate_t2, prov);
    const Family family = family_from_string(a.family);
    if (family == Family::fid || family == Family::custom) throw ConfigError("t2-scan needs a pulsed family");
    const auto ns = parse_int_list(a.n_list);
    prov["family"] = a.family;
    prov["n"] = a.n_list;
    prov["t_max_s"] = a.t_max;
    prov["tol"] = a.tol;

    const auto fid_result = coherence_time(s, fid(), a.t_max, a.tol);
    if (!fid_result.converged) throw NumericalError("FID coherence does not decay to 1/e before t_max");
    prov["t2_fid_s"] = fid_result.t2;

    const auto scan = pulse_scan(s, family, ns, a.t_max, a.tol);
    std::vector<std::vector<double>> rows;
    json notes = json::array();
    bool failed = false;
    for (const auto& e : scan) {
        double t2 = std::nan("");
        if (!e.result) {
            failed = true;
            notes.push_back("n=" + std::to_string(e.n) + ": " + e.error);
        } else if (!e.result->converged) {
            notes.push_back("n=" + std::to_string(e.n) + ": no 1/e crossing before t_max");
        } else {
            t2 = e.result->t2;
            if (!e.result->monotone) notes.push_back("n=" + std::to_string(e.n) + ": W not monotone before crossing");
        }
        rows.push_back({static_cast<double>(e.n), t2, t2 / fid_result.t2});
    }
    if (!notes.empty()) prov["notes"] = notes;
    write_output(a.c.out, render(a.c, prov, {"n", "t2_s", "ratio_to_fid"}, rows));
    if (a.c.format == "csv") write_gnuplot(a.gnuplot, a.c.out, "pulses", "T2 (s)", 1, 2, false);
    if (failed) {
        std::cerr << "decoh: some scan points failed; see notes in the output\n";
        return kExitNumerical;
    }
    return kExitOk;
}

struct SeqArgs {
    Common c;
    std::string seq;
};

int cmd_sequence_table(const SeqArgs& a) {
    const PulseSequence seq = parse_sequence(a.seq);
    json prov = base_provenance("sequence-table");
    prov["sequence"] = seq.id();
    if (a.c.format == "json") {
        json j = prov;
        j["pulses"] = seq.to_json();
        write_output(a.c.out, j.dump(2) + "\n");
        return kExitOk;
    }
    std::vector<std::vector<double>> rows;
    const auto fr = seq.fractions();
    for (std::size_t k = 0; k < fr.size(); ++k) rows.push_back({static_cast<double>(k + 1), fr[k]});
    write_output(a.c.out, render_csv(prov, {"k", "fraction"}, rows));
    return kExitOk;
}

struct FilterArgs {
    Common c;
    std::string seq;
    std::string grid = "0:100:0.1";
    bool closed_form = false;
};

int cmd_filter_dump(const FilterArgs& a) {
    const PulseSequence seq = parse_sequence(a.seq);
    const auto xs = parse_time_grid(a.grid);
    json prov = base_provenance("filter-dump");
    prov["sequence"] = seq.id();
    prov["x_grid"] = a.grid;
    std::vector<std::string> header{"x", "F"};
    const bool with_closed = a.closed_form && seq.family() != Family::custom;
    const int order = seq.family() == Family::cdd ? seq.cdd_level().value_or(0) : static_cast<int>(seq.n_pulses());
    if (with_closed) header.push_back("F_closed");
    std::vector<std::vector<double>> rows;
    for (double x : xs) {
        std::vector<double> row{x, filter_generic(seq, x)};
        if (with_closed) {
            try {
                row.push_back(filter_closed_form(seq.family(), order, x, ClosedFormVariant::repaired));
            } catch (const DomainError&) {
                row.push_back(std::nan(""));
            }
        }
        rows.push_back(std::move(row));
    }
    write_output(a.c.out, render(a.c, prov, header, rows));
    return kExitOk;
}

struct TrapArgs {
    Common c;
    std::string preset = kDefaultTrapPreset;
    std::string trap_data;
    std::string trap_config;
    std::optional<double> intensity;
    double gamma_amp = 10e-9;
    double noise_freq = 50.0;
    double b_z = 1e-4;
};

int cmd_trap_shift(const TrapArgs& a) {
    json prov = base_provenance("trap-shift");
    TrapConfig cfg;
    if (!a.trap_config.empty()) {
        cfg = TrapConfig::from_json(load_trap_data(a.trap_config));
        prov["trap_config"] = a.trap_config;
    } else {
        const json data = a.trap_data.empty() ? builtin_trap_data() : load_trap_data(a.trap_data);
        cfg = trap_preset(a.preset, data);
        prov["preset"] = a.preset;
    }
    if (a.intensity) {
        if (!(*a.intensity >= 0.0)) throw ConfigError("--intensity must be >= 0");
        cfg.peak_intensity = *a.intensity;
    }
    const auto shift = differential_light_shift(cfg);
    const double zeeman_diff = zeeman_splitting(cfg.gf2, cfg.mf2, a.b_z) - zeeman_splitting(cfg.gf1, cfg.mf1, a.b_z);
    const double ratio = adiabaticity_ratio(cfg, a.gamma_amp, a.noise_freq);

    json j = prov;
    j["config"] = cfg.to_json();
    j["e_l_rad_s"] = shift.e_l;
    j["e_l_hz"] = shift.e_l / units::two_pi;
    j["e_total_rad_s"] = shift.e_total;
    j["e_total_hz"] = shift.e_total / units::two_pi;
    j["zeeman_differential_rad_s"] = zeeman_diff;
    j["b_z_t"] = a.b_z;
    j["pointing_amplitude_m"] = a.gamma_amp;
    j["pointing_noise_freq_hz"] = a.noise_freq;
    j["adiabaticity_ratio"] = ratio;
    if (a.c.format == "json") {
        write_output(a.c.out, j.dump(2) + "\n");
        return kExitOk;
    }
    std::string out;
    for (const auto& [k, v] : prov.items()) out += "# " + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    out += "quantity,value\n";
    for (const char* key : {"e_l_rad_s", "e_l_hz", "e_total_rad_s", "e_total_hz", "zeeman_differential_rad_s",
                            "adiabaticity_ratio", "b_z_t", "pointing_amplitude_m", "pointing_noise_freq_hz"}) {
        out += std::string(key) + "," + format_double(j[key].get<double>()) + "\n";
    }
    out += "peak_intensity_w_m2," + format_double(cfg.peak_intensity) + "\n";
    write_output(a.c.out, out);
    return kExitOk;
}

struct McArgs {
    Common c;
    std::string spectrum;
    std::string seq = "fid";
    std::string times;
    std::size_t trials = 2000;
    std::uint64_t seed = 1;
    double dt = 0.0;
    unsigned threads = 0;
    double tol = kDefaultCurveTol;
    double calibrate_t2 = 0.0;
    std::string trace_out;
};

int cmd_mc_compare(const McArgs& a) {
    json prov = base_provenance("mc-compare");
    const PowerSpectrum s = resolve_spectrum(a.spectrum, a.calibrate_t2, prov);
    const PulseSequence seq = parse_sequence(a.seq);
    std::vector<double> ts;
    if (a.times.find(':') != std::string::npos) {
        ts = parse_time_grid(a.times);
        if (!ts.empty() && ts.front() == 0.0) ts.erase(ts.begin());
    } else {
        for (const auto& item : CLI::detail::split(a.times, ',')) {
            try {
                ts.push_back(std::stod(item));
            } catch (const std::logic_error&) {
                throw ConfigError("cannot parse time '" + item + "'");
            }
        }
    }
    McOptions opt;
    opt.trials = a.trials;
    opt.seed = a.seed;
    opt.dt = a.dt;
    opt.threads = a.threads;
    const auto rep = compare_mc_spectral(s, seq, ts, opt, a.tol);

    if (!a.trace_out.empty()) {
        const double dt = a.dt > 0.0 ? a.dt : 0.125 / s.f_uv();
        const auto trace = synthesize_noise(s, rep.rows.back().t_eff, dt, a.seed);
        std::ostringstream os;
        trace.write_csv(os);
        write_output(a.trace_out, os.str());
    }

    if (a.c.format == "json") {
        json j = prov;
        j["sequence"] = seq.id();
        j["report"] = rep.to_json();
        write_output(a.c.out, j.dump(2) + "\n");
    } else {
        prov["sequence"] = seq.id();
        prov["trials"] = rep.trials;
        prov["seed"] = rep.seed;
        prov["dt_s"] = rep.dt;
        std::vector<std::vector<double>> rows;
        for (const auto& r : rep.rows) {
            rows.push_back({r.t, r.t_eff, r.w_mc, r.std_error, r.w_spectral, r.z, r.flagged ? 1.0 : 0.0});
        }
        write_output(a.c.out, render_csv(prov, {"t_s", "t_eff_s", "w_mc", "stderr", "w_spectral", "z", "flagged"}, rows));
    }
    if (!rep.all_pass()) {
        std::cerr << "decoh: Monte Carlo and spectral results disagree beyond |z| = " << rep.z_limit << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Qubit dephasing under classical noise and dynamical decoupling"};
    app.set_version_flag("--version", std::string("decoh ") + kVersion);
    app.require_subcommand(1);

    CurveArgs curve;
    auto* w = app.add_subcommand("w-curve", "Decoherence function W(t) on a time grid");
    add_common(w, curve.c);
    w->add_option("--spectrum", curve.spectrum, "Noise spectrum")->group("Required");
    w->add_option("--seq", curve.seq, "Pulse sequence, e.g. cpmg:6, cdd:l=3, custom:0.25,0.75");
    w->add_option("--t", curve.grid, "Time grid start:stop:step in seconds")->group("Required");
    w->add_option("--tol", curve.tol, "Relative tolerance on the dephasing exponent");
    w->add_option("--calibrate-t2", curve.calibrate_t2, "Rescale the spectrum so FID T2 equals this (s)");
    w->add_option("--gnuplot", curve.gnuplot, "Also write a gnuplot script to this path");

    ScanArgs scan;
    auto* t2 = app.add_subcommand("t2-scan", "Coherence time versus pulse count");
    add_common(t2, scan.c);
    t2->add_option("--spectrum", scan.spectrum, "Noise spectrum")->group("Required");
    t2->add_option("--family", scan.family, "Sequence family (cdd counts are levels)");
    t2->add_option("--n", scan.n_list, "Pulse counts, e.g. 1..50 or 5,6 or 10..100/10")->group("Required");
    t2->add_option("--t-max", scan.t_max, "Longest time searched (s)");
    t2->add_option("--tol", scan.tol, "Relative tolerance on the dephasing exponent");
    t2->add_option("--calibrate-t2", scan.calibrate_t2, "Rescale the spectrum so FID T2 equals this (s)");
    t2->add_option("--gnuplot", scan.gnuplot, "Also write a gnuplot script to this path");

    SeqArgs seqa;
    auto* st = app.add_subcommand("sequence-table", "List normalized pulse times");
    add_common(st, seqa.c);
    st->add_option("--seq", seqa.seq, "Pulse sequence")->group("Required");

    FilterArgs fa;
    auto* fd = app.add_subcommand("filter-dump", "Filter function F(x) on a grid of x = omega t");
    add_common(fd, fa.c);
    fd->add_option("--seq", fa.seq, "Pulse sequence")->group("Required");
    fd->add_option("--x", fa.grid, "Grid start:stop:step");
    fd->add_flag("--closed-form", fa.closed_form, "Add the closed-form column for catalog families");

    TrapArgs ta;
    auto* ts = app.add_subcommand("trap-shift", "Differential light shift and trap diagnostics");
    add_common(ts, ta.c);
    ts->add_option("--preset", ta.preset, "Trap preset name");
    ts->add_option("--trap-data", ta.trap_data, "Alternative atom/preset data file (JSON)");
    ts->add_option("--trap-config", ta.trap_config, "Explicit trap configuration (JSON)");
    ts->add_option("--intensity", ta.intensity, "Override peak intensity (W/m^2)");
    ts->add_option("--gamma-amp", ta.gamma_amp, "Beam pointing amplitude (m)");
    ts->add_option("--noise-freq", ta.noise_freq, "Beam pointing noise frequency (Hz)");
    ts->add_option("--bz", ta.b_z, "Bias field for the Zeeman check (T)");

    McArgs ma;
    auto* mc = app.add_subcommand("mc-compare", "Monte Carlo versus spectral decoherence");
    add_common(mc, ma.c);
    ma.c.format = "json";
    mc->add_option("--spectrum", ma.spectrum, "Noise spectrum")->group("Required");
    mc->add_option("--seq", ma.seq, "Pulse sequence");
    mc->add_option("--t", ma.times, "Times: comma list or start:stop:step (s)")->group("Required");
    mc->add_option("--trials", ma.trials, "Noise realizations");
    mc->add_option("--seed", ma.seed, "Random seed");
    mc->add_option("--dt", ma.dt, "Sample step (s); default 1/(8 f_uv)");
    mc->add_option("--threads", ma.threads, "Worker threads (0 = all cores)");
    mc->add_option("--tol", ma.tol, "Relative tolerance of the spectral side");
    mc->add_option("--calibrate-t2", ma.calibrate_t2, "Rescale the spectrum so FID T2 equals this (s)");
    mc->add_option("--trace-out", ma.trace_out, "Write one noise realization as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (w->parsed()) {
            apply_config(w, curve.c.config);
            require_options(w);
            return cmd_w_curve(curve);
        }
        if (t2->parsed()) {
            apply_config(t2, scan.c.config);
            require_options(t2);
            return cmd_t2_scan(scan);
        }
        if (st->parsed()) {
            apply_config(st, seqa.c.config);
            require_options(st);
            return cmd_sequence_table(seqa);
        }
        if (fd->parsed()) {
            apply_config(fd, fa.c.config);
            require_options(fd);
            return cmd_filter_dump(fa);
        }
        if (ts->parsed()) {
            apply_config(ts, ta.c.config);
            require_options(ts);
            return cmd_trap_shift(ta);
        }
        if (mc->parsed()) {
            apply_config(mc, ma.c.config);
            require_options(mc);
            return cmd_mc_compare(ma);
        }
    } catch (const ConfigError& e) {
        std::cerr << "decoh: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CLI::Error& e) {
        std::cerr << "decoh: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "decoh: configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "decoh: numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const DomainError& e) {
        std::cerr << "decoh: numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitConfig;
}
