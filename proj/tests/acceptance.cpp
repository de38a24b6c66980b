#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <iostream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <CLI11.hpp>

#include "decoh/coherence.hpp"
#include "decoh/io.hpp"
#include "decoh/oracle.hpp"
#include "decoh/sequences.hpp"
#include "decoh/spectra.hpp"
#include "decoh/trap.hpp"

using namespace decoh;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string title;
    double time_limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

PowerSpectrum paper_spectrum() { return parse_spectrum(kYagPresetName); }

PowerSpectrum calibrated() { return calibrate_to_fid_t2(paper_spectrum(), 1.0, 1e-8); }

double t2_of(const PowerSpectrum& s, const PulseSequence& q) {
    const auto r = coherence_time(s, q, 5000.0, kDefaultScanTol);
    return r.converged ? r.t2 : NAN;
}

Outcome white_noise() {
    const double s0 = 16.0;
    const auto s = PowerSpectrum::white(s0, 1e-4, 1e4);
    double worst = 0.0;
    for (double c : {0.1, 0.5, 1.0, 2.0}) {
        const double t = c * 4.0 / s0;
        worst = std::max(worst, std::abs(decoherence_at(s, fid(), t) - std::exp(-s0 * t / 4.0)));
    }
    return {worst <= 1e-4, "S0 = 16, max |W - exp(-S0 t/4)| = " + fmt("%.3g", worst) + " (limit 1e-4)"};
}

Outcome laser_fid() {
    const double raw = t2_of(paper_spectrum(), fid());
    const double cal = t2_of(calibrated(), fid());
    const bool ok = raw >= 0.3 && raw <= 3.0 && std::abs(cal - 1.0) <= 1e-3;
    return {ok, "FID T2 = " + fmt("%.4f", raw) + " s (want [0.3, 3]); calibrated FID T2 = " + fmt("%.5f", cal) + " s"};
}

Outcome multipulse() {
    const auto s = calibrated();
    const double fid_t2 = t2_of(s, fid());
    const double se = t2_of(s, pulse_times(Family::se, 1));
    bool ok = true;
    std::string d = "SE " + fmt("%.3g", se / fid_t2);
    for (const char* text : {"cpmg:6", "pdd:5", "udd:6", "cdd:l=3"}) {
        const double t2 = t2_of(s, parse_sequence(text));
        const double ratio = t2 / fid_t2;
        ok = ok && ratio > 20.0 && t2 >= 2.0 * se;
        d += std::string(", ") + text + " " + fmt("%.3g", ratio) + " (x" + fmt("%.2f", t2 / se) + " SE)";
    }
    return {ok, "T2/T2_FID: " + d + "; want > 20 and >= 2x SE"};
}

Outcome pdd_parity() {
    const auto s = calibrated();
    const double t5 = t2_of(s, pulse_times(Family::pdd, 5));
    const double t6 = t2_of(s, pulse_times(Family::pdd, 6));
    return {t5 > t6, "T2(pdd:5) = " + fmt("%.4g", t5) + " s, T2(pdd:6) = " + fmt("%.4g", t6) + " s"};
}

Outcome cpmg_scaling() {
    const auto s = calibrated();
    const double fid_t2 = t2_of(s, fid());
    const double r50 = t2_of(s, pulse_times(Family::cpmg, 50)) / fid_t2;
    const double r500 = t2_of(s, pulse_times(Family::cpmg, 500)) / fid_t2;
    std::vector<double> xs, ys;
    for (int n = 10; n <= 100; n += 10) {
        xs.push_back(n);
        ys.push_back(t2_of(s, pulse_times(Family::cpmg, n)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / xs.size(), my += ys[i] / ys.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    const double pearson = sxy / std::sqrt(sxx * syy);
    const bool ok = r50 >= 70 && r50 <= 130 && r500 >= 250 && r500 <= 450 && pearson >= 0.98;
    return {ok, "ratio n=50 " + fmt("%.4g", r50) + " (want [70, 130]), n=500 " + fmt("%.4g", r500) +
                    " (want [250, 450]), Pearson " + fmt("%.4f", pearson) + " (want >= 0.98)"};
}

Outcome filters() {
    const auto se = pulse_times(Family::se, 1);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = 100.0 * i / 9999.0;
        const double closed = filter_closed_form(Family::se, 1, x);
        const double err = std::abs(filter_generic(se, x) - closed) / (1.0 + std::abs(closed));
        worst = std::max(worst, err);
    }
    bool ok = worst <= 1e-10;
    std::string d = "SE max error " + fmt("%.2g", worst) + "; F/x^4 at 1e-2 and 1e-3:";
    for (const char* text : {"cpmg:6", "pdd:5", "udd:6", "cdd:l=3"}) {
        const auto q = parse_sequence(text);
        // roundoff floor of the segment sum, ((n + 2) eps x)^2, scaled by x^-4
        const double eps = std::numeric_limits<double>::epsilon();
        const double floor = std::pow(4.0 * (q.n_pulses() + 2.0) * eps * 1e-3, 2) / 1e-12;
        const double q2 = filter_generic(q, 1e-2) / 1e-8;
        const double q3 = filter_generic(q, 1e-3) / 1e-12;
        ok = ok && q3 <= 1.001 * q2 + floor;
        d += std::string(" ") + text + " " + fmt("%.3g", q2) + "/" + fmt("%.3g", q3);
    }
    return {ok, d + " (bounded)"};
}

Outcome monte_carlo() {
    struct Case {
        PowerSpectrum s;
        PulseSequence q;
        std::vector<double> t;
    };
    const auto cal = calibrated();
    const std::vector<Case> cases{
        {PowerSpectrum::white(2.0, 1e-4, 1e3), fid(), {0.25, 0.5, 1.0, 2.0}},
        {PowerSpectrum::lorentzian(1.0, 1.0, 1e-4, 200.0), fid(), {0.5, 1.0, 2.0, 4.0}},
        {cal, pulse_times(Family::se, 1), {0.5, 1.0, 2.0, 5.0}},
        {cal, pulse_times(Family::cpmg, 8), {3.0, 6.0, 12.0, 20.0}},
    };
    McOptions o;
    o.trials = 2000;
    o.seed = 1;
    bool ok = true;
    double worst = 0.0;
    for (const auto& c : cases) {
        const auto cmp = compare_mc_spectral(c.s, c.q, c.t, o);
        ok = ok && cmp.all_pass();
        for (const auto& r : cmp.rows) worst = std::max(worst, std::abs(r.z));
    }
    return {ok, "4 cases x 4 times, 2000 trials, max |z| = " + fmt("%.2f", worst) + " (limit 3.5)"};
}

Outcome static_echo() {
    McOptions o;
    o.trials = 100;
    double worst = 0.0;
    for (double eps : {0.1, 1.0, 37.0}) {
        const auto e = mc_decoherence(ConstantNoiseSource(eps), pulse_times(Family::se, 1), 2.0, 1e-3, o);
        worst = std::max(worst, std::abs(e.w - 1.0));
    }
    return {worst <= 1e-12, "max |W - 1| = " + fmt("%.2g", worst) + " (limit 1e-12)"};
}

Outcome trap() {
    auto cfg = trap_preset(kDefaultTrapPreset);
    double zeeman = 0.0;
    for (double b : {1e-6, 1e-4, 1e-2}) {
        zeeman = std::max(zeeman, std::abs(zeeman_splitting(cfg.gf1, -1.0, b) - zeeman_splitting(cfg.gf2, 1.0, b)));
    }
    const double e1 = differential_light_shift(cfg).e_l;
    cfg.peak_intensity *= 2.0;
    const double e2 = differential_light_shift(cfg).e_l;
    const double lin = std::abs(e2 - 2.0 * e1) / std::abs(e1);
    cfg.peak_intensity /= 2.0;
    const double r = adiabaticity_ratio(cfg, 10e-9, 50.0);
    const bool ok = zeeman == 0.0 && lin <= 1e-15 && r < 1e-2;
    return {ok, "clock-pair Zeeman difference " + fmt("%.2g", zeeman) + " rad/s, E_L linearity error " +
                    fmt("%.2g", lin) + ", adiabaticity ratio " + fmt("%.3g", r) + " (want < 1e-2)"};
}

std::pair<int, std::string> run_cli(const std::string& args) {
    const std::string cmd = std::string(DECOH_CLI_PATH) + " " + args + " 2>&1";
    std::string out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, out};
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome determinism() {
    const std::vector<std::string> commands{
        "w-curve --spectrum paper-yag-1f --seq cpmg:6 --t 0:10:0.5 --calibrate-t2 1",
        "t2-scan --spectrum paper-yag-1f --family udd --n 1..4 --format json",
        "mc-compare --spectrum lorentz:A=1,fc=1,f_ir=0.01,f_uv=50 --seq cpmg:4 --t 0.5,1,2 --trials 300 --seed 5",
    };
    bool ok = true;
    for (const auto& c : commands) {
        const auto a = run_cli(c);
        const auto b = run_cli(c);
        ok = ok && a.first == 0 && b.first == 0 && a.second == b.second && !a.second.empty();
    }
    return {ok, std::to_string(commands.size()) + " commands run twice, outputs " +
                    (ok ? "byte-identical" : "differ or failed")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> only;
    app.add_option("--criterion", only, "Run only these criteria (1-10)");
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "white-noise analytic decay", 1.0, white_noise},
        {2, "laser-noise FID and calibration", 30.0, laser_fid},
        {3, "multi-pulse gain at n = 6", 300.0, multipulse},
        {4, "PDD parity", 300.0, pdd_parity},
        {5, "CPMG scaling with pulse number", 900.0, cpmg_scaling},
        {6, "filter-function equivalence", 60.0, filters},
        {7, "Monte Carlo cross-validation", 600.0, monte_carlo},
        {8, "static-noise echo identity", 60.0, static_echo},
        {9, "trap module", 10.0, trap},
        {10, "CLI determinism", 120.0, determinism},
    };

    int failures = 0;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = o.pass && secs < c.time_limit_s;
        failures += !pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.title << ": " << o.detail << "; "
                  << fmt("%.2f", secs) << " s (limit " << fmt("%g", c.time_limit_s) << " s)" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
