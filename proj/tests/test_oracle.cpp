#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "decoh/coherence.hpp"
#include "decoh/errors.hpp"
#include "decoh/oracle.hpp"

using namespace decoh;

namespace {

McOptions opts(std::size_t trials, std::uint64_t seed = 1) {
    McOptions o;
    o.trials = trials;
    o.seed = seed;
    o.threads = 1;
    return o;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST_CASE("trace length and csv") {
    CHECK(trace_length(1.0, 0.25) == 5);
    CHECK(trace_length(1.0, 0.3) == 4);
    CHECK_THROWS_AS(trace_length(0.0, 0.1), ConfigError);
    const auto tr = synthesize_noise(PowerSpectrum::white(1.0, 0.1, 10.0), 1.0, 0.05, 3);
    CHECK(tr.samples.size() == 21);
    CHECK(tr.duration() == doctest::Approx(1.0));
    std::ostringstream os;
    tr.write_csv(os);
    CHECK(os.str().find("t_s,eps_rad_s") != std::string::npos);
}

TEST_CASE("synthesis rejects undersampling") {
    const auto s = PowerSpectrum::white(1.0, 0.1, 10.0);
    CHECK_THROWS_AS(synthesize_noise(s, 1.0, 0.06, 1), ConfigError);
    CHECK_NOTHROW(synthesize_noise(s, 1.0, 0.05, 1));
    auto o = opts(50);
    CHECK_THROWS_AS(mc_decoherence(s, fid(), 1.0, o), ConfigError);
    o = opts(200);
    o.dt = 0.2;
    CHECK_THROWS_AS(mc_decoherence(s, fid(), 1.0, o), ConfigError);
}

TEST_CASE("synthesis is deterministic per seed") {
    const auto s = PowerSpectrum::lorentzian(1.0, 2.0, 0.01, 50.0);
    const auto a = synthesize_noise(s, 10.0, 0.005, 42);
    const auto b = synthesize_noise(s, 10.0, 0.005, 42);
    const auto c = synthesize_noise(s, 10.0, 0.005, 43);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("white-noise trace variance") {
    const double s0 = 2.0, f_ir = 0.1, f_uv = 100.0;
    const auto s = PowerSpectrum::white(s0, f_ir, f_uv);
    std::vector<double> vars;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto tr = synthesize_noise(s, 20.0, 1.0 / 400.0, seed);
        double acc = 0.0;
        for (double v : tr.samples) acc += v * v;
        vars.push_back(acc / tr.samples.size());
    }
    CHECK(mean(vars) == doctest::Approx(s0 * (f_uv - f_ir)).epsilon(0.05));
}

TEST_CASE("periodogram follows a power-law spectrum") {
    const double alpha = 5.0 / 3.0;
    const auto s = PowerSpectrum::power_law(1.0, alpha, 0.01, 200.0);
    const int seeds = 16;
    Periodogram avg;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto p = periodogram(synthesize_noise(s, 200.0, 1.0 / 800.0, 100 + seed));
        if (avg.f_hz.empty()) {
            avg = p;
        } else {
            for (std::size_t k = 0; k < p.s_f.size(); ++k) avg.s_f[k] += p.s_f[k];
        }
    }
    for (auto& v : avg.s_f) v /= seeds;

    // octave bands between 0.1 and 100 Hz
    std::vector<double> lx, ly;
    for (double lo = 0.1; lo * 2.0 <= 100.0 * 1.0001; lo *= 2.0) {
        double got = 0.0, want = 0.0;
        int n = 0;
        for (std::size_t k = 0; k < avg.f_hz.size(); ++k) {
            const double f = avg.f_hz[k];
            if (f < lo || f >= 2.0 * lo) continue;
            got += avg.s_f[k];
            want += s.one_sided(f);
            ++n;
        }
        REQUIRE(n > 0);
        INFO("band starting at " << lo << " Hz");
        CHECK(got / want == doctest::Approx(1.0).epsilon(0.10));
        lx.push_back(std::log(lo * std::sqrt(2.0)));
        ly.push_back(std::log(got / n));
    }
    const double mx = mean(lx), my = mean(ly);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(sxy / sxx == doctest::Approx(-alpha).epsilon(0.15 / alpha));
}

TEST_CASE("noiseless and static noise") {
    const auto zero = PowerSpectrum::white(0.0, 0.1, 10.0);
    CHECK(mc_decoherence(zero, pulse_times(Family::cpmg, 4), 2.0, opts(100)).w == 1.0);

    const ConstantNoiseSource still(0.5);
    for (const char* text : {"se", "cpmg:4", "udd:5", "cdd:l=3"}) {
        const auto q = parse_sequence(text);
        const auto e = mc_decoherence(still, q, 3.0, 1e-3, opts(100));
        INFO(text);
        CHECK(std::abs(e.w - 1.0) <= 1e-12);
    }
    // a static offset still only rotates the phase without pulses
    CHECK(std::abs(mc_decoherence(still, fid(), 3.0, 1e-3, opts(100)).w - 1.0) <= 1e-12);
}

TEST_CASE("toggled and unitary propagation agree for perfect pulses") {
    const auto s = PowerSpectrum::lorentzian(50.0, 5.0, 0.01, 100.0);
    const auto tr = synthesize_noise(s, 2.0, 1.0 / 800.0, 9);
    for (const char* text : {"fid", "se", "cpmg:8", "udd:7", "custom:0.11,0.5,0.52"}) {
        const auto r = compare_paths(tr, parse_sequence(text), 1600);
        INFO(text);
        CHECK(std::abs(r.toggled - r.unitary) <= 1e-12);
        CHECK(std::abs(r.norm - 1.0) <= 1e-12);
    }
    const auto many = compare_paths(tr, pulse_times(Family::cpmg, 500), 1600, 0.1);
    CHECK(std::abs(many.norm - 1.0) <= 1e-12);
    CHECK(std::abs(many.unitary) <= 1.0 + 1e-12);
}

TEST_CASE("unitary path matches the toggled estimate") {
    const auto s = PowerSpectrum::lorentzian(1.0, 1.0, 0.01, 100.0);
    auto o = opts(400, 5);
    const auto a = mc_decoherence(s, pulse_times(Family::cpmg, 2), 1.5, o);
    o.force_unitary = true;
    const auto b = mc_decoherence(s, pulse_times(Family::cpmg, 2), 1.5, o);
    CHECK(a.w == doctest::Approx(b.w).epsilon(1e-10));
}

TEST_CASE("Monte Carlo is deterministic and independent of threads") {
    const auto s = PowerSpectrum::lorentzian(1.0, 1.0, 0.01, 100.0);
    auto o = opts(300, 77);
    const auto a = mc_decoherence(s, pulse_times(Family::se, 1), 1.0, o);
    const auto b = mc_decoherence(s, pulse_times(Family::se, 1), 1.0, o);
    o.threads = 3;
    const auto c = mc_decoherence(s, pulse_times(Family::se, 1), 1.0, o);
    CHECK(a.w == b.w);
    CHECK(a.w == c.w);
    CHECK(a.std_error == c.std_error);
    o.seed = 78;
    CHECK(mc_decoherence(s, pulse_times(Family::se, 1), 1.0, o).w != a.w);
}

TEST_CASE("standard error scales as one over root trials") {
    const auto s = PowerSpectrum::lorentzian(1.0, 1.0, 0.01, 50.0);
    const auto small = mc_decoherence(s, fid(), 2.0, opts(100, 2));
    const auto large = mc_decoherence(s, fid(), 2.0, opts(10000, 2));
    CHECK(small.std_error / large.std_error == doctest::Approx(10.0).epsilon(0.3));
    CHECK(large.batch_stderr > 0.0);
}

TEST_CASE("white noise decay") {
    const double s0 = 4.0;
    const auto s = PowerSpectrum::white(s0, 1e-3, 200.0);
    for (double t : {0.5, 1.0, 2.0}) {
        const auto e = mc_decoherence(s, fid(), t, opts(2000, 11));
        INFO("t = " << t);
        CHECK(std::abs(e.w - std::exp(-s0 * t / 4.0)) <= 3.5 * e.std_error);
    }
}

TEST_CASE("pulse errors reduce coherence") {
    const auto s = PowerSpectrum::lorentzian(1.0, 1.0, 0.01, 50.0);
    const auto q = pulse_times(Family::cpmg, 8);
    auto o = opts(1000, 4);
    o.error_mode = PulseErrorMode::random;
    o.pulse_error = 0.0;
    const auto w0 = mc_decoherence(s, q, 2.0, o);
    o.pulse_error = 0.5;
    const auto w1 = mc_decoherence(s, q, 2.0, o);
    o.pulse_error = 1.5;
    const auto w2 = mc_decoherence(s, q, 2.0, o);
    CHECK(w0.w > w1.w);
    CHECK(w1.w > w2.w);
}

TEST_CASE("spectral comparison") {
    const auto s = PowerSpectrum::lorentzian(1.0, 1.0, 0.01, 50.0);
    const std::vector<double> grid{0.5, 1.0, 2.0};
    const auto c = compare_mc_spectral(s, fid(), grid, opts(500, 3));
    REQUIRE(c.rows.size() == 3);
    for (const auto& r : c.rows) {
        CHECK(std::abs(r.t_eff - r.t) <= c.dt);
        CHECK(r.flagged == (std::abs(r.z) > c.z_limit));
    }
    const auto j = c.to_json();
    CHECK(j.at("rows").size() == 3);
    CHECK(j.at("trials") == 500);
    auto bad = opts(500);
    bad.pulse_error = 0.1;
    CHECK_THROWS_AS(compare_mc_spectral(s, fid(), grid, bad), ConfigError);
    const std::vector<double> empty;
    CHECK_THROWS_AS(compare_mc_spectral(s, fid(), empty, opts(500)), ConfigError);
}
