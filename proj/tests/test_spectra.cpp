#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "decoh/errors.hpp"
#include "decoh/spectra.hpp"
#include "test_helpers.hpp"

using namespace decoh;

TEST_CASE("power law evaluates A f^-alpha inside the band and zero outside") {
    const auto s = make_power_law(kYagRinAmplitude, kYagRinExponent, 0.01, 1000.0);
    CHECK(eval_one_sided(s, 1.0) == doctest::Approx(std::pow(10.0, -8.5)).epsilon(1e-15));
    CHECK(eval_one_sided(s, 10.0) == doctest::Approx(kYagRinAmplitude * std::pow(10.0, -5.0 / 3.0)).epsilon(1e-14));
    CHECK(eval_one_sided(s, 2000.0) == 0.0);
    CHECK(eval_one_sided(s, 0.005) == 0.0);
    CHECK(eval_one_sided(s, 0.0) == 0.0);
}

TEST_CASE("exponent zero is the white kind") {
    const auto s = make_power_law(4.0, 0.0, 1.0, 10.0);
    CHECK(s.kind() == SpectrumKind::white);
    CHECK(eval_one_sided(s, 5.0) == 4.0);
    CHECK(eval_angular(s, units::two_pi * 5.0) == 2.0);
    CHECK(eval_angular(s, 0.5 * units::two_pi) == 0.0);
}

TEST_CASE("YAG intensity-noise preset at 1 Hz") {
    const double e_l = 2.0 * units::pi * 700.0;
    const auto s = yag_rin_spectrum(e_l);
    CHECK(s.f_ir() == doctest::Approx(0.016 / units::two_pi).epsilon(1e-15));
    CHECK(s.f_uv() == 1000.0);
    CHECK(eval_one_sided(s, 1.0) == doctest::Approx(e_l * e_l * std::pow(10.0, -8.5)).epsilon(1e-14));
    CHECK(eval_angular(s, units::two_pi) == doctest::Approx(e_l * e_l * std::pow(10.0, -8.5) / 2).epsilon(1e-14));
}

TEST_CASE("invalid construction is rejected") {
    CHECK_THROWS_AS(make_power_law(1.0, 1.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_power_law(1.0, 1.0, 2.0, 1.0), ConfigError);
    CHECK_THROWS_AS(make_power_law(1.0, 1.0, 1.0, INFINITY), ConfigError);
    CHECK_THROWS_AS(make_power_law(-1.0, 1.0, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(make_power_law(1.0, -0.5, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(make_power_law(NAN, 1.0, 1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(PowerSpectrum::tabulated({{1.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(PowerSpectrum::tabulated({{1.0, 1.0}, {1.0, 2.0}}), ConfigError);
    CHECK_THROWS_AS(PowerSpectrum::tabulated({{1.0, 1.0}, {2.0, -2.0}}), ConfigError);
    std::vector<PowerSpectrum> none;
    CHECK_THROWS_AS(combine(none), ConfigError);
}

TEST_CASE("tabulated interpolation is log-log linear and exact at knots") {
    const auto s = PowerSpectrum::tabulated({{1.0, 1e-3}, {100.0, 1e-5}});
    CHECK(eval_one_sided(s, 1.0) == 1e-3);
    CHECK(eval_one_sided(s, 100.0) == 1e-5);
    CHECK(eval_one_sided(s, 10.0) == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(eval_one_sided(s, 100.5) == 0.0);

    // monotone knots give monotone interpolation
    const auto m = PowerSpectrum::tabulated({{0.1, 5.0}, {1.0, 2.0}, {3.0, 1.5}, {50.0, 0.01}});
    double prev = INFINITY;
    for (double f = 0.1; f <= 50.0; f *= 1.01) {
        const double v = eval_one_sided(m, f);
        CHECK(v <= prev * (1.0 + 1e-14));
        prev = v;
    }
}

TEST_CASE("combine evaluates the pointwise sum with band union") {
    const auto w = PowerSpectrum::white(2.0, 1.0, 10.0);
    const std::vector<PowerSpectrum> single{w};
    const auto one = combine(single);
    const std::vector<PowerSpectrum> twice{w, w};
    const auto two = combine(twice);
    const auto pl = make_power_law(1.0, 1.0, 0.1, 100.0);
    const auto lz = PowerSpectrum::lorentzian(3.0, 2.0, 1.0, 5.0);
    const std::vector<PowerSpectrum> mixed{pl, lz};
    const auto both = combine(mixed);

    for (double f : {0.05, 0.5, 1.0, 3.0, 5.0, 7.0, 10.0, 50.0, 200.0}) {
        CHECK(eval_one_sided(one, f) == eval_one_sided(w, f));
        CHECK(eval_one_sided(two, f) == 2.0 * eval_one_sided(w, f));
        CHECK(eval_one_sided(both, f) == eval_one_sided(pl, f) + eval_one_sided(lz, f));
    }
    // outside the Lorentzian band only the power law remains
    CHECK(eval_one_sided(both, 20.0) == eval_one_sided(pl, 20.0));
    CHECK(both.f_ir() == 0.1);
    CHECK(both.f_uv() == 100.0);
}

TEST_CASE("non-negativity over random spectra") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const double f_ir = std::pow(10.0, -3.0 + 2.0 * u(rng));
        const double f_uv = f_ir * std::pow(10.0, 1.0 + 4.0 * u(rng));
        std::vector<PowerSpectrum> parts{
            make_power_law(u(rng), 3.0 * u(rng), f_ir, f_uv),
            PowerSpectrum::lorentzian(u(rng), f_ir * 10.0, f_ir, f_uv),
            PowerSpectrum::tabulated({{f_ir, u(rng)}, {std::sqrt(f_ir * f_uv), u(rng)}, {f_uv, 0.0}})};
        const auto s = combine(parts);
        for (int k = 0; k < 200; ++k) {
            const double f = f_ir * std::pow(f_uv / f_ir, 1.2 * u(rng) - 0.1);
            CHECK(eval_one_sided(s, f) >= 0.0);
        }
    }
}

TEST_CASE("angular and one-sided conventions carry the same variance") {
    using decoh::testing::simpson_log;
    const auto pl = make_power_law(2.5, 5.0 / 3.0, 0.01, 100.0);
    const auto lz = PowerSpectrum::lorentzian(1.0, 3.0, 0.01, 1000.0);
    const auto tab = PowerSpectrum::tabulated({{0.5, 1.0}, {2.0, 0.3}, {40.0, 0.02}});
    for (const auto* s : {&pl, &lz, &tab}) {
        // stay a hair inside the band so the endpoints are not on the jump
        const double a = s->f_ir() * (1 + 1e-13), b = s->f_uv() * (1 - 1e-13);
        const double angular = simpson_log([&](double w) { return s->angular(w) / units::pi; }, units::two_pi * a,
                                           units::two_pi * b, 400000);
        const double one_sided = simpson_log([&](double f) { return s->one_sided(f); }, a, b, 400000);
        CHECK(angular == doctest::Approx(one_sided).epsilon(1e-8));
        // and the analytic band integral agrees with brute force
        CHECK(s->variance() == doctest::Approx(one_sided).epsilon(1e-8));
    }
}

TEST_CASE("band power of a white spectrum is level times overlap") {
    const auto w = PowerSpectrum::white(3.0, 2.0, 8.0);
    CHECK(w.band_power(0.0, 100.0) == doctest::Approx(18.0));
    CHECK(w.band_power(4.0, 5.0) == doctest::Approx(3.0));
    CHECK(w.band_power(9.0, 10.0) == 0.0);
    CHECK(w.variance() == doctest::Approx(18.0));
}

TEST_CASE("scaling multiplies every density") {
    const auto s = make_power_law(1.0, 1.0, 0.1, 10.0).scaled(4.0);
    CHECK(eval_one_sided(s, 2.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(s.scaled(-1.0), ConfigError);
}

TEST_CASE("json round trip preserves evaluation") {
    std::vector<PowerSpectrum> parts{make_power_law(1.5, 1.2, 0.1, 10.0), PowerSpectrum::white(0.5, 1.0, 20.0),
                                     PowerSpectrum::tabulated({{1.0, 2.0}, {4.0, 1.0}})};
    const auto s = combine(parts);
    const auto back = PowerSpectrum::from_json(s.to_json());
    CHECK(back.id() == s.id());
    for (double f : {0.2, 1.0, 3.0, 15.0}) CHECK(eval_one_sided(back, f) == eval_one_sided(s, f));
    CHECK_THROWS_AS(PowerSpectrum::from_json(nlohmann::json{{"kind", "bogus"}}), ConfigError);
}
