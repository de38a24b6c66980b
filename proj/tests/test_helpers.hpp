#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

namespace decoh::testing {

/// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

/// Simpson in u = ln f, for integrands spanning many decades.
inline double simpson_log(const std::function<double(double)>& f, double a, double b, int n) {
    return simpson([&](double u) { const double x = std::exp(u); return f(x) * x; }, std::log(a), std::log(b), n);
}

/// chi(t) for Ornstein-Uhlenbeck noise with one-sided density A / (1 + (f/fc)^2)
/// on (0, inf): sigma^2 tau^2 (t/tau - 1 + exp(-t/tau)), sigma^2 = A pi fc / 2,
/// tau = 1 / (2 pi fc).
inline double ou_chi(double amplitude, double f_corner, double t) {
    const double pi = 3.14159265358979323846;
    const double sigma2 = amplitude * pi * f_corner / 2.0;
    const double tau = 1.0 / (2.0 * pi * f_corner);
    const double r = t / tau;
    // expm1 keeps accuracy for r -> 0
    return sigma2 * tau * tau * (r + std::expm1(-r));
}

}  // namespace decoh::testing

#include <complex>
#include <span>

namespace decoh::testing {

/// 1/2 |sum_k (-1)^k (e^{i x t_{k+1}} - e^{i x t_k})|^2 summed directly.
inline double filter_direct(std::span<const double> fractions, double x) {
    std::complex<double> s = 0.0;
    double lo = 0.0;
    for (std::size_t k = 0; k <= fractions.size(); ++k) {
        const double hi = k < fractions.size() ? fractions[k] : 1.0;
        const std::complex<double> seg = std::polar(1.0, x * hi) - std::polar(1.0, x * lo);
        s += (k % 2 == 0) ? seg : -seg;
        lo = hi;
    }
    return 0.5 * std::norm(s);
}

}  // namespace decoh::testing

namespace decoh::testing {

/// Si(x) = int_0^x sin(u)/u du by Simpson at about 40 points per unit.
inline double sine_integral(double x) {
    if (x == 0.0) return 0.0;
    const int n = std::max(2000, static_cast<int>(40.0 * std::abs(x)));
    return simpson([](double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }, 0.0, x, n);
}

/// Free-decay chi for white S0 on [a, b]:
/// S0 / (2 pi^2) [-sin^2(c f) / f + c Si(2 c f)]_a^b with c = pi t.
inline double white_band_chi(double s0, double a, double b, double t) {
    const double pi = 3.14159265358979323846;
    const double c = pi * t;
    auto prim = [&](double f) { return -std::pow(std::sin(c * f), 2) / f + c * sine_integral(2.0 * c * f); };
    return s0 / (2.0 * pi * pi) * (prim(b) - prim(a));
}

}  // namespace decoh::testing
