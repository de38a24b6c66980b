#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace decoh {

/// Unit conventions used across the library.
///
/// The splitting fluctuation eps(t) is an angular frequency (rad/s, hbar = 1).
/// Spectra are stored as one-sided densities S_f(f) in (rad/s)^2/Hz so that
/// Var[eps] = int_0^inf S_f(f) df. The dephasing integral uses the two-sided
/// angular density S(w) = S_f(w / 2pi) / 2, which satisfies
/// Var[eps] = int_0^inf (dw / pi) S(w).
namespace units {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
}  // namespace units

enum class SpectrumKind { power_law, white, lorentzian, tabulated, sum };

std::string to_string(SpectrumKind kind);

struct SpectrumKnot {
    double f_hz;
    double s_f;
};

/// Band-limited one-sided noise power spectral density of the qubit splitting.
///
/// Immutable value type; copies share child storage. Every kind is exactly
/// zero outside its own [f_ir, f_uv] band.
class PowerSpectrum {
public:
    /// S_f(f) = amplitude * f^-exponent on [f_ir, f_uv]. `amplitude` is the
    /// value at f = 1 Hz.
    static PowerSpectrum power_law(double amplitude, double exponent, double f_ir, double f_uv);
    static PowerSpectrum white(double level, double f_ir, double f_uv);
    /// S_f(f) = amplitude / (1 + (f / f_corner)^2), the Ornstein-Uhlenbeck shape.
    static PowerSpectrum lorentzian(double amplitude, double f_corner, double f_ir, double f_uv);
    /// Log-log linear interpolation between knots; the band is [first, last] knot.
    static PowerSpectrum tabulated(std::vector<SpectrumKnot> knots);
    /// Pointwise sum of uncorrelated sources.
    static PowerSpectrum combine(std::span<const PowerSpectrum> parts);

    double one_sided(double f_hz) const;
    double angular(double omega) const;

    /// int_a^b S_f(f) df, clipped to the band.
    double band_power(double f_lo, double f_hi) const;
    /// Total variance int S_f df of eps(t).
    double variance() const;

    /// Same shape with every density multiplied by `factor` >= 0.
    PowerSpectrum scaled(double factor) const;

    SpectrumKind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return amplitude_; }
    double exponent() const noexcept { return exponent_; }
    double f_corner() const noexcept { return f_corner_; }
    double f_ir() const noexcept { return f_ir_; }
    double f_uv() const noexcept { return f_uv_; }
    const std::vector<SpectrumKnot>& knots() const noexcept { return *knots_; }
    std::span<const PowerSpectrum> children() const noexcept;

    /// Frequencies where S_f is not smooth: band edges and tabulated knots.
    std::vector<double> breakpoints() const;
    /// Disjoint intervals covering the region where S_f may be nonzero.
    std::vector<std::pair<double, double>> support() const;

    std::string id() const;
    nlohmann::json to_json() const;
    static PowerSpectrum from_json(const nlohmann::json& j);

private:
    PowerSpectrum() = default;

    SpectrumKind kind_ = SpectrumKind::white;
    double amplitude_ = 0.0;
    double exponent_ = 0.0;
    double f_corner_ = 0.0;
    double f_ir_ = 0.0;
    double f_uv_ = 0.0;
    std::shared_ptr<const std::vector<SpectrumKnot>> knots_;
    std::shared_ptr<const std::vector<PowerSpectrum>> children_;
};

PowerSpectrum make_power_law(double amplitude, double exponent, double f_ir, double f_uv);
double eval_one_sided(const PowerSpectrum& s, double f_hz);
double eval_angular(const PowerSpectrum& s, double omega);
PowerSpectrum combine(std::span<const PowerSpectrum> spectra);

/// Relative-intensity-noise model of a YAG trapping laser:
/// S_f(f) = e_l^2 * 10^-8.5 * f^(-5/3), f in [0.016 / 2pi, 1000] Hz.
/// `e_l` is the light-shift coupling in rad/s.
PowerSpectrum yag_rin_spectrum(double e_l);

inline constexpr double kYagRinAmplitude = 3.1622776601683794e-9;  // 10^-8.5
inline constexpr double kYagRinExponent = 5.0 / 3.0;
inline constexpr double kYagOmegaIr = 0.016;  // rad/s, from a ~400 s trap lifetime
inline constexpr double kYagFUv = 1000.0;

/// Reads a two-column CSV with header `f_hz,s_f`.
PowerSpectrum load_tabulated_csv(const std::string& path);

}  // namespace decoh
