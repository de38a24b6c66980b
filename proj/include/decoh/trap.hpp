#pragma once

#include <string>

#include <json.hpp>

namespace decoh {

namespace constants {
inline constexpr double c = 299792458.0;             // m/s
inline constexpr double hbar = 1.054571817e-34;      // J s
inline constexpr double k_b = 1.380649e-23;          // J/K
inline constexpr double mu_b = 9.2740100783e-24;     // J/T
}  // namespace constants

/// Atom and trap-laser parameters for the differential light shift of a
/// hyperfine qubit. Frequencies and energies are angular (rad/s, hbar = 1).
struct TrapConfig {
    double gamma = 0.0;   ///< natural linewidth
    double omega0 = 0.0;  ///< transition frequency in the shift prefactor
    double delta1_f1 = 0.0;
    double delta2_f1 = 0.0;
    double delta1_f2 = 0.0;
    double delta2_f2 = 0.0;
    int alpha_pol = 0;
    double gf1 = 0.0;
    double mf1 = 0.0;
    double gf2 = 0.0;
    double mf2 = 0.0;
    double e_hyperfine = 0.0;
    double peak_intensity = 0.0;  ///< W/m^2
    double trap_depth = 0.0;
    double waist = 0.0;       ///< m
    double trap_omega = 0.0;  ///< harmonic trap frequency
    double mass = 0.0;        ///< kg

    /// Throws ConfigError when any invariant is violated.
    void validate() const;

    nlohmann::json to_json() const;
    static TrapConfig from_json(const nlohmann::json& j);
};

struct LightShiftResult {
    double e_l = 0.0;      ///< splitting change per unit relative intensity
    double e_total = 0.0;  ///< splitting at trap center
};

/// 1/Delta'_F = (2 + a g m)/delta2 + (1 - a g m)/delta1, in s/rad.
double inverse_effective_detuning(double delta1, double delta2, int alpha_pol, double g_f, double m_f);

/// pi c^2 Gamma / (2 omega0^3 hbar): converts (1/Delta') * I into rad/s.
double light_shift_prefactor(const TrapConfig& cfg);

LightShiftResult differential_light_shift(const TrapConfig& cfg);

/// m_F g_F mu_B B_z / hbar in rad/s.
double zeeman_splitting(double g_f, double m_f, double b_z);

/// Ratio of the trap-center drift velocity term to the adiabatic bound for
/// the harmonic ground state: gamma_amp * 2pi noise_freq * sqrt(m / (2 hbar w)).
/// Values far below 1 mean the atom follows the trap adiabatically.
double adiabaticity_ratio(const TrapConfig& cfg, double gamma_amp, double noise_freq);

/// Built-in atom and preset table (JSON text compiled into the library).
const nlohmann::json& builtin_trap_data();

/// Loads a trap data file with the same layout as the built-in table.
nlohmann::json load_trap_data(const std::string& path);

/// Resolves a named preset into a TrapConfig. The peak intensity is chosen so
/// that the F1 ground-state light shift at trap center equals the preset depth.
TrapConfig trap_preset(const std::string& name, const nlohmann::json& data = builtin_trap_data());

}  // namespace decoh
