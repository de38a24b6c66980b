#include "decoh/trap.hpp"

#include <cmath>
#include <fstream>

#include "decoh/errors.hpp"
#include "decoh/spectra.hpp"
#include "trap_data.hpp"

namespace decoh {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

bool finite_nonzero(double v) { return std::isfinite(v) && v != 0.0; }

}  // namespace

void TrapConfig::validate() const {
    require(alpha_pol >= -1 && alpha_pol <= 1, "alpha_pol must be -1, 0 or 1");
    require(finite_nonzero(delta1_f1) && finite_nonzero(delta2_f1) && finite_nonzero(delta1_f2) &&
                finite_nonzero(delta2_f2),
            "detunings must be finite and nonzero");
    require(std::isfinite(gamma) && gamma > 0.0, "linewidth must be > 0");
    require(std::isfinite(omega0) && omega0 > 0.0, "transition frequency must be > 0");
    require(std::isfinite(peak_intensity) && peak_intensity >= 0.0, "peak intensity must be >= 0");
    require(std::isfinite(waist) && waist > 0.0, "waist must be > 0");
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(std::isfinite(trap_omega) && trap_omega > 0.0, "trap frequency must be > 0");
    require(std::isfinite(e_hyperfine) && std::isfinite(trap_depth), "non-finite splitting or depth");
    require(std::isfinite(gf1) && std::isfinite(gf2) && std::isfinite(mf1) && std::isfinite(mf2),
            "non-finite Lande factor or magnetic quantum number");
}

nlohmann::json TrapConfig::to_json() const {
    return {{"gamma", gamma},           {"omega0", omega0},       {"delta1_f1", delta1_f1},
            {"delta2_f1", delta2_f1},   {"delta1_f2", delta1_f2}, {"delta2_f2", delta2_f2},
            {"alpha_pol", alpha_pol},   {"gf1", gf1},             {"mf1", mf1},
            {"gf2", gf2},               {"mf2", mf2},             {"e_hyperfine", e_hyperfine},
            {"peak_intensity", peak_intensity}, {"trap_depth", trap_depth}, {"waist", waist},
            {"trap_omega", trap_omega}, {"mass", mass}};
}

TrapConfig TrapConfig::from_json(const nlohmann::json& j) {
    TrapConfig c;
    try {
        c.gamma = j.at("gamma").get<double>();
        c.omega0 = j.at("omega0").get<double>();
        c.delta1_f1 = j.at("delta1_f1").get<double>();
        c.delta2_f1 = j.at("delta2_f1").get<double>();
        c.delta1_f2 = j.at("delta1_f2").get<double>();
        c.delta2_f2 = j.at("delta2_f2").get<double>();
        c.alpha_pol = j.value("alpha_pol", 0);
        c.gf1 = j.value("gf1", 0.0);
        c.mf1 = j.value("mf1", 0.0);
        c.gf2 = j.value("gf2", 0.0);
        c.mf2 = j.value("mf2", 0.0);
        c.e_hyperfine = j.value("e_hyperfine", 0.0);
        c.peak_intensity = j.at("peak_intensity").get<double>();
        c.trap_depth = j.value("trap_depth", 0.0);
        c.waist = j.at("waist").get<double>();
        c.trap_omega = j.at("trap_omega").get<double>();
        c.mass = j.at("mass").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed trap config: ") + e.what());
    }
    c.validate();
    return c;
}

double inverse_effective_detuning(double delta1, double delta2, int alpha_pol, double g_f, double m_f) {
    require(finite_nonzero(delta1) && finite_nonzero(delta2), "detunings must be finite and nonzero");
    require(alpha_pol >= -1 && alpha_pol <= 1, "alpha_pol must be -1, 0 or 1");
    const double agm = alpha_pol * g_f * m_f;
    return (2.0 + agm) / delta2 + (1.0 - agm) / delta1;
}

double light_shift_prefactor(const TrapConfig& cfg) {
    using namespace constants;
    return units::pi * c * c * cfg.gamma / (2.0 * std::pow(cfg.omega0, 3) * hbar);
}

LightShiftResult differential_light_shift(const TrapConfig& cfg) {
    cfg.validate();
    const double inv2 = inverse_effective_detuning(cfg.delta1_f2, cfg.delta2_f2, cfg.alpha_pol, cfg.gf2, cfg.mf2);
    const double inv1 = inverse_effective_detuning(cfg.delta1_f1, cfg.delta2_f1, cfg.alpha_pol, cfg.gf1, cfg.mf1);
    LightShiftResult r;
    r.e_l = light_shift_prefactor(cfg) * (inv2 - inv1) * cfg.peak_intensity;
    r.e_total = cfg.e_hyperfine + r.e_l;
    return r;
}

double zeeman_splitting(double g_f, double m_f, double b_z) {
    return m_f * g_f * constants::mu_b * b_z / constants::hbar;
}

double adiabaticity_ratio(const TrapConfig& cfg, double gamma_amp, double noise_freq) {
    require(std::isfinite(cfg.trap_omega) && cfg.trap_omega > 0.0, "trap frequency must be > 0");
    require(std::isfinite(cfg.mass) && cfg.mass > 0.0, "mass must be > 0");
    require(std::isfinite(gamma_amp) && gamma_amp >= 0.0, "pointing amplitude must be >= 0");
    require(std::isfinite(noise_freq) && noise_freq >= 0.0, "noise frequency must be >= 0");
    // R = hbar v_t |<0|dH/dgamma|1>| / (hbar w)^2 with v_t = gamma * wbar,
    // |<0|dH/dgamma|1>| = m w^2 sqrt(hbar / (2 m w)).
    const double wbar = units::two_pi * noise_freq;
    return gamma_amp * wbar * std::sqrt(cfg.mass / (2.0 * constants::hbar * cfg.trap_omega));
}

const nlohmann::json& builtin_trap_data() {
    static const nlohmann::json data = nlohmann::json::parse(detail::kBuiltinTrapData);
    return data;
}

nlohmann::json load_trap_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open trap data file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed trap data file '" + path + "': " + e.what());
    }
}

TrapConfig trap_preset(const std::string& name, const nlohmann::json& data) {
    using namespace constants;
    try {
        if (!data.at("presets").contains(name)) throw ConfigError("unknown trap preset '" + name + "'");
        const auto& p = data.at("presets").at(name);
        const auto& atom = data.at("atoms").at(p.at("atom").get<std::string>());
        const auto& lv1 = atom.at("ground_levels").at("F1");
        const auto& lv2 = atom.at("ground_levels").at("F2");

        const double w_laser = units::two_pi * c / p.at("wavelength_m").get<double>();
        const double w_d1 = units::two_pi * atom.at("d1_line_hz").get<double>();
        const double w_d2 = units::two_pi * atom.at("d2_line_hz").get<double>();
        const double off1 = units::two_pi * lv1.at("offset_hz").get<double>();
        const double off2 = units::two_pi * lv2.at("offset_hz").get<double>();

        TrapConfig cfg;
        cfg.gamma = units::two_pi * atom.at("linewidth_hz").get<double>();
        cfg.omega0 = w_d2;
        // a ground level raised by `off` sees each line at (line - off)
        cfg.delta1_f1 = w_laser - (w_d1 - off1);
        cfg.delta2_f1 = w_laser - (w_d2 - off1);
        cfg.delta1_f2 = w_laser - (w_d1 - off2);
        cfg.delta2_f2 = w_laser - (w_d2 - off2);
        cfg.alpha_pol = p.value("alpha_pol", 0);
        cfg.gf1 = lv1.at("g_f").get<double>();
        cfg.gf2 = lv2.at("g_f").get<double>();
        cfg.mf1 = p.value("m_f1", 0.0);
        cfg.mf2 = p.value("m_f2", 0.0);
        cfg.e_hyperfine = units::two_pi * atom.at("hyperfine_splitting_hz").get<double>();
        cfg.trap_depth = k_b * p.at("trap_depth_uk").get<double>() * 1e-6 / hbar;
        cfg.waist = p.at("waist_m").get<double>();
        cfg.trap_omega = units::two_pi * p.at("trap_frequency_hz").get<double>();
        cfg.mass = atom.at("mass_kg").get<double>();

        const double inv1 = inverse_effective_detuning(cfg.delta1_f1, cfg.delta2_f1, cfg.alpha_pol, cfg.gf1, cfg.mf1);
        cfg.peak_intensity = cfg.trap_depth / std::abs(light_shift_prefactor(cfg) * inv1);
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed trap preset '" + name + "': " + e.what());
    }
}

}  // namespace decoh
