#include "decoh/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "decoh/errors.hpp"

namespace decoh {

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_band(double f_ir, double f_uv) {
    if (!finite(f_ir) || !finite(f_uv) || !(f_ir > 0.0) || !(f_uv > f_ir)) {
        throw ConfigError("spectrum band must satisfy 0 < f_ir < f_uv (finite), got f_ir=" +
                          std::to_string(f_ir) + " f_uv=" + std::to_string(f_uv));
    }
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// int_a^b c * f^-p df
double power_integral(double c, double p, double a, double b) {
    if (b <= a || c == 0.0) return 0.0;
    if (std::abs(p - 1.0) < 1e-12) return c * std::log(b / a);
    const double q = 1.0 - p;
    return c * (std::pow(b, q) - std::pow(a, q)) / q;
}

}  // namespace

std::string to_string(SpectrumKind kind) {
    switch (kind) {
        case SpectrumKind::power_law: return "power_law";
        case SpectrumKind::white: return "white";
        case SpectrumKind::lorentzian: return "lorentzian";
        case SpectrumKind::tabulated: return "tabulated";
        case SpectrumKind::sum: return "sum";
    }
    return "unknown";
}

PowerSpectrum PowerSpectrum::power_law(double amplitude, double exponent, double f_ir, double f_uv) {
    if (!finite(amplitude) || amplitude < 0.0) throw ConfigError("power-law amplitude must be finite and >= 0");
    if (!finite(exponent) || exponent < 0.0) throw ConfigError("power-law exponent must be finite and >= 0");
    check_band(f_ir, f_uv);
    PowerSpectrum s;
    s.kind_ = exponent == 0.0 ? SpectrumKind::white : SpectrumKind::power_law;
    s.amplitude_ = amplitude;
    s.exponent_ = exponent;
    s.f_ir_ = f_ir;
    s.f_uv_ = f_uv;
    return s;
}

PowerSpectrum PowerSpectrum::white(double level, double f_ir, double f_uv) {
    return power_law(level, 0.0, f_ir, f_uv);
}

PowerSpectrum PowerSpectrum::lorentzian(double amplitude, double f_corner, double f_ir, double f_uv) {
    if (!finite(amplitude) || amplitude < 0.0) throw ConfigError("Lorentzian amplitude must be finite and >= 0");
    if (!finite(f_corner) || !(f_corner > 0.0)) throw ConfigError("Lorentzian corner frequency must be > 0");
    check_band(f_ir, f_uv);
    PowerSpectrum s;
    s.kind_ = SpectrumKind::lorentzian;
    s.amplitude_ = amplitude;
    s.f_corner_ = f_corner;
    s.f_ir_ = f_ir;
    s.f_uv_ = f_uv;
    return s;
}

PowerSpectrum PowerSpectrum::tabulated(std::vector<SpectrumKnot> knots) {
    if (knots.size() < 2) throw ConfigError("tabulated spectrum needs at least 2 knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const auto& k = knots[i];
        if (!finite(k.f_hz) || !(k.f_hz > 0.0)) throw ConfigError("tabulated knot frequency must be > 0");
        if (!finite(k.s_f) || k.s_f < 0.0) throw ConfigError("tabulated knot density must be finite and >= 0");
        if (i > 0 && !(k.f_hz > knots[i - 1].f_hz)) {
            throw ConfigError("tabulated knot frequencies must be strictly increasing");
        }
    }
    PowerSpectrum s;
    s.kind_ = SpectrumKind::tabulated;
    s.f_ir_ = knots.front().f_hz;
    s.f_uv_ = knots.back().f_hz;
    s.knots_ = std::make_shared<const std::vector<SpectrumKnot>>(std::move(knots));
    return s;
}

PowerSpectrum PowerSpectrum::combine(std::span<const PowerSpectrum> parts) {
    if (parts.empty()) throw ConfigError("cannot combine an empty list of spectra");
    PowerSpectrum s;
    s.kind_ = SpectrumKind::sum;
    s.f_ir_ = parts.front().f_ir();
    s.f_uv_ = parts.front().f_uv();
    for (const auto& p : parts) {
        s.f_ir_ = std::min(s.f_ir_, p.f_ir());
        s.f_uv_ = std::max(s.f_uv_, p.f_uv());
    }
    s.children_ = std::make_shared<const std::vector<PowerSpectrum>>(parts.begin(), parts.end());
    return s;
}

std::span<const PowerSpectrum> PowerSpectrum::children() const noexcept {
    if (!children_) return {};
    return {children_->data(), children_->size()};
}

double PowerSpectrum::one_sided(double f) const {
    if (kind_ == SpectrumKind::sum) {
        double total = 0.0;
        for (const auto& c : *children_) total += c.one_sided(f);
        return total;
    }
    if (!(f >= f_ir_ && f <= f_uv_)) return 0.0;
    switch (kind_) {
        case SpectrumKind::white: return amplitude_;
        case SpectrumKind::power_law: return amplitude_ * std::pow(f, -exponent_);
        case SpectrumKind::lorentzian: {
            const double r = f / f_corner_;
            return amplitude_ / (1.0 + r * r);
        }
        case SpectrumKind::tabulated: {
            const auto& k = *knots_;
            auto it = std::lower_bound(k.begin(), k.end(), f,
                                       [](const SpectrumKnot& a, double v) { return a.f_hz < v; });
            if (it->f_hz == f) return it->s_f;
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            if (lo.s_f == 0.0 || hi.s_f == 0.0) {
                const double w = (f - lo.f_hz) / (hi.f_hz - lo.f_hz);
                return lo.s_f + w * (hi.s_f - lo.s_f);
            }
            const double slope = std::log(hi.s_f / lo.s_f) / std::log(hi.f_hz / lo.f_hz);
            return lo.s_f * std::exp(slope * std::log(f / lo.f_hz));
        }
        case SpectrumKind::sum: break;
    }
    return 0.0;
}

double PowerSpectrum::angular(double omega) const { return 0.5 * one_sided(omega / units::two_pi); }

double PowerSpectrum::band_power(double f_lo, double f_hi) const {
    if (kind_ == SpectrumKind::sum) {
        double total = 0.0;
        for (const auto& c : *children_) total += c.band_power(f_lo, f_hi);
        return total;
    }
    const double a = std::max(f_lo, f_ir_);
    const double b = std::min(f_hi, f_uv_);
    if (!(b > a)) return 0.0;
    switch (kind_) {
        case SpectrumKind::white: return amplitude_ * (b - a);
        case SpectrumKind::power_law: return power_integral(amplitude_, exponent_, a, b);
        case SpectrumKind::lorentzian:
            return amplitude_ * f_corner_ * (std::atan(b / f_corner_) - std::atan(a / f_corner_));
        case SpectrumKind::tabulated: {
            double total = 0.0;
            const auto& k = *knots_;
            for (std::size_t i = 0; i + 1 < k.size(); ++i) {
                const double lo = std::max(a, k[i].f_hz);
                const double hi = std::min(b, k[i + 1].f_hz);
                if (!(hi > lo)) continue;
                const double s0 = k[i].s_f, s1 = k[i + 1].s_f;
                if (s0 == 0.0 || s1 == 0.0) {
                    const double df = k[i + 1].f_hz - k[i].f_hz;
                    const double slope = (s1 - s0) / df;
                    const double ya = s0 + slope * (lo - k[i].f_hz);
                    const double yb = s0 + slope * (hi - k[i].f_hz);
                    total += 0.5 * (ya + yb) * (hi - lo);
                } else {
                    const double p = -std::log(s1 / s0) / std::log(k[i + 1].f_hz / k[i].f_hz);
                    // s(f) = c f^-p with c = s0 * f0^p
                    const double c = s0 * std::pow(k[i].f_hz, p);
                    total += power_integral(c, p, lo, hi);
                }
            }
            return total;
        }
        case SpectrumKind::sum: break;
    }
    return 0.0;
}

double PowerSpectrum::variance() const { return band_power(0.0, f_uv_); }

PowerSpectrum PowerSpectrum::scaled(double factor) const {
    if (!finite(factor) || factor < 0.0) throw ConfigError("spectrum scale factor must be finite and >= 0");
    PowerSpectrum s = *this;
    switch (kind_) {
        case SpectrumKind::sum: {
            std::vector<PowerSpectrum> kids;
            kids.reserve(children_->size());
            for (const auto& c : *children_) kids.push_back(c.scaled(factor));
            s.children_ = std::make_shared<const std::vector<PowerSpectrum>>(std::move(kids));
            break;
        }
        case SpectrumKind::tabulated: {
            auto k = *knots_;
            for (auto& knot : k) knot.s_f *= factor;
            s.knots_ = std::make_shared<const std::vector<SpectrumKnot>>(std::move(k));
            break;
        }
        default: s.amplitude_ *= factor; break;
    }
    return s;
}

std::vector<double> PowerSpectrum::breakpoints() const {
    std::vector<double> out;
    if (kind_ == SpectrumKind::sum) {
        for (const auto& c : *children_) {
            auto b = c.breakpoints();
            out.insert(out.end(), b.begin(), b.end());
        }
    } else if (kind_ == SpectrumKind::tabulated) {
        for (const auto& k : *knots_) out.push_back(k.f_hz);
    } else {
        out = {f_ir_, f_uv_};
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<std::pair<double, double>> PowerSpectrum::support() const {
    std::vector<std::pair<double, double>> bands;
    if (kind_ == SpectrumKind::sum) {
        for (const auto& c : *children_) {
            auto b = c.support();
            bands.insert(bands.end(), b.begin(), b.end());
        }
    } else {
        bands.emplace_back(f_ir_, f_uv_);
    }
    std::sort(bands.begin(), bands.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& b : bands) {
        if (!merged.empty() && b.first <= merged.back().second) {
            merged.back().second = std::max(merged.back().second, b.second);
        } else {
            merged.push_back(b);
        }
    }
    return merged;
}

std::string PowerSpectrum::id() const {
    switch (kind_) {
        case SpectrumKind::white:
            return "white(S0=" + fmt_g(amplitude_) + ",f_ir=" + fmt_g(f_ir_) + ",f_uv=" + fmt_g(f_uv_) + ")";
        case SpectrumKind::power_law:
            return "power_law(A=" + fmt_g(amplitude_) + ",alpha=" + fmt_g(exponent_) + ",f_ir=" + fmt_g(f_ir_) +
                   ",f_uv=" + fmt_g(f_uv_) + ")";
        case SpectrumKind::lorentzian:
            return "lorentzian(A=" + fmt_g(amplitude_) + ",fc=" + fmt_g(f_corner_) + ",f_ir=" + fmt_g(f_ir_) +
                   ",f_uv=" + fmt_g(f_uv_) + ")";
        case SpectrumKind::tabulated:
            return "tabulated(knots=" + std::to_string(knots_->size()) + ",f_ir=" + fmt_g(f_ir_) +
                   ",f_uv=" + fmt_g(f_uv_) + ")";
        case SpectrumKind::sum: {
            std::string out = "sum(";
            for (std::size_t i = 0; i < children_->size(); ++i) {
                if (i) out += "+";
                out += (*children_)[i].id();
            }
            return out + ")";
        }
    }
    return "unknown";
}

nlohmann::json PowerSpectrum::to_json() const {
    nlohmann::json j;
    j["kind"] = to_string(kind_);
    switch (kind_) {
        case SpectrumKind::white:
            j["level"] = amplitude_;
            break;
        case SpectrumKind::power_law:
            j["amplitude"] = amplitude_;
            j["exponent"] = exponent_;
            break;
        case SpectrumKind::lorentzian:
            j["amplitude"] = amplitude_;
            j["f_corner"] = f_corner_;
            break;
        case SpectrumKind::tabulated: {
            auto arr = nlohmann::json::array();
            for (const auto& k : *knots_) arr.push_back({k.f_hz, k.s_f});
            j["knots"] = std::move(arr);
            return j;
        }
        case SpectrumKind::sum: {
            auto arr = nlohmann::json::array();
            for (const auto& c : *children_) arr.push_back(c.to_json());
            j["children"] = std::move(arr);
            return j;
        }
    }
    j["f_ir"] = f_ir_;
    j["f_uv"] = f_uv_;
    return j;
}

PowerSpectrum PowerSpectrum::from_json(const nlohmann::json& j) {
    try {
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "white") return white(j.at("level").get<double>(), j.at("f_ir"), j.at("f_uv"));
        if (kind == "power_law") {
            return power_law(j.at("amplitude"), j.at("exponent"), j.at("f_ir"), j.at("f_uv"));
        }
        if (kind == "lorentzian") {
            return lorentzian(j.at("amplitude"), j.at("f_corner"), j.at("f_ir"), j.at("f_uv"));
        }
        if (kind == "tabulated") {
            std::vector<SpectrumKnot> knots;
            for (const auto& k : j.at("knots")) knots.push_back({k.at(0).get<double>(), k.at(1).get<double>()});
            return tabulated(std::move(knots));
        }
        if (kind == "sum") {
            std::vector<PowerSpectrum> kids;
            for (const auto& c : j.at("children")) kids.push_back(from_json(c));
            return combine(kids);
        }
        throw ConfigError("unknown spectrum kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed spectrum JSON: ") + e.what());
    }
}

PowerSpectrum make_power_law(double amplitude, double exponent, double f_ir, double f_uv) {
    return PowerSpectrum::power_law(amplitude, exponent, f_ir, f_uv);
}

double eval_one_sided(const PowerSpectrum& s, double f_hz) { return s.one_sided(f_hz); }

double eval_angular(const PowerSpectrum& s, double omega) { return s.angular(omega); }

PowerSpectrum combine(std::span<const PowerSpectrum> spectra) { return PowerSpectrum::combine(spectra); }

PowerSpectrum yag_rin_spectrum(double e_l) {
    if (!finite(e_l)) throw ConfigError("light-shift coupling must be finite");
    return PowerSpectrum::power_law(e_l * e_l * kYagRinAmplitude, kYagRinExponent, kYagOmegaIr / units::two_pi,
                                    kYagFUv);
}

PowerSpectrum load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open spectrum table '" + path + "'");
    std::string line;
    bool header_seen = false;
    std::vector<SpectrumKnot> knots;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            std::string compact;
            for (char c : line) {
                if (c != ' ' && c != '\t') compact += c;
            }
            if (compact != "f_hz,s_f") {
                throw ConfigError(path + ": expected header 'f_hz,s_f', got '" + line + "'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two columns");
        try {
            std::size_t used = 0;
            const std::string a = trim(line.substr(0, comma));
            const std::string b = trim(line.substr(comma + 1));
            const double f = std::stod(a, &used);
            if (used != a.size()) throw std::invalid_argument(a);
            const double v = std::stod(b, &used);
            if (used != b.size()) throw std::invalid_argument(b);
            knots.push_back({f, v});
        } catch (const std::logic_error&) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": cannot parse '" + line + "'");
        }
    }
    if (!header_seen) throw ConfigError(path + ": empty spectrum table");
    return PowerSpectrum::tabulated(std::move(knots));
}

}  // namespace decoh
