#include "decoh/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "decoh/errors.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

namespace {

constexpr int kMaxCddLevel = 20;

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void cdd_fill(int level, double offset, double scale, std::vector<double>& out) {
    if (level == 0) return;
    cdd_fill(level - 1, offset, scale / 2, out);
    if (level % 2 == 1) out.push_back(offset + scale / 2);
    cdd_fill(level - 1, offset + scale / 2, scale / 2, out);
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

void check_not_singular(double c, const char* what) {
    if (std::abs(c) < 1e-9) throw DomainError(std::string(what) + " closed form is singular at this point");
}

}  // namespace

std::string to_string(Family family) {
    switch (family) {
        case Family::fid: return "fid";
        case Family::se: return "se";
        case Family::cpmg: return "cpmg";
        case Family::pdd: return "pdd";
        case Family::cdd: return "cdd";
        case Family::udd: return "udd";
        case Family::custom: return "custom";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    for (Family f : {Family::fid, Family::se, Family::cpmg, Family::pdd, Family::cdd, Family::udd, Family::custom}) {
        if (to_string(f) == name) return f;
    }
    throw ConfigError("unknown pulse-sequence family '" + name + "'");
}

int cdd_pulse_count(int level) {
    if (level < 0 || level > kMaxCddLevel) throw ConfigError("CDD level out of range");
    int n = 0;
    for (int l = 1; l <= level; ++l) n = 2 * n + (l % 2);
    return n;
}

PulseSequence pulse_times(Family family, int n) {
    PulseSequence seq;
    seq.family_ = family;
    if (family == Family::fid) {
        if (n != 0) throw ConfigError("fid has no pulses");
        return seq;
    }
    if (family == Family::custom) throw ConfigError("use custom_sequence() for custom schedules");
    if (n < 1) throw ConfigError(to_string(family) + " needs at least one pulse (use fid for free evolution)");

    auto& fr = seq.fractions_;
    switch (family) {
        case Family::se:
            if (n != 1) throw ConfigError("se has exactly one pulse");
            fr = {0.5};
            break;
        case Family::cpmg:
            for (int k = 1; k <= n; ++k) fr.push_back((k - 0.5) / n);
            break;
        case Family::pdd:
            for (int k = 1; k <= n; ++k) fr.push_back(static_cast<double>(k) / (n + 1));
            break;
        case Family::udd:
            for (int k = 1; k <= n; ++k) {
                const double s = std::sin(units::pi * k / (2.0 * n + 2.0));
                fr.push_back(s * s);
            }
            break;
        case Family::cdd:
            if (n > kMaxCddLevel) throw ConfigError("CDD level above " + std::to_string(kMaxCddLevel));
            cdd_fill(n, 0.0, 1.0, fr);
            seq.cdd_level_ = n;
            break;
        default: break;
    }
    return seq;
}

PulseSequence custom_sequence(std::vector<double> fractions) {
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double f = fractions[i];
        if (!std::isfinite(f) || !(f > 0.0) || !(f < 1.0)) {
            throw ConfigError("pulse fractions must lie strictly inside (0, 1), got " + fmt_g(f));
        }
        if (i > 0 && !(f > fractions[i - 1])) {
            throw ConfigError("pulse fractions must be strictly increasing (no duplicates)");
        }
    }
    PulseSequence seq;
    if (fractions.empty()) return seq;
    seq.family_ = Family::custom;
    seq.fractions_ = std::move(fractions);
    return seq;
}

std::string PulseSequence::id() const {
    switch (family_) {
        case Family::fid: return "fid";
        case Family::se: return "se";
        case Family::cdd: return "cdd:l=" + std::to_string(*cdd_level_);
        case Family::custom: {
            std::string out = "custom:";
            for (std::size_t i = 0; i < fractions_.size(); ++i) {
                if (i) out += ",";
                out += fmt_g(fractions_[i]);
            }
            return out;
        }
        default: return to_string(family_) + ":" + std::to_string(fractions_.size());
    }
}

nlohmann::json PulseSequence::to_json() const {
    nlohmann::json j;
    j["family"] = to_string(family_);
    j["n"] = fractions_.size();
    j["fractions"] = fractions_;
    if (cdd_level_) j["level"] = *cdd_level_;
    return j;
}

PulseSequence PulseSequence::from_json(const nlohmann::json& j) {
    try {
        const Family fam = family_from_string(j.at("family").get<std::string>());
        if (fam == Family::custom) return custom_sequence(j.at("fractions").get<std::vector<double>>());
        if (fam == Family::fid) return PulseSequence{};
        if (fam == Family::cdd) return pulse_times(fam, j.at("level").get<int>());
        return pulse_times(fam, j.at("n").get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sequence JSON: ") + e.what());
    }
}

bool PulseSequence::is_symmetric(double tol) const {
    const std::size_t n = fractions_.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(fractions_[i] + fractions_[n - 1 - i] - 1.0) > tol) return false;
    }
    return true;
}

PulseSequence parse_sequence(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string tail = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
    const Family fam = family_from_string(head);
    switch (fam) {
        case Family::fid:
            if (!tail.empty() && tail != "0") throw ConfigError("fid takes no pulse count");
            return PulseSequence{};
        case Family::se:
            return pulse_times(Family::se, tail.empty() ? 1 : parse_int(tail, "pulse count"));
        case Family::cdd: {
            std::string lv = tail;
            if (lv.rfind("l=", 0) == 0) lv = lv.substr(2);
            if (lv.empty()) throw ConfigError("cdd needs a level, e.g. cdd:l=3");
            return pulse_times(Family::cdd, parse_int(lv, "CDD level"));
        }
        case Family::custom: {
            std::vector<double> fr;
            std::stringstream ss(tail);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item.empty()) continue;
                try {
                    std::size_t used = 0;
                    fr.push_back(std::stod(item, &used));
                    if (used != item.size()) throw std::invalid_argument(item);
                } catch (const std::logic_error&) {
                    throw ConfigError("cannot parse pulse fraction '" + item + "'");
                }
            }
            return custom_sequence(std::move(fr));
        }
        default:
            if (tail.empty()) throw ConfigError(head + " needs a pulse count, e.g. " + head + ":6");
            return pulse_times(fam, parse_int(tail, "pulse count"));
    }
}

FilterTerms filter_terms(const PulseSequence& seq) {
    const auto fr = seq.fractions();
    const std::size_t n = fr.size();
    FilterTerms t;
    t.positions.reserve(n + 2);
    t.coefficients.reserve(n + 2);
    t.positions.push_back(0.0);
    t.coefficients.push_back(-1.0);
    for (std::size_t j = 0; j < n; ++j) {
        t.positions.push_back(fr[j]);
        t.coefficients.push_back(j % 2 == 0 ? 2.0 : -2.0);
    }
    t.positions.push_back(1.0);
    t.coefficients.push_back(n % 2 == 0 ? 1.0 : -1.0);
    return t;
}

double filter_generic(const PulseSequence& seq, double x) {
    // Segment k spans [b_k, b_{k+1}] and contributes
    // (-1)^k (e^{i x b_{k+1}} - e^{i x b_k}) = (-1)^k 2i e^{i x m_k} sin(x h_k),
    // which keeps full relative accuracy as x -> 0.
    const auto fr = seq.fractions();
    double re = 0.0, im = 0.0;
    double lo = 0.0;
    for (std::size_t k = 0; k <= fr.size(); ++k) {
        const double hi = k < fr.size() ? fr[k] : 1.0;
        const double mid = 0.5 * (lo + hi);
        const double amp = std::sin(0.5 * x * (hi - lo));
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        re += sign * amp * std::cos(x * mid);
        im += sign * amp * std::sin(x * mid);
        lo = hi;
    }
    return 2.0 * (re * re + im * im);
}

double filter_closed_form(Family family, int n, double x, ClosedFormVariant variant) {
    const bool printed = variant == ClosedFormVariant::as_printed;
    auto sq = [](double v) { return v * v; };
    switch (family) {
        case Family::fid: return 2.0 * sq(std::sin(0.5 * x));
        case Family::se: return 8.0 * sq(sq(std::sin(0.25 * x)));
        case Family::cpmg: {
            if (n < 1) throw ConfigError("cpmg needs n >= 1");
            const double arg_g = printed ? x / (2.0 * n) : 0.5 * x;
            const double c = std::cos(x / (2.0 * n));
            const double lead = 8.0 * sq(sq(std::sin(x / (4.0 * n))));
            if (n % 2 == 1 && (printed || n == 1)) return lead;  // G / cos^2 == 1 identically
            const double g = n % 2 == 0 ? sq(std::sin(arg_g)) : sq(std::cos(arg_g));
            check_not_singular(c, "cpmg");
            return lead * g / (c * c);
        }
        case Family::pdd: {
            if (n < 1) throw ConfigError("pdd needs n >= 1");
            const double arg_g = printed ? x / (2.0 * n) : 0.5 * x;
            const double g = n % 2 == 0 ? sq(std::sin(arg_g)) : sq(std::cos(arg_g));
            const double c = std::cos(x / (2.0 * n + 2.0));
            check_not_singular(c, "pdd");
            return 2.0 * sq(std::tan(x / (2.0 * n + 2.0))) * (1.0 - g);
        }
        case Family::cdd: {
            const int l = n;
            if (l < 1) throw ConfigError("cdd needs level >= 1");
            const double lead = std::ldexp(1.0, 2 * l + 1);
            if (printed) {
                double f = lead * sq(std::sin(x / std::ldexp(1.0, 2 * l + 1)));
                for (int k = 1; k <= l; ++k) f *= std::sin(x / std::ldexp(1.0, k + 1));
                return f;
            }
            double f = lead * sq(std::sin(x / std::ldexp(1.0, l + 1)));
            for (int k = 1; k <= l; ++k) f *= sq(std::sin(x / std::ldexp(1.0, k + 1)));
            return f;
        }
        case Family::udd: {
            if (n < 1) throw ConfigError("udd needs n >= 1");
            double re = 0.0, im = 0.0;
            for (int k = -n - 1; k <= n; ++k) {
                const double sign = (k % 2 == 0) ? 1.0 : -1.0;
                const double phase = std::cos(units::pi * k / (n + 1.0)) * x / 2.0;
                if (printed) {
                    re += sign * std::exp(phase);
                } else {
                    re += sign * std::cos(phase);
                    im += sign * std::sin(phase);
                }
            }
            return 0.5 * (re * re + im * im);
        }
        case Family::custom: break;
    }
    throw ConfigError("no closed-form filter for family " + to_string(family));
}

}  // namespace decoh
