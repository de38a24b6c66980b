#include "decoh/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "decoh/errors.hpp"
#include "decoh/trap.hpp"

namespace decoh {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

std::map<std::string, double> parse_params(const std::string& text, const std::string& kind) {
    std::map<std::string, double> p;
    if (text.empty()) return p;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigError(kind + ": expected key=value, got '" + item + "'");
        const std::string key = trim(item.substr(0, eq));
        if (p.count(key)) throw ConfigError(kind + ": duplicate parameter '" + key + "'");
        p[key] = parse_number(trim(item.substr(eq + 1)), kind + " parameter " + key);
    }
    return p;
}

double take(std::map<std::string, double>& p, const std::string& key, const std::string& kind) {
    auto it = p.find(key);
    if (it == p.end()) throw ConfigError(kind + " requires parameter '" + key + "'");
    const double v = it->second;
    p.erase(it);
    return v;
}

double take_or(std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    if (it == p.end()) return fallback;
    const double v = it->second;
    p.erase(it);
    return v;
}

void no_leftovers(const std::map<std::string, double>& p, const std::string& kind) {
    if (!p.empty()) throw ConfigError(kind + ": unknown parameter '" + p.begin()->first + "'");
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

PowerSpectrum parse_term(std::string term) {
    double factor = 1.0;
    if (const auto star = term.rfind('*'); star != std::string::npos) {
        factor = parse_number(trim(term.substr(star + 1)), "spectrum scale factor");
        if (!(factor >= 0.0)) throw ConfigError("spectrum scale factor must be >= 0");
        term = trim(term.substr(0, star));
    }
    const auto colon = term.find(':');
    const std::string head = trim(term.substr(0, colon));
    const std::string tail = colon == std::string::npos ? std::string{} : trim(term.substr(colon + 1));

    PowerSpectrum s = [&] {
        if (head == kYagPresetName) {
            if (!tail.empty()) throw ConfigError(std::string(kYagPresetName) + " takes no parameters");
            const auto shift = differential_light_shift(trap_preset(kDefaultTrapPreset));
            return yag_rin_spectrum(shift.e_l);
        }
        if (head == "white") {
            auto p = parse_params(tail, "white");
            const double s0 = take(p, "S0", "white");
            const double f_ir = take_or(p, "f_ir", 1e-4);
            const double f_uv = take_or(p, "f_uv", 1e4);
            no_leftovers(p, "white");
            return PowerSpectrum::white(s0, f_ir, f_uv);
        }
        if (head == "power") {
            auto p = parse_params(tail, "power");
            const double a = take(p, "A", "power");
            const double alpha = take(p, "alpha", "power");
            const double f_ir = take(p, "f_ir", "power");
            const double f_uv = take(p, "f_uv", "power");
            no_leftovers(p, "power");
            return PowerSpectrum::power_law(a, alpha, f_ir, f_uv);
        }
        if (head == "lorentz") {
            auto p = parse_params(tail, "lorentz");
            const double a = take(p, "A", "lorentz");
            const double fc = take(p, "fc", "lorentz");
            const double f_ir = take_or(p, "f_ir", 1e-4);
            const double f_uv = take_or(p, "f_uv", 1e4);
            no_leftovers(p, "lorentz");
            return PowerSpectrum::lorentzian(a, fc, f_ir, f_uv);
        }
        if (head == "csv") {
            if (tail.empty()) throw ConfigError("csv: needs a file path");
            return load_tabulated_csv(tail);
        }
        if (colon == std::string::npos && ends_with(head, ".csv")) return load_tabulated_csv(head);
        throw ConfigError("unknown spectrum '" + term + "'");
    }();
    return factor == 1.0 ? s : s.scaled(factor);
}

}  // namespace

PowerSpectrum parse_spectrum(const std::string& text) {
    std::vector<PowerSpectrum> parts;
    for (const auto& term : split(text, '+')) {
        if (term.empty()) throw ConfigError("empty term in spectrum '" + text + "'");
        parts.push_back(parse_term(term));
    }
    if (parts.empty()) throw ConfigError("empty spectrum description");
    if (parts.size() == 1) return parts.front();
    return PowerSpectrum::combine(parts);
}

std::vector<double> parse_time_grid(const std::string& text) {
    const auto f = split(text, ':');
    if (f.size() != 3) throw ConfigError("time grid must be start:stop:step, got '" + text + "'");
    const double start = parse_number(f[0], "grid start");
    const double stop = parse_number(f[1], "grid stop");
    const double step = parse_number(f[2], "grid step");
    if (start < 0.0) throw ConfigError("grid start must be >= 0");
    if (!(stop > start)) throw ConfigError("grid stop must exceed start (empty grid)");
    if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
    const double span = (stop - start) / step;
    if (span > 1e7) throw ConfigError("time grid has more than 1e7 points");
    const auto n = static_cast<std::size_t>(std::floor(span + 1e-9));
    std::vector<double> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    auto to_int = [](const std::string& s) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::logic_error&) {
            throw ConfigError("cannot parse integer from '" + s + "'");
        }
    };
    for (const auto& item : split(text, ',')) {
        if (item.empty()) continue;
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        const int a = to_int(trim(item.substr(0, dots)));
        std::string rest = item.substr(dots + 2);
        int step = 1;
        if (const auto slash = rest.find('/'); slash != std::string::npos) {
            step = to_int(trim(rest.substr(slash + 1)));
            rest = rest.substr(0, slash);
        }
        const int b = to_int(trim(rest));
        if (step < 1 || b < a) throw ConfigError("bad integer range '" + item + "'");
        for (int v = a; v <= b; v += step) out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::map<std::string, std::string> out;
    const std::string lead = trim(text);
    if (!lead.empty() && lead.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed JSON config '" + path + "': " + e.what());
        }
        for (const auto& [k, v] : j.items()) {
            if (v.is_string()) {
                out[k] = v.get<std::string>();
            } else if (v.is_number_integer()) {
                out[k] = std::to_string(v.get<long long>());
            } else if (v.is_number()) {
                out[k] = format_double(v.get<double>());
            } else if (v.is_boolean()) {
                out[k] = v.get<bool>() ? "true" : "false";
            } else {
                throw ConfigError("config key '" + k + "' must be a scalar");
            }
        }
        return out;
    }
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#' || line.front() == ';' || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        out[trim(line.substr(0, eq))] = value;
    }
    return out;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write output file '" + path + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("failed writing output file '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at '" + path + "'");
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string render_csv(const nlohmann::json& provenance, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (const auto& [k, v] : provenance.items()) {
        out += "# " + k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ",";
        out += header[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            out += format_double(row[i]);
        }
        out += "\n";
    }
    return out;
}

}  // namespace decoh
