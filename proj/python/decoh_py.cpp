#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "decoh/coherence.hpp"
#include "decoh/errors.hpp"
#include "decoh/io.hpp"
#include "decoh/oracle.hpp"
#include "decoh/sequences.hpp"
#include "decoh/spectra.hpp"
#include "decoh/trap.hpp"

namespace py = pybind11;
using namespace decoh;

namespace {

py::dict to_dict(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_dict(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict result_dict(const CoherenceResult& r) {
    py::dict d;
    d["t2"] = r.t2;
    d["bracket"] = py::make_tuple(r.bracket_lo, r.bracket_hi);
    d["n_pulses"] = r.n_pulses;
    d["family"] = to_string(r.family);
    d["sequence"] = r.sequence_id;
    d["converged"] = r.converged;
    d["monotone"] = r.monotone;
    return d;
}

McOptions mc_options(std::size_t trials, std::uint64_t seed, double dt, double pulse_error, bool random_error,
                     unsigned threads) {
    McOptions o;
    o.trials = trials;
    o.seed = seed;
    o.dt = dt;
    o.pulse_error = pulse_error;
    o.error_mode = random_error ? PulseErrorMode::random : PulseErrorMode::systematic;
    o.threads = threads;
    return o;
}

}  // namespace

PYBIND11_MODULE(_decoh, m) {
    m.doc() = "Dephasing of a trapped-atom qubit: spectra, pulse sequences, coherence times, Monte Carlo checks";
    m.attr("__version__") = kVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ArithmeticError);

    py::class_<PowerSpectrum>(m, "PowerSpectrum")
        .def_static("power_law", &PowerSpectrum::power_law, py::arg("amplitude"), py::arg("exponent"),
                    py::arg("f_ir"), py::arg("f_uv"))
        .def_static("white", &PowerSpectrum::white, py::arg("level"), py::arg("f_ir"), py::arg("f_uv"))
        .def_static("lorentzian", &PowerSpectrum::lorentzian, py::arg("amplitude"), py::arg("f_corner"),
                    py::arg("f_ir"), py::arg("f_uv"))
        .def_static(
            "tabulated",
            [](const std::vector<std::pair<double, double>>& knots) {
                std::vector<SpectrumKnot> k;
                for (const auto& [f, s] : knots) k.push_back({f, s});
                return PowerSpectrum::tabulated(std::move(k));
            },
            py::arg("knots"))
        .def_static(
            "combine", [](const std::vector<PowerSpectrum>& parts) { return PowerSpectrum::combine(parts); },
            py::arg("parts"))
        .def_static(
            "from_json", [](const py::object& o) { return PowerSpectrum::from_json(from_dict(o)); }, py::arg("data"))
        .def("one_sided", py::vectorize(&PowerSpectrum::one_sided), py::arg("f_hz"))
        .def("angular", py::vectorize(&PowerSpectrum::angular), py::arg("omega"))
        .def("band_power", &PowerSpectrum::band_power, py::arg("f_lo"), py::arg("f_hi"))
        .def("variance", &PowerSpectrum::variance)
        .def("scaled", &PowerSpectrum::scaled, py::arg("factor"))
        .def_property_readonly("kind", [](const PowerSpectrum& s) { return to_string(s.kind()); })
        .def_property_readonly("f_ir", &PowerSpectrum::f_ir)
        .def_property_readonly("f_uv", &PowerSpectrum::f_uv)
        .def_property_readonly("id", &PowerSpectrum::id)
        .def("to_json", [](const PowerSpectrum& s) { return to_dict(s.to_json()); })
        .def("__repr__", [](const PowerSpectrum& s) { return "<PowerSpectrum " + s.id() + ">"; });

    m.def("parse_spectrum", &parse_spectrum, py::arg("text"));
    m.def("yag_rin_spectrum", &yag_rin_spectrum, py::arg("e_l"));
    m.def("load_tabulated_csv", &load_tabulated_csv, py::arg("path"));

    py::class_<PulseSequence>(m, "PulseSequence")
        .def_property_readonly("family", [](const PulseSequence& s) { return to_string(s.family()); })
        .def_property_readonly("n_pulses", &PulseSequence::n_pulses)
        .def_property_readonly("fractions",
                               [](const PulseSequence& s) {
                                   const auto f = s.fractions();
                                   return std::vector<double>(f.begin(), f.end());
                               })
        .def_property_readonly("cdd_level", &PulseSequence::cdd_level)
        .def_property_readonly("id", &PulseSequence::id)
        .def("is_symmetric", &PulseSequence::is_symmetric, py::arg("tol") = 1e-12)
        .def("to_json", [](const PulseSequence& s) { return to_dict(s.to_json()); })
        .def("__repr__", [](const PulseSequence& s) { return "<PulseSequence " + s.id() + ">"; });

    m.def("fid", &fid);
    m.def(
        "pulse_times", [](const std::string& family, int n) { return pulse_times(family_from_string(family), n); },
        py::arg("family"), py::arg("n"));
    m.def("custom_sequence", &custom_sequence, py::arg("fractions"));
    m.def("parse_sequence", &parse_sequence, py::arg("text"));
    m.def(
        "filter_generic",
        [](const PulseSequence& seq, py::array_t<double> x) {
            return py::vectorize([&seq](double v) { return filter_generic(seq, v); })(x);
        },
        py::arg("seq"), py::arg("x"));
    m.def(
        "filter_closed_form",
        [](const std::string& family, int n, double x, bool repaired) {
            return filter_closed_form(family_from_string(family), n, x,
                                      repaired ? ClosedFormVariant::repaired : ClosedFormVariant::as_printed);
        },
        py::arg("family"), py::arg("n"), py::arg("x"), py::arg("repaired") = true);

    m.def(
        "dephasing_exponent",
        [](const PowerSpectrum& s, const PulseSequence& seq, double t, double rel_tol) {
            QuadratureOptions o;
            o.rel_tol = rel_tol;
            const auto e = dephasing_exponent(s, seq, t, o);
            py::dict d;
            d["chi"] = e.chi;
            d["abserr"] = e.abserr;
            d["evaluations"] = e.evaluations;
            d["converged"] = e.converged;
            return d;
        },
        py::arg("spectrum"), py::arg("seq"), py::arg("t"), py::arg("rel_tol") = kDefaultCurveTol);
    m.def("decoherence_at", &decoherence_at, py::arg("spectrum"), py::arg("seq"), py::arg("t"),
          py::arg("tol") = kDefaultCurveTol);
    m.def(
        "multi_source_w",
        [](const std::vector<PowerSpectrum>& s, const PulseSequence& seq, double t, double tol) {
            return multi_source_w(s, seq, t, tol);
        },
        py::arg("spectra"), py::arg("seq"), py::arg("t"), py::arg("tol") = kDefaultCurveTol);
    m.def(
        "decoherence_curve",
        [](const PowerSpectrum& s, const PulseSequence& seq, const std::vector<double>& times, double tol) {
            const auto c = decoherence_curve(s, seq, times, tol);
            py::dict d;
            d["t"] = py::array_t<double>(c.times.size(), c.times.data());
            d["w"] = py::array_t<double>(c.w.size(), c.w.data());
            d["spectrum"] = c.spectrum_id;
            d["sequence"] = c.sequence_id;
            d["tol"] = c.tol;
            return d;
        },
        py::arg("spectrum"), py::arg("seq"), py::arg("times"), py::arg("tol") = kDefaultCurveTol);
    m.def(
        "coherence_time",
        [](const PowerSpectrum& s, const PulseSequence& seq, double t_max, double tol) {
            return result_dict(coherence_time(s, seq, t_max, tol));
        },
        py::arg("spectrum"), py::arg("seq"), py::arg("t_max"), py::arg("tol") = kDefaultScanTol);
    m.def(
        "pulse_scan",
        [](const PowerSpectrum& s, const std::string& family, const std::vector<int>& ns, double t_max, double tol) {
            py::list out;
            for (const auto& e : pulse_scan(s, family_from_string(family), ns, t_max, tol)) {
                py::dict d = e.result ? result_dict(*e.result) : py::dict();
                d["n"] = e.n;
                d["error"] = e.error;
                out.append(d);
            }
            return out;
        },
        py::arg("spectrum"), py::arg("family"), py::arg("n_list"), py::arg("t_max"), py::arg("tol") = kDefaultScanTol);
    m.def("calibrate_to_fid_t2", &calibrate_to_fid_t2, py::arg("spectrum"), py::arg("target_t2"),
          py::arg("tol") = kDefaultCurveTol);

    py::class_<TrapConfig>(m, "TrapConfig")
        .def_static("from_json", [](const py::object& o) { return TrapConfig::from_json(from_dict(o)); })
        .def("to_json", [](const TrapConfig& c) { return to_dict(c.to_json()); })
        .def_readwrite("peak_intensity", &TrapConfig::peak_intensity)
        .def_readwrite("trap_omega", &TrapConfig::trap_omega)
        .def_readwrite("mass", &TrapConfig::mass)
        .def_readwrite("e_hyperfine", &TrapConfig::e_hyperfine);
    m.def("trap_preset", [](const std::string& name) { return trap_preset(name); }, py::arg("name"));
    m.def(
        "differential_light_shift",
        [](const TrapConfig& c) {
            const auto r = differential_light_shift(c);
            return py::make_tuple(r.e_l, r.e_total);
        },
        py::arg("config"));
    m.def("inverse_effective_detuning", &inverse_effective_detuning, py::arg("delta1"), py::arg("delta2"),
          py::arg("alpha_pol"), py::arg("g_f"), py::arg("m_f"));
    m.def("zeeman_splitting", &zeeman_splitting, py::arg("g_f"), py::arg("m_f"), py::arg("b_z"));
    m.def("adiabaticity_ratio", &adiabaticity_ratio, py::arg("config"), py::arg("gamma_amp"), py::arg("noise_freq"));

    m.def(
        "synthesize_noise",
        [](const PowerSpectrum& s, double duration, double dt, std::uint64_t seed) {
            const auto tr = synthesize_noise(s, duration, dt, seed);
            return py::array_t<double>(tr.samples.size(), tr.samples.data());
        },
        py::arg("spectrum"), py::arg("duration"), py::arg("dt"), py::arg("seed"));
    m.def(
        "mc_decoherence",
        [](const PowerSpectrum& s, const PulseSequence& seq, double t, std::size_t trials, std::uint64_t seed,
           double dt, double pulse_error, bool random_error, unsigned threads) {
            const auto e =
                mc_decoherence(s, seq, t, mc_options(trials, seed, dt, pulse_error, random_error, threads));
            py::dict d;
            d["w"] = e.w;
            d["stderr"] = e.std_error;
            d["batch_stderr"] = e.batch_stderr;
            d["trials"] = e.trials;
            d["dt"] = e.dt;
            return d;
        },
        py::arg("spectrum"), py::arg("seq"), py::arg("t"), py::arg("trials") = 2000, py::arg("seed") = 1,
        py::arg("dt") = 0.0, py::arg("pulse_error") = 0.0, py::arg("random_error") = false, py::arg("threads") = 0);
    m.def(
        "compare_mc_spectral",
        [](const PowerSpectrum& s, const PulseSequence& seq, const std::vector<double>& ts, std::size_t trials,
           std::uint64_t seed, double dt, unsigned threads) {
            return to_dict(compare_mc_spectral(s, seq, ts, mc_options(trials, seed, dt, 0.0, false, threads)).to_json());
        },
        py::arg("spectrum"), py::arg("seq"), py::arg("times"), py::arg("trials") = 2000, py::arg("seed") = 1,
        py::arg("dt") = 0.0, py::arg("threads") = 0);
}
