#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "decoh/sequences.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

inline constexpr double kDefaultCurveTol = 1e-6;
inline constexpr double kDefaultScanTol = 1e-5;

struct QuadratureOptions {
    /// Relative tolerance on the dephasing exponent chi, in (0, 1e-3].
    double rel_tol = kDefaultCurveTol;
    /// Total integrand evaluations allowed for one chi(t).
    std::size_t max_evaluations = 4'000'000;
    /// Widest panel, measured in the filter phase x = omega t.
    double max_panel_phase = 48.0;
    /// Widest panel relative to its lower frequency edge (low-frequency region).
    double max_panel_ratio = 0.25;
};

struct ChiEstimate {
    double chi = 0.0;
    double abserr = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

/// Dephasing exponent chi(t) = int_0^inf (dw/pi) S(w) F(w t) / w^2, so that
/// W(t) = exp(-chi). Integrates over the spectrum's support with
/// Gauss-Kronrod panels (logarithmic at low frequency, uniform in the
/// oscillatory region). The high-frequency tail is dropped once a bound on its
/// contribution falls below a tenth of the tolerance; the bound is added to
/// `abserr`. Does not throw on non-convergence; inspect `converged`.
ChiEstimate dephasing_exponent(const PowerSpectrum& s, const PulseSequence& seq, double t,
                               const QuadratureOptions& opt = {});

/// W(t) with relative error on chi at most `tol`. Throws QuadratureError when
/// the evaluation budget runs out before reaching `tol`.
double decoherence_at(const PowerSpectrum& s, const PulseSequence& seq, double t, double tol = kDefaultCurveTol);

/// W for uncorrelated sources: the product of single-source W.
double multi_source_w(std::span<const PowerSpectrum> spectra, const PulseSequence& seq, double t,
                      double tol = kDefaultCurveTol);

struct DecoherenceCurve {
    std::vector<double> times;
    std::vector<double> w;
    std::vector<double> chi_abserr;
    std::string spectrum_id;
    std::string sequence_id;
    double tol = kDefaultCurveTol;
};

DecoherenceCurve decoherence_curve(const PowerSpectrum& s, const PulseSequence& seq, std::span<const double> times,
                                   double tol = kDefaultCurveTol);

struct CoherenceResult {
    double t2 = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::size_t n_pulses = 0;
    Family family = Family::fid;
    std::string sequence_id;
    bool converged = false;
    /// False when W rose between two sampled times before the crossing.
    bool monotone = true;
    std::size_t chi_evaluations = 0;
};

/// First time W(t) drops to 1/e: geometric scan (factor 1.5) from
/// 1e-4 * t_max, then bisection to relative bracket width 1e-4. When no
/// crossing occurs by t_max, returns converged = false with t2 = t_max.
CoherenceResult coherence_time(const PowerSpectrum& s, const PulseSequence& seq, double t_max,
                               double tol = kDefaultScanTol);

struct ScanEntry {
    int n = 0;
    std::optional<CoherenceResult> result;
    std::string error;
};

/// coherence_time for each pulse count in `n_list` (ascending). For
/// Family::cdd the entries are concatenation levels. A failure at one point
/// is recorded in that entry and the scan continues.
std::vector<ScanEntry> pulse_scan(const PowerSpectrum& s, Family family, std::span<const int> n_list, double t_max,
                                  double tol = kDefaultScanTol);

/// Rescales `s` so that FID coherence time equals `target_t2`. Exact up to
/// quadrature tolerance since chi is linear in S.
PowerSpectrum calibrate_to_fid_t2(const PowerSpectrum& s, double target_t2, double tol = kDefaultCurveTol);

}  // namespace decoh
