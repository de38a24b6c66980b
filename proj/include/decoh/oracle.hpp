#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoh/sequences.hpp"
#include "decoh/spectra.hpp"

namespace decoh {

/// A sampled realization of eps(t) in rad/s: samples[i] = eps(i * dt).
struct NoiseTrace {
    double dt = 0.0;
    std::vector<double> samples;
    std::uint64_t seed = 0;
    std::string spectrum_id;

    double duration() const noexcept {
        return samples.empty() ? 0.0 : dt * static_cast<double>(samples.size() - 1);
    }
    /// Two columns `t_s,eps_rad_s` with a `# ` provenance header.
    void write_csv(std::ostream& out) const;
};

/// Fills sample buffers for one trial at a time. One instance per thread.
class NoiseGenerator {
public:
    virtual ~NoiseGenerator() = default;
    /// Writes `out.size()` consecutive samples spaced by the generator's dt,
    /// drawing all randomness from `stream_seed`.
    virtual void fill(std::span<double> out, std::uint64_t stream_seed) = 0;
};

/// Stationary noise model that the Monte Carlo engine can sample.
class NoiseSource {
public:
    virtual ~NoiseSource() = default;
    virtual std::unique_ptr<NoiseGenerator> generator(std::size_t n_samples, double dt) const = 0;
    virtual std::string id() const = 0;
};

/// Gaussian noise with a prescribed one-sided spectrum, by random-phase
/// synthesis on a circular window `oversample` times longer than the trace,
/// read at a random offset. The band below the eighth FFT bin is carried by
/// explicit random sinusoids (log-spaced sub-bands) so that the total
/// variance matches the spectrum down to f_ir.
class SpectralNoiseSource final : public NoiseSource {
public:
    explicit SpectralNoiseSource(PowerSpectrum s, std::size_t oversample = 8);
    std::unique_ptr<NoiseGenerator> generator(std::size_t n_samples, double dt) const override;
    std::string id() const override { return spectrum_.id(); }
    const PowerSpectrum& spectrum() const noexcept { return spectrum_; }

private:
    PowerSpectrum spectrum_;
    std::size_t oversample_;
};

/// eps(t) = value for every trial; test source for static-noise refocusing.
class ConstantNoiseSource final : public NoiseSource {
public:
    explicit ConstantNoiseSource(double value) : value_(value) {}
    std::unique_ptr<NoiseGenerator> generator(std::size_t n_samples, double dt) const override;
    std::string id() const override;

private:
    double value_;
};

/// Sample count for a trace of `duration` at step `dt`: floor(duration/dt) + 1.
std::size_t trace_length(double duration, double dt);

/// One realization of `s` on [0, duration]. Requires dt <= 1/(2 f_uv).
NoiseTrace synthesize_noise(const PowerSpectrum& s, double duration, double dt, std::uint64_t seed);

/// Hann-windowed one-sided periodogram of a trace; frequencies k/(N dt) for
/// k = 1 .. N/2 - 1 and densities in (rad/s)^2/Hz.
struct Periodogram {
    std::vector<double> f_hz;
    std::vector<double> s_f;
};
Periodogram periodogram(const NoiseTrace& trace);

enum class PulseErrorMode {
    /// Every pulse rotates by pi + delta.
    systematic,
    /// Each pulse rotates by pi + delta_k with delta_k ~ N(0, delta^2), drawn per trial.
    random,
};

struct McOptions {
    /// Sample step; 0 selects 1 / (8 f_uv).
    double dt = 0.0;
    std::size_t trials = 2000;
    double pulse_error = 0.0;
    PulseErrorMode error_mode = PulseErrorMode::systematic;
    /// Forces the 2x2 unitary propagation even for pulse_error = 0.
    bool force_unitary = false;
    std::uint64_t seed = 1;
    /// Worker threads; 0 selects the hardware concurrency. Results do not
    /// depend on this value.
    unsigned threads = 0;
};

struct McEstimate {
    double w = 1.0;
    /// Standard error of w from the per-trial spread.
    double std_error = 0.0;
    /// Standard error from 10 batch means.
    double batch_stderr = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double t = 0.0;
    double dt = 0.0;
};

/// W(t) = |<exp(-i dphi)>| over independent noise realizations. With a pulse
/// error (or force_unitary) each trial propagates the two-level state through
/// free precession and pi + delta rotations instead of the sign-toggled phase.
McEstimate mc_decoherence(const PowerSpectrum& s, const PulseSequence& seq, double t, const McOptions& opt = {});
McEstimate mc_decoherence(const NoiseSource& source, const PulseSequence& seq, double t, double dt,
                          const McOptions& opt = {});

/// Per-trial complex coherence 2 psi_up psi_down^* for both propagation paths
/// on one realization; used to check that they agree for perfect pulses.
struct PathComparison {
    std::complex<double> toggled;
    std::complex<double> unitary;
    double norm = 1.0;
};
PathComparison compare_paths(const NoiseTrace& trace, const PulseSequence& seq, std::size_t steps,
                             double pulse_error = 0.0);

struct McComparisonRow {
    double t = 0.0;        ///< requested time
    double t_eff = 0.0;    ///< time actually simulated (whole, even number of steps)
    double w_mc = 0.0;
    double std_error = 0.0;
    double w_spectral = 0.0;
    double z = 0.0;
    bool flagged = false;
};

struct McComparison {
    std::vector<McComparisonRow> rows;
    std::string spectrum_id;
    std::string sequence_id;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double z_limit = 3.5;
    bool all_pass() const;
    nlohmann::json to_json() const;
};

/// Monte Carlo versus spectral W on a time grid. All grid points share each
/// trial's noise realization; the spectral side is evaluated at t_eff.
McComparison compare_mc_spectral(const PowerSpectrum& s, const PulseSequence& seq, std::span<const double> t_grid,
                                 const McOptions& opt = {}, double tol = 1e-6);

}  // namespace decoh
