#include "decoh/oracle.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <random>
#include <thread>

#include "decoh/coherence.hpp"
#include "decoh/errors.hpp"

namespace decoh {

namespace {

constexpr std::size_t kSplitBin = 8;
constexpr double kLowBandsPerDecade = 24.0;
constexpr std::size_t kBatches = 10;
constexpr std::size_t kMinTrials = 100;
constexpr std::size_t kRotationReseed = 1024;

// FFTW planning is not reentrant.
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_stream(std::uint64_t seed, std::uint64_t trial) {
    return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * (trial + 1)));
}

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

struct LowBand {
    double lo;
    double hi;
    double power;
};

class SpectralGenerator final : public NoiseGenerator {
public:
    SpectralGenerator(const PowerSpectrum& s, std::size_t n, double dt, std::size_t oversample)
        : spectrum_(s), n_(n), dt_(dt) {
        m_ = next_pow2(std::max<std::size_t>(oversample * n, 4 * kSplitBin));
        const double df = 1.0 / (static_cast<double>(m_) * dt);
        const std::size_t half = m_ / 2;
        const double nyquist = static_cast<double>(half) * df;

        k_lo_ = kSplitBin;
        sigma_.assign(half + 1, 0.0);
        k_hi_ = k_lo_;
        for (std::size_t k = k_lo_; k <= half; ++k) {
            const double lo = (static_cast<double>(k) - 0.5) * df;
            if (lo > s.f_uv()) break;
            const double hi = std::min((static_cast<double>(k) + 0.5) * df, nyquist);
            const double p = s.band_power(lo, hi);
            sigma_[k] = k == half ? std::sqrt(p) : 0.5 * std::sqrt(p);
            if (p > 0.0) k_hi_ = k + 1;
        }

        const double split = (static_cast<double>(kSplitBin) - 0.5) * df;
        if (s.f_ir() < split) {
            const double a = s.f_ir();
            const auto count = static_cast<std::size_t>(std::ceil(kLowBandsPerDecade * std::log10(split / a)));
            for (std::size_t i = 0; i < count; ++i) {
                const double lo = a * std::pow(split / a, static_cast<double>(i) / count);
                const double hi = i + 1 == count ? split : a * std::pow(split / a, static_cast<double>(i + 1) / count);
                const double p = s.band_power(lo, hi);
                if (p > 0.0) low_.push_back({lo, hi, p});
            }
        }

        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (half + 1))));
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * m_)));
        if (!spec_ || !real_) throw std::bad_alloc();
        std::lock_guard lock(fftw_plan_mutex());
        plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(m_), spec_.get(), real_.get(), FFTW_ESTIMATE);
    }

    ~SpectralGenerator() override {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan_);
    }

    SpectralGenerator(const SpectralGenerator&) = delete;
    SpectralGenerator& operator=(const SpectralGenerator&) = delete;

    void fill(std::span<double> out, std::uint64_t stream_seed) override {
        if (out.size() > n_) throw ConfigError("noise generator asked for more samples than planned");
        std::mt19937_64 rng(stream_seed);
        std::normal_distribution<double> normal;

        const std::size_t half = m_ / 2;
        fftw_complex* y = spec_.get();
        for (std::size_t k = 0; k <= half; ++k) {
            y[k][0] = 0.0;
            y[k][1] = 0.0;
        }
        for (std::size_t k = k_lo_; k < k_hi_; ++k) {
            y[k][0] = sigma_[k] * normal(rng);
            y[k][1] = k == half ? 0.0 : sigma_[k] * normal(rng);
        }
        fftw_execute(plan_);
        std::uniform_int_distribution<std::size_t> pick(0, m_ - n_);
        const std::size_t offset = pick(rng);
        std::copy_n(real_.get() + offset, out.size(), out.begin());

        for (const auto& band : low_) {
            const double f = draw_frequency(band, rng);
            const double a = std::sqrt(band.power) * normal(rng);
            const double b = std::sqrt(band.power) * normal(rng);
            add_sinusoid(out, f, a, b);
        }
    }

private:
    // Frequency with density proportional to S_f inside the sub-band.
    double draw_frequency(const LowBand& band, std::mt19937_64& rng) const {
        const double target = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * band.power;
        double lo = band.lo, hi = band.hi;
        for (int it = 0; it < 48; ++it) {
            const double mid = std::sqrt(lo * hi);
            if (spectrum_.band_power(band.lo, mid) < target) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return std::sqrt(lo * hi);
    }

    void add_sinusoid(std::span<double> out, double f, double a, double b) const {
        const double step = units::two_pi * f * dt_;
        const double cs = std::cos(step), sn = std::sin(step);
        double c = 1.0, s = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i % kRotationReseed == 0) {
                const double ph = step * static_cast<double>(i);
                c = std::cos(ph);
                s = std::sin(ph);
            }
            out[i] += a * c + b * s;
            const double nc = c * cs - s * sn;
            s = s * cs + c * sn;
            c = nc;
        }
    }

    PowerSpectrum spectrum_;
    std::size_t n_;
    double dt_;
    std::size_t m_ = 0;
    std::size_t k_lo_ = 0;
    std::size_t k_hi_ = 0;
    std::vector<double> sigma_;
    std::vector<LowBand> low_;
    std::unique_ptr<fftw_complex, FftwFree> spec_;
    std::unique_ptr<double, FftwFree> real_;
    fftw_plan plan_ = nullptr;
};

class ConstantGenerator final : public NoiseGenerator {
public:
    explicit ConstantGenerator(double v) : value_(v) {}
    void fill(std::span<double> out, std::uint64_t) override { std::fill(out.begin(), out.end(), value_); }

private:
    double value_;
};

void check_dt(const PowerSpectrum& s, double dt) {
    if (!std::isfinite(dt) || !(dt > 0.0)) throw ConfigError("time step must be > 0");
    if (dt > 0.5 / s.f_uv() * (1.0 + 1e-12)) {
        throw ConfigError("time step " + fmt_g(dt) + " s violates Nyquist for f_uv = " + fmt_g(s.f_uv()) + " Hz");
    }
}

std::size_t even_steps_ceil(double t, double dt) {
    auto n = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
    n = std::max<std::size_t>(n, 2);
    return n + (n % 2);
}

std::size_t even_steps_round(double t, double dt) {
    auto n = static_cast<std::size_t>(std::llround(0.5 * t / dt)) * 2;
    return std::max<std::size_t>(n, 2);
}

// Pulse sample indices; nearbyint rounds half to even under the default mode.
std::vector<std::size_t> boundaries(const PulseSequence& seq, std::size_t steps) {
    std::vector<std::size_t> b{0};
    for (double f : seq.fractions()) {
        const double idx = std::nearbyint(f * static_cast<double>(steps));
        b.push_back(std::min(steps, static_cast<std::size_t>(std::max(0.0, idx))));
    }
    b.push_back(steps);
    return b;
}

// Trapezoidal phase of each free segment.
std::vector<double> segment_phases(std::span<const double> eps, std::span<const std::size_t> bounds, double dt) {
    std::vector<double> phi(bounds.size() - 1, 0.0);
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const std::size_t a = bounds[k], b = bounds[k + 1];
        if (a == b) continue;
        double acc = 0.5 * (eps[a] + eps[b]);
        for (std::size_t i = a + 1; i < b; ++i) acc += eps[i];
        phi[k] = acc * dt;
    }
    return phi;
}

std::complex<double> toggled_coherence(std::span<const double> phi) {
    const std::size_t n = phi.size() - 1;
    double dphi = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) dphi += ((n - k) % 2 == 0 ? 1.0 : -1.0) * phi[k];
    return std::polar(1.0, -dphi);
}

struct UnitaryResult {
    std::complex<double> coherence;
    double norm;
};

UnitaryResult unitary_coherence(std::span<const double> phi, std::span<const double> angle_errors) {
    using cd = std::complex<double>;
    const double r = 1.0 / std::sqrt(2.0);
    cd up(r, 0.0), down(r, 0.0);
    for (std::size_t k = 0; k < phi.size(); ++k) {
        up *= std::polar(1.0, -0.5 * phi[k]);
        down *= std::polar(1.0, 0.5 * phi[k]);
        if (k + 1 < phi.size()) {
            const double theta = units::pi + angle_errors[k];
            const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
            const cd nu = c * up + cd(0.0, -s) * down;
            const cd nd = cd(0.0, -s) * up + c * down;
            up = nu;
            down = nd;
        }
    }
    return {2.0 * up * std::conj(down), std::norm(up) + std::norm(down)};
}

struct TimePlan {
    std::size_t steps;
    std::vector<std::size_t> bounds;
};

// Runs all trials and returns per-trial coherences, trial-major.
std::vector<std::complex<double>> run_trials(const NoiseSource& source, const PulseSequence& seq,
                                             std::span<const TimePlan> plans, double dt, const McOptions& opt) {
    std::size_t max_steps = 0;
    for (const auto& p : plans) max_steps = std::max(max_steps, p.steps);
    const std::size_t n_samples = max_steps + 1;
    const std::size_t n_t = plans.size();
    const std::size_t n_pulses = seq.n_pulses();
    const bool unitary = opt.force_unitary || opt.pulse_error != 0.0;

    std::vector<std::complex<double>> out(opt.trials * n_t);
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, opt.trials));

    auto worker = [&](unsigned w) {
        auto gen = source.generator(n_samples, dt);
        std::vector<double> eps(n_samples);
        std::vector<double> errors(n_pulses, opt.pulse_error);
        for (std::size_t trial = w; trial < opt.trials; trial += threads) {
            const std::uint64_t stream = trial_stream(opt.seed, trial);
            gen->fill(eps, stream);
            if (unitary && opt.error_mode == PulseErrorMode::random) {
                std::mt19937_64 rng(splitmix64(stream ^ 0x5DEECE66DULL));
                std::normal_distribution<double> normal(0.0, opt.pulse_error);
                for (auto& e : errors) e = normal(rng);
            }
            for (std::size_t i = 0; i < n_t; ++i) {
                const auto phi = segment_phases(eps, plans[i].bounds, dt);
                out[trial * n_t + i] = unitary ? unitary_coherence(phi, errors).coherence : toggled_coherence(phi);
            }
        }
    };

    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::exception_ptr> errs(threads);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    worker(w);
                } catch (...) {
                    errs[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs) {
            if (e) std::rethrow_exception(e);
        }
    }
    return out;
}

McEstimate summarize(std::span<const std::complex<double>> values, std::size_t stride, std::size_t column,
                     std::size_t trials) {
    std::complex<double> mean = 0.0;
    for (std::size_t j = 0; j < trials; ++j) mean += values[j * stride + column];
    mean /= static_cast<double>(trials);
    McEstimate est;
    est.w = std::abs(mean);
    est.trials = trials;
    // Linearized error of |mean|: project each trial on the mean direction.
    const std::complex<double> u = est.w > 0.0 ? mean / est.w : std::complex<double>(1.0, 0.0);
    double ss = 0.0;
    for (std::size_t j = 0; j < trials; ++j) {
        const double r = std::real(values[j * stride + column] * std::conj(u)) - est.w;
        ss += r * r;
    }
    est.std_error = std::sqrt(ss / (static_cast<double>(trials) * static_cast<double>(trials - 1)));

    std::vector<double> batch(kBatches, 0.0);
    std::vector<std::size_t> count(kBatches, 0);
    for (std::size_t j = 0; j < trials; ++j) {
        const std::size_t b = j * kBatches / trials;
        batch[b] += std::real(values[j * stride + column] * std::conj(u));
        ++count[b];
    }
    double bs = 0.0;
    for (std::size_t b = 0; b < kBatches; ++b) {
        const double d = batch[b] / static_cast<double>(count[b]) - est.w;
        bs += d * d;
    }
    est.batch_stderr = std::sqrt(bs / static_cast<double>(kBatches * (kBatches - 1)));
    return est;
}

void check_trials(const McOptions& opt) {
    if (opt.trials < kMinTrials) throw ConfigError("Monte Carlo needs at least 100 trials");
    if (!std::isfinite(opt.pulse_error)) throw ConfigError("pulse error must be finite");
}

double default_dt(const PowerSpectrum& s, double dt) { return dt > 0.0 ? dt : 0.125 / s.f_uv(); }

}  // namespace

void NoiseTrace::write_csv(std::ostream& out) const {
    out << "# spectrum: " << spectrum_id << "\n";
    out << "# seed: " << seed << "\n";
    out << "# dt_s: " << fmt_g(dt) << "\n";
    out << "t_s,eps_rad_s\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out << fmt_g(dt * static_cast<double>(i)) << "," << fmt_g(samples[i]) << "\n";
    }
}

SpectralNoiseSource::SpectralNoiseSource(PowerSpectrum s, std::size_t oversample)
    : spectrum_(std::move(s)), oversample_(oversample) {
    if (oversample_ < 1) throw ConfigError("oversample factor must be >= 1");
}

std::unique_ptr<NoiseGenerator> SpectralNoiseSource::generator(std::size_t n_samples, double dt) const {
    check_dt(spectrum_, dt);
    if (n_samples < 2) throw ConfigError("noise trace needs at least 2 samples");
    return std::make_unique<SpectralGenerator>(spectrum_, n_samples, dt, oversample_);
}

std::unique_ptr<NoiseGenerator> ConstantNoiseSource::generator(std::size_t, double) const {
    return std::make_unique<ConstantGenerator>(value_);
}

std::string ConstantNoiseSource::id() const { return "constant(eps=" + fmt_g(value_) + ")"; }

std::size_t trace_length(double duration, double dt) {
    if (!std::isfinite(duration) || !(duration > 0.0)) throw ConfigError("trace duration must be > 0");
    if (!std::isfinite(dt) || !(dt > 0.0)) throw ConfigError("time step must be > 0");
    return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

NoiseTrace synthesize_noise(const PowerSpectrum& s, double duration, double dt, std::uint64_t seed) {
    check_dt(s, dt);
    NoiseTrace trace;
    trace.dt = dt;
    trace.seed = seed;
    trace.spectrum_id = s.id();
    trace.samples.resize(trace_length(duration, dt));
    if (trace.samples.size() < 2) throw ConfigError("noise trace needs at least 2 samples");
    SpectralNoiseSource source(s);
    source.generator(trace.samples.size(), dt)->fill(trace.samples, trial_stream(seed, 0));
    return trace;
}

Periodogram periodogram(const NoiseTrace& trace) {
    const std::size_t n = trace.samples.size();
    if (n < 8) throw ConfigError("periodogram needs at least 8 samples");
    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    double u = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(units::two_pi * static_cast<double>(i) / static_cast<double>(n)));
        in.get()[i] = w * trace.samples[i];
        u += w * w;
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    Periodogram p;
    const double df = 1.0 / (static_cast<double>(n) * trace.dt);
    for (std::size_t k = 1; k < n / 2; ++k) {
        const double re = out.get()[k][0], im = out.get()[k][1];
        p.f_hz.push_back(static_cast<double>(k) * df);
        p.s_f.push_back(2.0 * trace.dt * (re * re + im * im) / u);
    }
    return p;
}

McEstimate mc_decoherence(const NoiseSource& source, const PulseSequence& seq, double t, double dt,
                          const McOptions& opt) {
    check_trials(opt);
    if (!std::isfinite(t) || !(t > 0.0)) throw ConfigError("Monte Carlo time must be > 0");
    if (!std::isfinite(dt) || !(dt > 0.0)) throw ConfigError("time step must be > 0");
    const std::size_t steps = even_steps_ceil(t, dt);
    const double dt_eff = t / static_cast<double>(steps);
    const TimePlan plan{steps, boundaries(seq, steps)};
    const auto values = run_trials(source, seq, std::span(&plan, 1), dt_eff, opt);
    McEstimate est = summarize(values, 1, 0, opt.trials);
    est.seed = opt.seed;
    est.t = t;
    est.dt = dt_eff;
    return est;
}

McEstimate mc_decoherence(const PowerSpectrum& s, const PulseSequence& seq, double t, const McOptions& opt) {
    const double dt = default_dt(s, opt.dt);
    check_dt(s, dt);
    return mc_decoherence(SpectralNoiseSource(s), seq, t, dt, opt);
}

PathComparison compare_paths(const NoiseTrace& trace, const PulseSequence& seq, std::size_t steps,
                             double pulse_error) {
    if (steps < 2 || steps >= trace.samples.size()) throw ConfigError("steps must fit inside the trace");
    const auto bounds = boundaries(seq, steps);
    const auto phi = segment_phases(trace.samples, bounds, trace.dt);
    const std::vector<double> errors(seq.n_pulses(), pulse_error);
    const auto u = unitary_coherence(phi, errors);
    return {toggled_coherence(phi), u.coherence, u.norm};
}

bool McComparison::all_pass() const {
    return std::none_of(rows.begin(), rows.end(), [](const McComparisonRow& r) { return r.flagged; });
}

nlohmann::json McComparison::to_json() const {
    nlohmann::json j;
    j["spectrum"] = spectrum_id;
    j["sequence"] = sequence_id;
    j["trials"] = trials;
    j["seed"] = seed;
    j["dt_s"] = dt;
    j["z_limit"] = z_limit;
    j["all_pass"] = all_pass();
    auto& arr = j["rows"] = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"t_s", r.t},
                       {"t_eff_s", r.t_eff},
                       {"w_mc", r.w_mc},
                       {"stderr", r.std_error},
                       {"w_spectral", r.w_spectral},
                       {"z", r.z},
                       {"flagged", r.flagged}});
    }
    return j;
}

McComparison compare_mc_spectral(const PowerSpectrum& s, const PulseSequence& seq, std::span<const double> t_grid,
                                 const McOptions& opt, double tol) {
    check_trials(opt);
    if (opt.pulse_error != 0.0) throw ConfigError("spectral comparison requires perfect pulses (pulse error 0)");
    if (t_grid.empty()) throw ConfigError("comparison grid is empty");
    const double dt = default_dt(s, opt.dt);
    check_dt(s, dt);

    std::vector<TimePlan> plans;
    for (double t : t_grid) {
        if (!std::isfinite(t) || !(t > 0.0)) throw ConfigError("comparison times must be > 0");
        const std::size_t steps = even_steps_round(t, dt);
        plans.push_back({steps, boundaries(seq, steps)});
    }
    const auto values = run_trials(SpectralNoiseSource(s), seq, plans, dt, opt);

    McComparison rep;
    rep.spectrum_id = s.id();
    rep.sequence_id = seq.id();
    rep.trials = opt.trials;
    rep.seed = opt.seed;
    rep.dt = dt;
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const McEstimate est = summarize(values, plans.size(), i, opt.trials);
        McComparisonRow row;
        row.t = t_grid[i];
        row.t_eff = static_cast<double>(plans[i].steps) * dt;
        row.w_mc = est.w;
        row.std_error = est.std_error;
        row.w_spectral = decoherence_at(s, seq, row.t_eff, tol);
        row.z = est.std_error > 0.0 ? (row.w_mc - row.w_spectral) / est.std_error
                                    : (row.w_mc == row.w_spectral ? 0.0 : std::copysign(INFINITY, row.w_mc - row.w_spectral));
        row.flagged = !(std::abs(row.z) <= rep.z_limit);
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace decoh
