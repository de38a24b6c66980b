#include "decoh/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "decoh/errors.hpp"
#include "decoh/quadrature.hpp"

namespace decoh {

namespace {

using quadrature::Gk61;

constexpr std::size_t kNodes = Gk61::size;
constexpr std::size_t kReseedInterval = 32;

struct Panel {
    double lo;
    double hi;
    double value;
    double err;
};

// Evaluates S_f(f) F(2 pi f t) / (4 pi^2 f^2) on GK61 panels.
class DephasingIntegrand {
public:
    DephasingIntegrand(const PowerSpectrum& s, const PulseSequence& seq, double t)
        : spectrum_(s), seq_(seq), t_(t), terms_(filter_terms(seq)), rule_(quadrature::gk61()) {}

    // One panel with direct filter evaluation.
    Panel direct(double lo, double hi) const {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        std::array<double, kNodes> g{};
        for (std::size_t m = 0; m < kNodes; ++m) {
            const double f = c + h * rule_.node[m];
            g[m] = weight(f) * filter_generic(seq_, units::two_pi * f * t_);
        }
        return finish(lo, hi, g);
    }

    // `count` consecutive equal panels starting at `lo`, filter sums by
    // phasor recurrence. Appends to `out`.
    void uniform_run(double lo, double width, std::size_t count, std::vector<Panel>& out) const {
        const std::size_t nb = terms_.positions.size();
        const double h = 0.5 * width;
        const double xh = units::two_pi * t_ * h;

        // offset phasors e^{i xh node_m b_j}, laid out [j][m]
        std::vector<double> er(nb * kNodes), ei(nb * kNodes);
        for (std::size_t j = 0; j < nb; ++j) {
            for (std::size_t m = 0; m < kNodes; ++m) {
                const double ph = xh * rule_.node[m] * terms_.positions[j];
                er[j * kNodes + m] = std::cos(ph);
                ei[j * kNodes + m] = std::sin(ph);
            }
        }
        std::vector<double> step_r(nb), step_i(nb), cr(nb), ci(nb);
        for (std::size_t j = 0; j < nb; ++j) {
            const double ph = 2.0 * xh * terms_.positions[j];
            step_r[j] = std::cos(ph);
            step_i[j] = std::sin(ph);
        }

        std::array<double, kNodes> acc_r{}, acc_i{}, g{};
        for (std::size_t p = 0; p < count; ++p) {
            const double plo = lo + static_cast<double>(p) * width;
            const double phi = lo + static_cast<double>(p + 1) * width;
            const double c = lo + (static_cast<double>(p) + 0.5) * width;
            if (p % kReseedInterval == 0) {
                const double xc = units::two_pi * t_ * c;
                for (std::size_t j = 0; j < nb; ++j) {
                    const double ph = xc * terms_.positions[j];
                    cr[j] = terms_.coefficients[j] * std::cos(ph);
                    ci[j] = terms_.coefficients[j] * std::sin(ph);
                }
            } else {
                for (std::size_t j = 0; j < nb; ++j) {
                    const double r = cr[j] * step_r[j] - ci[j] * step_i[j];
                    const double i = cr[j] * step_i[j] + ci[j] * step_r[j];
                    cr[j] = r;
                    ci[j] = i;
                }
            }
            acc_r.fill(0.0);
            acc_i.fill(0.0);
            for (std::size_t j = 0; j < nb; ++j) {
                const double a = cr[j], b = ci[j];
                const double* erj = &er[j * kNodes];
                const double* eij = &ei[j * kNodes];
                for (std::size_t m = 0; m < kNodes; ++m) {
                    acc_r[m] += a * erj[m] - b * eij[m];
                    acc_i[m] += a * eij[m] + b * erj[m];
                }
            }
            for (std::size_t m = 0; m < kNodes; ++m) {
                const double f = c + h * rule_.node[m];
                g[m] = weight(f) * 0.5 * (acc_r[m] * acc_r[m] + acc_i[m] * acc_i[m]);
            }
            out.push_back(finish(plo, phi, g));
        }
    }

private:
    double weight(double f) const {
        if (f <= 0.0) return 0.0;
        return spectrum_.one_sided(f) / (4.0 * units::pi * units::pi * f * f);
    }

    Panel finish(double lo, double hi, const std::array<double, kNodes>& g) const {
        double k = 0.0, gs = 0.0;
        for (std::size_t m = 0; m < kNodes; ++m) {
            k += rule_.kronrod_weight[m] * g[m];
            gs += rule_.gauss_weight[m] * g[m];
        }
        const double h = 0.5 * (hi - lo);
        return {lo, hi, k * h, std::abs(k - gs) * h};
    }

    const PowerSpectrum& spectrum_;
    const PulseSequence& seq_;
    double t_;
    FilterTerms terms_;
    const Gk61& rule_;
};

void check_tol(double tol) {
    if (!std::isfinite(tol) || !(tol > 0.0) || tol > 1e-3) {
        throw ConfigError("tolerance must lie in (0, 1e-3]");
    }
}

}  // namespace

ChiEstimate dephasing_exponent(const PowerSpectrum& s, const PulseSequence& seq, double t,
                               const QuadratureOptions& opt) {
    if (!std::isfinite(t) || t < 0.0) throw ConfigError("evolution time must be finite and >= 0");
    check_tol(opt.rel_tol);
    ChiEstimate est;
    if (t == 0.0) return est;

    DephasingIntegrand integrand(s, seq, t);
    const double lin_width = opt.max_panel_phase / (units::two_pi * t);

    // Split the support at every breakpoint, then lay out panels in
    // ascending frequency: log panels at low frequency, uniform runs above.
    struct Segment {
        double lo;
        double width;
        std::size_t count;  // 0 marks a single log panel [lo, lo + width]
    };
    std::vector<Segment> layout;
    const auto bps = s.breakpoints();
    double f_top = 0.0;
    for (const auto& [A, B] : s.support()) {
        std::vector<double> cuts{A};
        for (double b : bps) {
            if (b > A && b < B) cuts.push_back(b);
        }
        cuts.push_back(B);
        f_top = std::max(f_top, B);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double f = cuts[i];
            const double b = cuts[i + 1];
            while (f < b && opt.max_panel_ratio * f < lin_width) {
                const double next = std::min(b, f * (1.0 + opt.max_panel_ratio));
                layout.push_back({f, next - f, 0});
                f = next;
            }
            if (f < b) {
                const auto count = static_cast<std::size_t>(std::ceil((b - f) / lin_width));
                layout.push_back({f, (b - f) / static_cast<double>(count), count});
            }
        }
    }

    // Upper bound on the integral above f, using F <= 2 (n + 1)^2 and 1/f^2
    // bounded on octaves.
    const double n1 = static_cast<double>(seq.n_pulses()) + 1.0;
    const double f_max_filter = 2.0 * n1 * n1;
    auto tail_bound = [&](double f) {
        double sum = 0.0;
        for (double lo = f; lo < f_top; lo *= 2.0) {
            sum += s.band_power(lo, std::min(2.0 * lo, f_top)) / (lo * lo);
        }
        return f_max_filter * sum / (4.0 * units::pi * units::pi);
    };

    auto fail = [&] {
        est.chi = std::numeric_limits<double>::quiet_NaN();
        est.abserr = std::numeric_limits<double>::infinity();
        est.converged = false;
        return est;
    };

    constexpr std::size_t kChunk = 256;
    std::vector<Panel> panels;
    double running = 0.0, tail = 0.0;
    bool truncated = false;
    for (const auto& seg : layout) {
        if (truncated) break;
        if (seg.count == 0) {
            if (est.evaluations + kNodes > opt.max_evaluations) return fail();
            panels.push_back(integrand.direct(seg.lo, seg.lo + seg.width));
            running += panels.back().value;
            est.evaluations += kNodes;
            continue;
        }
        for (std::size_t done = 0; done < seg.count; done += kChunk) {
            const double lo = seg.lo + static_cast<double>(done) * seg.width;
            const double bound = tail_bound(lo);
            if (running > 0.0 && bound <= 0.1 * opt.rel_tol * running) {
                tail = bound;
                truncated = true;
                break;
            }
            const std::size_t n = std::min(kChunk, seg.count - done);
            if (est.evaluations + n * kNodes > opt.max_evaluations) return fail();
            const std::size_t first = panels.size();
            integrand.uniform_run(lo, seg.width, n, panels);
            for (std::size_t i = first; i < panels.size(); ++i) running += panels[i].value;
            est.evaluations += n * kNodes;
        }
    }

    double total = 0.0, err = tail;
    for (const auto& p : panels) {
        total += p.value;
        err += p.err;
    }

    auto target = [&] { return opt.rel_tol * std::abs(total); };
    if (err > target()) {
        auto cmp = [&](std::size_t a, std::size_t b) { return panels[a].err < panels[b].err; };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
        for (std::size_t i = 0; i < panels.size(); ++i) heap.push(i);
        while (err > target() && est.evaluations + 2 * kNodes <= opt.max_evaluations && !heap.empty()) {
            const std::size_t idx = heap.top();
            heap.pop();
            const Panel parent = panels[idx];
            const double mid = 0.5 * (parent.lo + parent.hi);
            if (!(mid > parent.lo && mid < parent.hi)) continue;
            const Panel left = integrand.direct(parent.lo, mid);
            const Panel right = integrand.direct(mid, parent.hi);
            est.evaluations += 2 * kNodes;
            total += left.value + right.value - parent.value;
            err += left.err + right.err - parent.err;
            panels[idx] = left;
            panels.push_back(right);
            heap.push(idx);
            heap.push(panels.size() - 1);
        }
        // Re-sum in panel order so the result does not depend on update history.
        total = 0.0;
        err = tail;
        for (const auto& p : panels) {
            total += p.value;
            err += p.err;
        }
    }
    est.chi = total;
    est.abserr = err;
    est.converged = err <= target();
    return est;
}

double decoherence_at(const PowerSpectrum& s, const PulseSequence& seq, double t, double tol) {
    check_tol(tol);
    if (t == 0.0) return 1.0;
    QuadratureOptions opt;
    opt.rel_tol = tol;
    const auto est = dephasing_exponent(s, seq, t, opt);
    if (!est.converged) {
        throw QuadratureError("quadrature did not reach rel tol " + std::to_string(tol) + " at t=" +
                                  std::to_string(t) + " (chi=" + std::to_string(est.chi) +
                                  ", abserr=" + std::to_string(est.abserr) + ")",
                              est.chi, est.abserr);
    }
    return std::exp(-est.chi);
}

double multi_source_w(std::span<const PowerSpectrum> spectra, const PulseSequence& seq, double t, double tol) {
    if (spectra.empty()) throw ConfigError("multi_source_w needs at least one spectrum");
    double w = 1.0;
    for (const auto& s : spectra) w *= decoherence_at(s, seq, t, tol);
    return w;
}

DecoherenceCurve decoherence_curve(const PowerSpectrum& s, const PulseSequence& seq, std::span<const double> times,
                                   double tol) {
    check_tol(tol);
    DecoherenceCurve curve;
    curve.spectrum_id = s.id();
    curve.sequence_id = seq.id();
    curve.tol = tol;
    QuadratureOptions opt;
    opt.rel_tol = tol;
    double prev = -1.0;
    for (double t : times) {
        if (!(t > prev)) throw ConfigError("curve times must be strictly increasing and >= 0");
        prev = t;
        const auto est = dephasing_exponent(s, seq, t, opt);
        if (!est.converged) {
            throw QuadratureError("quadrature did not converge at t=" + std::to_string(t), est.chi, est.abserr);
        }
        curve.times.push_back(t);
        curve.w.push_back(t == 0.0 ? 1.0 : std::exp(-est.chi));
        curve.chi_abserr.push_back(est.abserr);
    }
    return curve;
}

CoherenceResult coherence_time(const PowerSpectrum& s, const PulseSequence& seq, double t_max, double tol) {
    if (!std::isfinite(t_max) || !(t_max > 0.0)) throw ConfigError("t_max must be finite and > 0");
    check_tol(tol);
    QuadratureOptions opt;
    opt.rel_tol = tol;

    CoherenceResult res;
    res.n_pulses = seq.n_pulses();
    res.family = seq.family();
    res.sequence_id = seq.id();

    auto chi_at = [&](double t) {
        const auto est = dephasing_exponent(s, seq, t, opt);
        ++res.chi_evaluations;
        if (!est.converged) {
            throw QuadratureError("quadrature did not converge at t=" + std::to_string(t) + " for " + seq.id(),
                                  est.chi, est.abserr);
        }
        return est.chi;
    };

    // W = 1/e  <=>  chi = 1
    double lo = 0.0, chi_lo = 0.0;
    double t = 1e-4 * t_max;
    double hi = -1.0;
    while (true) {
        const double c = chi_at(t);
        if (c < chi_lo) res.monotone = false;
        if (c >= 1.0) {
            hi = t;
            break;
        }
        lo = t;
        chi_lo = c;
        if (t >= t_max) break;
        t = std::min(1.5 * t, t_max);
    }
    if (hi < 0.0) {
        res.t2 = t_max;
        res.bracket_lo = lo;
        res.bracket_hi = t_max;
        res.converged = false;
        return res;
    }
    while (hi - lo > 1e-4 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double c = chi_at(mid);
        if (c >= 1.0) {
            hi = mid;
        } else {
            if (c < chi_lo) res.monotone = false;
            lo = mid;
            chi_lo = c;
        }
    }
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    res.t2 = 0.5 * (lo + hi);
    res.converged = true;
    return res;
}

std::vector<ScanEntry> pulse_scan(const PowerSpectrum& s, Family family, std::span<const int> n_list, double t_max,
                                  double tol) {
    if (n_list.empty()) throw ConfigError("pulse scan needs at least one pulse count");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        if (!(n_list[i] > n_list[i - 1])) throw ConfigError("pulse counts must be strictly ascending");
    }
    std::vector<ScanEntry> out;
    out.reserve(n_list.size());
    for (int n : n_list) {
        ScanEntry e;
        e.n = n;
        try {
            const PulseSequence seq = family == Family::fid ? fid() : pulse_times(family, n);
            e.result = coherence_time(s, seq, t_max, tol);
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        out.push_back(std::move(e));
    }
    return out;
}

PowerSpectrum calibrate_to_fid_t2(const PowerSpectrum& s, double target_t2, double tol) {
    if (!std::isfinite(target_t2) || !(target_t2 > 0.0)) throw ConfigError("target T2 must be > 0");
    QuadratureOptions opt;
    opt.rel_tol = tol;
    const auto est = dephasing_exponent(s, fid(), target_t2, opt);
    if (!est.converged) throw QuadratureError("calibration quadrature did not converge", est.chi, est.abserr);
    if (!(est.chi > 0.0)) throw NumericalError("cannot calibrate a spectrum that produces no dephasing");
    return s.scaled(1.0 / est.chi);
}

}  // namespace decoh
