#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace decoh {

enum class Family { fid, se, cpmg, pdd, cdd, udd, custom };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Instantaneous pi-pulse schedule, stored as fractions t_k / t of the total
/// evolution time. Fractions are strictly increasing inside (0, 1).
class PulseSequence {
public:
    PulseSequence() = default;  // free induction decay

    Family family() const noexcept { return family_; }
    std::size_t n_pulses() const noexcept { return fractions_.size(); }
    std::span<const double> fractions() const noexcept { return fractions_; }
    std::optional<int> cdd_level() const noexcept { return cdd_level_; }

    /// Short identifier such as `cpmg:6`, `cdd:l=3` or `custom:0.25,0.75`.
    std::string id() const;
    nlohmann::json to_json() const;
    static PulseSequence from_json(const nlohmann::json& j);

    /// Reflection symmetry s -> 1 - s of the fraction set (to `tol`).
    bool is_symmetric(double tol = 1e-12) const;

    friend PulseSequence pulse_times(Family family, int n_or_level);
    friend PulseSequence custom_sequence(std::vector<double> fractions);

private:
    Family family_ = Family::fid;
    std::vector<double> fractions_;
    std::optional<int> cdd_level_;
};

/// Catalog generator. `n_or_level` is the pulse count, or the concatenation
/// level for Family::cdd. SE ignores the count beyond requiring it to be 1.
PulseSequence pulse_times(Family family, int n_or_level);
PulseSequence custom_sequence(std::vector<double> fractions);
inline PulseSequence fid() { return PulseSequence{}; }

/// Number of pulses produced by the concatenation recursion at `level`.
int cdd_pulse_count(int level);

/// Parses `fid`, `se`, `cpmg:50`, `pdd:5`, `udd:6`, `cdd:l=3`, `cdd:3`,
/// `custom:0.1,0.5,0.9`.
PulseSequence parse_sequence(const std::string& text);

/// Boundary form of the toggling function: F(x) = 1/2 |sum_j c_j e^{i x b_j}|^2
/// with b_0 = 0, b_{n+1} = 1.
struct FilterTerms {
    std::vector<double> positions;     // b_j
    std::vector<double> coefficients;  // c_j
};
FilterTerms filter_terms(const PulseSequence& seq);

/// F(x) at x = omega * t from the pulse-time sum
/// 1/2 |sum_{k=0}^{n} (-1)^k (e^{i x t_{k+1}} - e^{i x t_k})|^2.
double filter_generic(const PulseSequence& seq, double x);

enum class ClosedFormVariant {
    as_printed,  // formulas exactly as quoted in the literature catalog
    repaired,    // corrected forms that agree with filter_generic
};

/// Closed-form filter functions for SE, CPMG, PDD, CDD (n = level) and UDD.
/// Only used to cross-check filter_generic. Throws DomainError at points
/// where the expression is singular.
double filter_closed_form(Family family, int n, double x,
                          ClosedFormVariant variant = ClosedFormVariant::repaired);

}  // namespace decoh
