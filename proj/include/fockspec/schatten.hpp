#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fockspec/common.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/hankel.hpp"
#include "fockspec/weights.hpp"

namespace fockspec {

enum class Verdict { Converges, Diverges, Inconclusive, NotApplicable };
const char* to_string(Verdict v);

// Octave-ladder increment analysis. True divergence is not decidable
// numerically; increments u_k over doubling windows behave like 2^{k(1-tau)}
// for tail terms ~ n^{-tau}, so the fitted ratio q carries the implied
// exponent tau = 1 - log2 q. Stage one applies the coarse thresholds
// (q < 0.9 / nondecreasing), stage two decides through tau when the decay
// is too gentle for stage one.
struct LadderFit {
    double q_hat = 0.0;
    double tau_hat = 0.0;
    bool nondecreasing = false;
    Verdict verdict = Verdict::Inconclusive;
};
LadderFit ladder_verdict(std::span<const double> partials);

struct PartialLadder {
    std::vector<double> x;        // R or N per rung, doubling
    std::vector<double> partial;  // cumulative value at x
    LadderFit fit;
    void write_csv(std::ostream& os) const;  // "R_or_N,partial"
};

struct CriterionResult {
    PartialLadder ladder;            // partials of int |g'|^p rho^(p-2) dm
    Verdict verdict;                 // numeric, from the ladder
    double exponent = 0.0;           // radial-power integrand exponent
    Verdict exact_verdict = Verdict::NotApplicable;  // exponent < -1 test
};
CriterionResult criterion_integral(const WeightSpec& w, const SymbolPoly& g,
                                   double p, std::span<const double> radii,
                                   const RadialRhoCache* cache = nullptr);

struct CriticalExponent {
    enum class Kind { Threshold, NotApplicable, Never };
    double p_star = 0.0;  // +inf when Never; 2 when NotApplicable (d = 0)
    Kind kind = Kind::Threshold;
};
CriticalExponent critical_exponent(double m, long d);

struct DecayFit {
    double alpha = 0.0;  // negated log-log slope of s_n over the window
    double stderr_ = 0.0;
    long n1 = 0, n2 = 0;
};
// Window guards: n2 >= 2 n1 and n2 <= N - 2 deg g (truncation edge band).
DecayFit decay_fit(const HankelSpectrum& sp, long n1, long n2);

struct SchattenPartial {
    PartialLadder ladder;  // x = N', partial = sum of s_n^p, n < N'
    Verdict verdict;
};
SchattenPartial schatten_partial_norm(const HankelSpectrum& sp, double p);

// Two-branch bound B(z,zeta) = |z-zeta|^-1 inside D(z, rho(z)), else
// rho(z)^-1 exp(-d_phi(z,zeta)^eps); the mixed norm is the outer L^p norm
// of the inner L^p' norm, and B* swaps the roles of the variables.
struct EnvelopeResult {
    double p = 0.0, eps = 0.0, d_max = 0.0;
    PartialLadder b_ladder, bstar_ladder;
    Verdict verdict_b = Verdict::Inconclusive;
    Verdict verdict_bstar = Verdict::Inconclusive;
    Verdict verdict = Verdict::Inconclusive;  // both must converge
    double exponent = 0.0;                    // radial-power outer exponent
    Verdict exact_verdict = Verdict::NotApplicable;
    double tail_frac = 0.0;  // d-truncation estimate at the largest radius
};
EnvelopeResult envelope_mixed_norm(const WeightSpec& w, double p, double eps,
                                   std::span<const double> radii);

struct PerPVerdict {
    double p = 0.0;
    Verdict criterion = Verdict::Inconclusive;
    Verdict spectral = Verdict::Inconclusive;
    Verdict arithmetic = Verdict::NotApplicable;
    Verdict verdict = Verdict::Inconclusive;  // resolved
    bool near_threshold = false;
};

struct SchattenReport {
    std::string weight_id;
    std::string symbol;
    long N = 0;
    double m_eff = 0.0;   // weight exponent; fitted from rho for tables
    bool m_fitted = false;
    CriticalExponent p_star;
    std::vector<PerPVerdict> per_p;
    DecayFit alpha;
    Verdict hs_verdict = Verdict::Inconclusive;
    std::string operator_label;
    void write_json(std::ostream& os) const;
};

// Assembles the three-way classification. Outside the near-threshold band
// |p - p*| <= 0.1 p* the combined verdict is the consensus of the methods
// that decided, and a decided contradiction is reported as INCONCLUSIVE
// rather than resolved away; inside the band the arithmetic verdict
// resolves and the entry is flagged.
SchattenReport classify(const WeightSpec& w, const SymbolPoly& g,
                        std::span<const double> p_grid,
                        const HankelSpectrum& sp);

}  // namespace fockspec
