#pragma once

#include <string>
#include <vector>

#include "fockspec/common.hpp"
#include "fockspec/fock.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/weights.hpp"

namespace fockspec {

// Analytic polynomial g; the constant term is dropped on construction
// since H with a conjugated constant symbol is the zero operator.
class SymbolPoly {
public:
    explicit SymbolPoly(std::vector<cdouble> coeffs);
    static SymbolPoly monomial(long d, cdouble a = 1.0);

    long degree() const { return static_cast<long>(c_.size()) - 1; }
    bool is_constant() const { return c_.size() == 1 && c_[0] == 0.0; }
    bool is_monomial() const;
    const std::vector<cdouble>& coeffs() const { return c_; }
    cdouble coeff(long d) const;
    cdouble eval(cdouble z) const;
    SymbolPoly derivative() const;
    std::string to_string() const;

private:
    std::vector<cdouble> c_;  // c_[d] multiplies z^d; c_[0] always 0
};

// Hermitian band matrix in LAPACK lower band storage, column major:
// ab[(i - j) + j * (bw + 1)] = A(i, j) for j <= i <= j + bw.
struct BandMatrix {
    long n = 0;
    long bw = 0;
    std::vector<cdouble> ab;
    cdouble at(long i, long j) const;
};

// Gram of the Hankel images G_jk = <H e_k, H e_j>; every bracket reduces
// to moment ratios for radial weights, and the inner products beyond the
// compression use exact moments, so singular values are monotone lower
// bounds of the untruncated ones.
BandMatrix hankel_gram(const MomentTable& mt, const SymbolPoly& g, long N);

struct HankelSpectrum {
    std::string weight_id;
    std::string symbol;
    long symbol_degree = 0;
    long N = 0;
    std::string method;  // "closed_form" or "eigensolver"
    std::vector<double> s;
    void write_csv(std::ostream& os) const;  // "n,s_n"
};

HankelSpectrum singular_values(const BandMatrix& gram,
                               const std::string& weight_id,
                               const std::string& symbol,
                               long symbol_degree = 0);

// Monomial symbols on radial weights: the Gram is diagonal with
// s_n^2 = I_{n+d}/I_n - I_n/I_{n-d} (second term absent for n < d).
HankelSpectrum closed_form_spectrum(const MomentTable& mt, long d, long N);

struct GrowthIndicator {
    double sup_value = 0.0;
    double exponent = 0.0;  // (deg g - 1) + log-log slope of rho
    bool bounded = false;
    bool compact = false;
};
GrowthIndicator symbol_growth_indicator(const WeightSpec& w,
                                        const SymbolPoly& g, double r_lo,
                                        double r_hi, int n_samples = 40);

// Max over samples of e^{-phi(z)} |matrix action - pointwise formula|,
// the formula being (conj g(z) - conj g(lambda)) k_lambda(z).
double kernel_image_check(const OrthoBasis& b, const WeightSpec& w,
                          const SymbolPoly& g, cdouble lambda,
                          const std::vector<cdouble>& samples);

// | dbar_h u - conj(g'(z)) f(z) | with u = conj(g) f - P(conj(g) f) and
// dbar_h the centered difference at step h.
double dbar_residual(const OrthoBasis& b, const SymbolPoly& g,
                     const std::vector<cdouble>& f_coeffs, cdouble z,
                     double h);

struct SpineqResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};
// lhs = int_{|lambda|<=R} ||H k_lambda||^p rho^-2 dm against
// rhs = sum s_n^p at matched truncation.
SpineqResult spineq_check(const OrthoBasis& b, const WeightSpec& w,
                          const HankelSpectrum& spectrum, const SymbolPoly& g,
                          double p, double R);

struct TraceBound {
    double trace_sum = 0.0;
    double integral_bound = 0.0;
    bool holds = false;
};
// Sum of lambda_n^{p/2} of the truncated Toeplitz matrix with symbol
// G = |g'|^2 rho^2 against int G^{p/2} K_N e^{-2 phi} dm at the same N;
// the matched truncation makes the inequality exact (Jensen over the
// compressed span, whose kernel is K_N).
TraceBound toeplitz_trace_bound(const OrthoBasis& b, const WeightSpec& w,
                                const SymbolPoly& g, double p, long N,
                                const RadialRhoCache* cache = nullptr);

}  // namespace fockspec
