#include "fockspec/hankel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "fockspec/quadrature.hpp"

#define LAPACK_COMPLEX_CPP
#include <lapacke.h>

namespace fockspec {

SymbolPoly::SymbolPoly(std::vector<cdouble> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
    c_[0] = 0.0;  // constants act as zero
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
}

SymbolPoly SymbolPoly::monomial(long d, cdouble a) {
    if (d < 0) throw DomainError("SymbolPoly: negative degree");
    std::vector<cdouble> c(d + 1, 0.0);
    c[d] = a;
    return SymbolPoly(std::move(c));
}

bool SymbolPoly::is_monomial() const {
    int nz = 0;
    for (const cdouble& a : c_)
        if (a != 0.0) ++nz;
    return nz <= 1;
}

cdouble SymbolPoly::coeff(long d) const {
    if (d < 0 || d >= static_cast<long>(c_.size())) return 0.0;
    return c_[d];
}

cdouble SymbolPoly::eval(cdouble z) const {
    cdouble acc = 0.0;
    for (std::size_t d = c_.size(); d-- > 0;) acc = acc * z + c_[d];
    return acc;
}

SymbolPoly SymbolPoly::derivative() const {
    std::vector<cdouble> d;
    for (std::size_t k = 1; k < c_.size(); ++k)
        d.push_back(static_cast<double>(k) * c_[k]);
    if (d.empty()) d.push_back(0.0);
    // The derivative is a plain polynomial; re-wrapping would zero its
    // constant term, so build through the raw container.
    SymbolPoly out(std::vector<cdouble>{0.0});
    out.c_ = std::move(d);
    return out;
}

std::string SymbolPoly::to_string() const {
    if (is_constant()) return "const";
    std::ostringstream os;
    bool first = true;
    for (std::size_t d = c_.size(); d-- > 1;) {
        if (c_[d] == 0.0) continue;
        if (!first) os << "+";
        first = false;
        if (c_[d] != cdouble(1.0, 0.0)) {
            if (c_[d].imag() == 0.0) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%g", c_[d].real());
                os << buf;
            } else {
                char buf[64];
                std::snprintf(buf, sizeof(buf), "(%g%+gi)", c_[d].real(),
                              c_[d].imag());
                os << buf;
            }
        }
        os << "z";
        if (d > 1) os << "^" << d;
    }
    return os.str();
}

cdouble BandMatrix::at(long i, long j) const {
    if (i < j) return std::conj(at(j, i));
    if (i - j > bw) return 0.0;
    return ab[(i - j) + j * (bw + 1)];
}

BandMatrix hankel_gram(const MomentTable& mt, const SymbolPoly& g, long N) {
    if (N < 0) throw DomainError("hankel_gram: N < 0");
    const long D = g.degree();
    if (mt.n_max() < N + D)
        throw DomainError("hankel_gram: moment table too short, need n_max >= " +
                          std::to_string(N + D));
    BandMatrix G;
    G.n = N + 1;
    G.bw = std::max<long>(0, D - 1);
    G.ab.assign(static_cast<std::size_t>(G.n) * (G.bw + 1), 0.0);

    for (long k = 0; k <= N; ++k) {
        for (long j = k; j <= std::min(N, k + G.bw); ++j) {
            const long delta = j - k;
            const double log_jk = 0.5 * (mt.log_I(j) + mt.log_I(k));
            cdouble t1 = 0.0;
            for (long d = std::max<long>(1, delta + 1); d <= D; ++d) {
                const cdouble ad = g.coeff(d);
                const cdouble adm = g.coeff(d - delta);
                if (ad == 0.0 || adm == 0.0) continue;
                t1 += ad * std::conj(adm) *
                      std::exp(mt.log_I(d + k) - log_jk);
            }
            cdouble t2 = 0.0;
            for (long l = std::max<long>(0, j - D); l <= k - 1; ++l) {
                const cdouble akl = g.coeff(k - l);
                const cdouble ajl = g.coeff(j - l);
                if (akl == 0.0 || ajl == 0.0) continue;
                t2 += std::conj(akl) * ajl * std::exp(log_jk - mt.log_I(l));
            }
            G.ab[delta + k * (G.bw + 1)] = t1 - t2;
        }
    }
    return G;
}

HankelSpectrum singular_values(const BandMatrix& gram,
                               const std::string& weight_id,
                               const std::string& symbol,
                               long symbol_degree) {
    HankelSpectrum sp;
    sp.weight_id = weight_id;
    sp.symbol = symbol;
    sp.symbol_degree = symbol_degree;
    sp.N = gram.n - 1;
    sp.method = "eigensolver";

    const lapack_int n = static_cast<lapack_int>(gram.n);
    const lapack_int kd = static_cast<lapack_int>(gram.bw);
    const lapack_int ldab = kd + 1;
    std::vector<cdouble> ab(gram.ab);
    std::vector<double> evals(n);
    std::vector<cdouble> zdummy(1);
    const lapack_int info = LAPACKE_zhbev(
        LAPACK_COL_MAJOR, 'N', 'L', n, kd,
        reinterpret_cast<lapack_complex_double*>(ab.data()), ldab,
        evals.data(), reinterpret_cast<lapack_complex_double*>(zdummy.data()),
        1);
    if (info != 0)
        throw Error("singular_values: zhbev failed with info " +
                    std::to_string(info));

    double trace = 0.0;
    for (long j = 0; j < gram.n; ++j)
        trace += gram.ab[j * (gram.bw + 1)].real();
    const double floor_neg = -1e-10 * std::max(trace, 1e-300);
    sp.s.resize(n);
    for (lapack_int i = 0; i < n; ++i) {
        if (evals[i] < floor_neg)
            throw Error("singular_values: Gram not PSD, eigenvalue " +
                        std::to_string(evals[i]));
        sp.s[i] = std::sqrt(std::max(0.0, evals[i]));
    }
    std::sort(sp.s.begin(), sp.s.end(), std::greater<double>());
    return sp;
}

HankelSpectrum closed_form_spectrum(const MomentTable& mt, long d, long N) {
    if (d < 1) throw DomainError("closed_form_spectrum: degree must be >= 1");
    if (mt.n_max() < N + d)
        throw DomainError("closed_form_spectrum: moment table too short");
    HankelSpectrum sp;
    sp.weight_id = mt.weight_id();
    sp.symbol = SymbolPoly::monomial(d).to_string();
    sp.symbol_degree = d;
    sp.N = N;
    sp.method = "closed_form";
    sp.s.resize(N + 1);
    for (long n = 0; n <= N; ++n) {
        double s2 = mt.ratio(n + d, n);
        if (n >= d) s2 -= mt.ratio(n, n - d);
        if (s2 < 0) {
            if (s2 < -1e-12 * mt.ratio(n + d, n))
                throw Error("closed_form_spectrum: negative square at n = " +
                            std::to_string(n));
            s2 = 0.0;
        }
        sp.s[n] = std::sqrt(s2);
    }
    std::sort(sp.s.begin(), sp.s.end(), std::greater<double>());
    return sp;
}

void HankelSpectrum::write_csv(std::ostream& os) const {
    os << "n,s_n\n";
    for (std::size_t n = 0; n < s.size(); ++n)
        os << n << "," << format_g17(s[n]) << "\n";
}

GrowthIndicator symbol_growth_indicator(const WeightSpec& w,
                                        const SymbolPoly& g, double r_lo,
                                        double r_hi, int n_samples) {
    GrowthIndicator gi;
    const SymbolPoly gp = g.derivative();
    bool zero = true;
    for (const cdouble& c : gp.coeffs())
        if (c != 0.0) zero = false;
    if (zero) {
        gi.sup_value = 0.0;
        gi.exponent = -std::numeric_limits<double>::infinity();
        gi.bounded = true;
        gi.compact = true;
        return gi;
    }
    const GrowthFit rho_fit = growth_exponents(w, r_lo, r_hi, n_samples);
    gi.exponent = static_cast<double>(g.degree() - 1) + rho_fit.slope;
    for (int i = 0; i < n_samples; ++i) {
        const double t =
            r_lo * std::pow(r_hi / r_lo,
                            static_cast<double>(i) / (n_samples - 1));
        const double rt = rho(w, cdouble(t, 0.0), 1e-8);
        double gmax = 0.0;
        for (int a = 0; a < 16; ++a) {
            const cdouble z = std::polar(t, 2.0 * M_PI * a / 16.0);
            gmax = std::max(gmax, std::abs(gp.eval(z)));
        }
        gi.sup_value = std::max(gi.sup_value, gmax * rt);
    }
    gi.bounded = gi.exponent <= 0.05;
    gi.compact = gi.exponent < -0.05;
    return gi;
}

namespace {

// Coefficients of P(conj(g) f) for f = sum c_j e_j: the bracket
// <conj(g) e_j, e_l> collapses to conj(a_{j-l}) sqrt(I_j / I_l).
std::vector<cdouble> projection_coeffs(const MomentTable& mt,
                                       const SymbolPoly& g,
                                       const std::vector<cdouble>& c) {
    const long n = static_cast<long>(c.size());
    const long D = g.degree();
    std::vector<cdouble> beta(n, 0.0);
    for (long l = 0; l < n; ++l) {
        cdouble acc = 0.0;
        for (long j = l + 1; j <= std::min<long>(n - 1, l + D); ++j) {
            const cdouble a = g.coeff(j - l);
            if (a == 0.0) continue;
            acc += std::conj(a) * c[j] *
                   std::exp(0.5 * (mt.log_I(j) - mt.log_I(l)));
        }
        beta[l] = acc;
    }
    return beta;
}

// sum_l beta_l e_l(z) e^{-phi(z)}, magnitudes kept in the exp argument.
cdouble eval_series_weighted(const MomentTable& mt,
                             const std::vector<cdouble>& beta, cdouble z,
                             double phi_z) {
    const double t = std::abs(z);
    std::vector<cdouble> terms(beta.size());
    const double lt = (t > 0) ? std::log(t) : 0.0;
    const double th = std::arg(z);
    for (std::size_t l = 0; l < beta.size(); ++l) {
        if (t == 0.0) {
            terms[l] = (l == 0)
                           ? beta[0] * std::exp(-0.5 * mt.log_I(0) - phi_z)
                           : cdouble(0.0);
            continue;
        }
        const double mag = l * lt - 0.5 * mt.log_I(l) - phi_z;
        terms[l] = beta[l] * std::polar(std::exp(mag), l * th);
    }
    return pairwise_sum(terms);
}

}  // namespace

double kernel_image_check(const OrthoBasis& b, const WeightSpec& w,
                          const SymbolPoly& g, cdouble lambda,
                          const std::vector<cdouble>& samples) {
    if (samples.empty())
        throw DomainError("kernel_image_check: empty sample");
    const MomentTable& mt = b.moments();
    const KernelValue kll = kernel(b, lambda, lambda);
    if (!kll.reliable)
        throw TruncationError("kernel_image_check: K(lambda,lambda) truncated",
                              kll.trunc_ratio);

    // Coefficients of k_lambda in the monomial basis.
    const long n = b.n_max() + 1;
    std::vector<cdouble> c(n);
    const double tl = std::abs(lambda);
    const double thl = (tl > 0) ? std::arg(lambda) : 0.0;
    for (long j = 0; j < n; ++j) {
        if (tl == 0.0 && j > 0) {
            c[j] = 0.0;
            continue;
        }
        const double mag = (tl > 0 ? j * std::log(tl) : 0.0) -
                           0.5 * mt.log_I(j) - 0.5 * kll.log_abs;
        c[j] = std::polar(std::exp(mag), -j * thl);
    }
    const std::vector<cdouble> beta = projection_coeffs(mt, g, c);

    double worst = 0.0;
    const cdouble g_l = g.eval(lambda);
    for (const cdouble& z : samples) {
        const KernelValue kzl = normalized_kernel(b, lambda, z);
        if (!kzl.reliable)
            throw TruncationError("kernel_image_check: sample outside "
                                  "reliable region",
                                  kzl.trunc_ratio);
        const double phi_z = eval_phi(w, z);
        const cdouble k_w =
            std::polar(std::exp(kzl.log_abs - phi_z), kzl.arg);
        const cdouble matrix_side =
            std::conj(g.eval(z)) * k_w -
            eval_series_weighted(mt, beta, z, phi_z);
        const cdouble pointwise =
            (std::conj(g.eval(z)) - std::conj(g_l)) * k_w;
        worst = std::max(worst, std::abs(matrix_side - pointwise));
    }
    return worst;
}

double dbar_residual(const OrthoBasis& b, const SymbolPoly& g,
                     const std::vector<cdouble>& f_coeffs, cdouble z,
                     double h) {
    if (!(h > 0)) throw DomainError("dbar_residual: h must be positive");
    const MomentTable& mt = b.moments();
    if (static_cast<long>(f_coeffs.size()) > b.n_max() + 1)
        throw DomainError("dbar_residual: coefficient vector too long");
    const std::vector<cdouble> beta = projection_coeffs(mt, g, f_coeffs);

    auto f_eval = [&](cdouble zz) {
        return eval_series_weighted(mt, f_coeffs, zz, 0.0);
    };
    auto u = [&](cdouble zz) {
        return std::conj(g.eval(zz)) * f_eval(zz) -
               eval_series_weighted(mt, beta, zz, 0.0);
    };
    const cdouble dx = u(z + h) - u(z - h);
    const cdouble dy = u(z + cdouble(0, h)) - u(z - cdouble(0, h));
    const cdouble dbar = (dx + cdouble(0, 1) * dy) / (4.0 * h);
    const cdouble target = std::conj(g.derivative().eval(z)) * f_eval(z);
    return std::abs(dbar - target);
}

SpineqResult spineq_check(const OrthoBasis& b, const WeightSpec& w,
                          const HankelSpectrum& spectrum, const SymbolPoly& g,
                          double p, double R) {
    if (!(p >= 2)) throw DomainError("spineq_check: p must be >= 2");
    if (!(R > 0)) throw DomainError("spineq_check: R must be positive");
    SpineqResult res;
    {
        std::vector<double> terms(spectrum.s.size());
        for (std::size_t i = 0; i < terms.size(); ++i)
            terms[i] = std::pow(spectrum.s[i], p);
        res.rhs = pairwise_sum(terms);
    }
    if (g.is_constant()) {
        res.ratio = 1.0;
        return res;
    }

    const MomentTable& mt = b.moments();
    const long D = g.degree();
    const long N = b.n_max() - 2 * D;
    if (N < 8) throw DomainError("spineq_check: basis too short");
    const BandMatrix G = hankel_gram(mt, g, N);
    RadialRhoCache cache(w, R * 1.05 + 1.0, 512, 1e-7);

    // ||H k_lambda||^2 = c* G c with c the k_lambda coefficients.
    auto norm2_at = [&](double t, double theta) {
        const cdouble lambda = std::polar(t, theta);
        const KernelValue kll = kernel(b, lambda, lambda);
        if (!kll.reliable)
            throw TruncationError("spineq_check: lambda outside reliable "
                                  "region",
                                  kll.trunc_ratio);
        std::vector<cdouble> c(N + 1);
        const double lt = (t > 0) ? std::log(t) : 0.0;
        for (long j = 0; j <= N; ++j) {
            if (t == 0.0 && j > 0) {
                c[j] = 0.0;
                continue;
            }
            const double mag =
                j * lt - 0.5 * mt.log_I(j) - 0.5 * kll.log_abs;
            c[j] = std::polar(std::exp(mag), -j * theta);
        }
        double acc = 0.0;
        for (long j = 0; j <= N; ++j) {
            cdouble row = G.at(j, j) * c[j];
            for (long k = std::max<long>(0, j - G.bw);
                 k <= std::min(N, j + G.bw); ++k)
                if (k != j) row += G.at(j, k) * c[k];
            acc += (std::conj(c[j]) * row).real();
        }
        return std::max(0.0, acc);
    };

    const bool radial = g.is_monomial();
    auto integrand = [&](double t) {
        double v;
        if (radial) {
            v = std::pow(norm2_at(t, 0.0), p / 2.0);
        } else {
            double acc = 0.0;
            const int na = 8;
            for (int a = 0; a < na; ++a)
                acc += std::pow(norm2_at(t, 2.0 * M_PI * a / na), p / 2.0);
            v = acc / na;
        }
        const double rt = cache(t);
        return 2.0 * M_PI * t * v / (rt * rt);
    };
    QuadOptions opt;
    opt.rel_tol = 1e-6;
    res.lhs = integrate_or_throw(integrand, 0.0, R, opt);
    res.ratio = (res.rhs > 0) ? res.lhs / res.rhs
                              : (res.lhs == 0 ? 1.0 : 1e308);
    return res;
}

TraceBound toeplitz_trace_bound(const OrthoBasis& b, const WeightSpec& w,
                                const SymbolPoly& g, double p, long N,
                                const RadialRhoCache* cache) {
    if (!(p > 2)) throw DomainError("toeplitz_trace_bound: p must be > 2");
    TraceBound tb;
    if (g.is_constant()) {
        tb.holds = true;
        return tb;
    }
    const MomentTable& mt = b.moments();
    const SymbolPoly gp = g.derivative();
    const long Dp = gp.degree();
    if (mt.n_max() < N + 2 * Dp + 2)
        throw DomainError("toeplitz_trace_bound: moment table too short");

    std::unique_ptr<RadialRhoCache> own;
    if (!cache) {
        // Peak radius of the largest needed rho-weighted moment.
        double hi = 1.0;
        const double target = (2.0 * (N + Dp) + 1.0) * M_PI;
        int guard = 0;
        while (w.mass(hi) < target) {
            hi *= 2;
            if (++guard > 400)
                throw BracketError("toeplitz_trace_bound: mass growth stalled");
        }
        own = std::make_unique<RadialRhoCache>(w, hi * 2.0, 768, 1e-7);
        cache = own.get();
    }

    // log J_s with J_s = int |z|^{2s} rho^2 e^{-2 phi} dm; same peak
    // factoring as the plain moments.
    auto log_rho_moment = [&](long s) {
        auto lg = [&](double r) {
            const double rr = (*cache)(r);
            return std::log(2.0 * M_PI) + (2.0 * s + 1.0) * std::log(r) +
                   2.0 * std::log(rr) - 2.0 * w.phi_radial(r);
        };
        double lo = 1e-30, hi = 1.0;
        const double target = (2.0 * s + 1.0) * M_PI;
        int guard = 0;
        while (w.mass(hi) < target) {
            hi *= 2.0;
            if (++guard > 2000)
                throw BracketError("toeplitz_trace_bound: no moment peak");
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (w.mass(mid) < target ? lo : hi) = mid;
        }
        const double r_peak = 0.5 * (lo + hi);
        const double g_peak = lg(r_peak);
        double r_lo = r_peak, r_hi = r_peak;
        while (r_lo > 1e-280 && lg(r_lo) > g_peak - 90.0) r_lo *= 0.5;
        guard = 0;
        while (lg(r_hi) > g_peak - 90.0) {
            r_hi *= 2.0;
            if (++guard > 2000)
                throw QuadratureError("toeplitz_trace_bound: tail stall", 0.0);
        }
        QuadOptions opt;
        opt.rel_tol = 1e-11;
        const double integral = integrate_or_throw(
            [&](double r) { return std::exp(lg(r) - g_peak); }, r_lo, r_hi,
            opt);
        return g_peak + std::log(integral);
    };

    std::vector<double> logJ(N + Dp + 1);
    for (long s = 0; s <= N + Dp; ++s) logJ[s] = log_rho_moment(s);

    // Banded Toeplitz matrix <G e_k, e_j> with G = |g'|^2 rho^2.
    BandMatrix T;
    T.n = N + 1;
    T.bw = Dp;
    T.ab.assign(static_cast<std::size_t>(T.n) * (T.bw + 1), 0.0);
    for (long k = 0; k <= N; ++k)
        for (long j = k; j <= std::min(N, k + T.bw); ++j) {
            const long delta = j - k;
            cdouble acc = 0.0;
            for (long bq = 0; bq + delta <= Dp; ++bq) {
                const cdouble ca = gp.coeff(bq + delta);
                const cdouble cb = gp.coeff(bq);
                if (ca == 0.0 || cb == 0.0) continue;
                acc += ca * std::conj(cb) *
                       std::exp(logJ[k + bq + delta] -
                                0.5 * (mt.log_I(j) + mt.log_I(k)));
            }
            T.ab[delta + k * (T.bw + 1)] = acc;
        }

    const HankelSpectrum eig = singular_values(T, mt.weight_id(), "toeplitz");
    {
        std::vector<double> terms(eig.s.size());
        for (std::size_t i = 0; i < terms.size(); ++i)
            terms[i] = std::pow(eig.s[i] * eig.s[i], p / 2.0);
        tb.trace_sum = pairwise_sum(terms);
    }

    // Truncated diagonal kernel, concave term logs again.
    auto log_KN = [&](double r) {
        const double lr2 = 2.0 * std::log(r);
        double peak = -1e308;
        std::vector<double> tl;
        tl.reserve(N + 1);
        for (long nq = 0; nq <= N; ++nq) {
            const double v = nq * lr2 - mt.log_I(nq);
            peak = std::max(peak, v);
            tl.push_back(v);
            if (v < peak - 46.0) break;
        }
        double acc = 0.0;
        for (double v : tl) acc += std::exp(v - peak);
        return peak + std::log(acc);
    };
    auto mean_gp_pow = [&](double r) {
        if (gp.degree() == 0) return std::pow(std::abs(gp.coeff(0)), p);
        return periodic_mean(
            [&](double th) {
                return std::pow(std::abs(gp.eval(std::polar(r, th))), p);
            },
            1e-10, 32);
    };
    auto integrand = [&](double r) {
        if (r <= 0) return 0.0;
        const double rr = (*cache)(r);
        const double core = std::exp(log_KN(r) - 2.0 * w.phi_radial(r));
        return 2.0 * M_PI * r * mean_gp_pow(r) * std::pow(rr, p) * core;
    };
    // The integrand decays once r passes the K_N reliable radius.
    double r_cut = 1.0;
    {
        const double probe = reliable_radius(b, 0) * 1.1 + 1.0;
        r_cut = probe;
        double prev = integrand(r_cut);
        int guard = 0;
        while (true) {
            const double nxt = integrand(r_cut * 1.5);
            if (nxt < 1e-16 * std::max(1.0, prev) || nxt < 1e-300) break;
            prev = std::max(prev, nxt);
            r_cut *= 1.5;
            if (++guard > 200)
                throw QuadratureError("toeplitz_trace_bound: integrand tail "
                                      "does not decay",
                                      nxt);
        }
        r_cut *= 1.5;
    }
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    tb.integral_bound = integrate_or_throw(integrand, 0.0, r_cut, opt);
    tb.holds = tb.trace_sum <= tb.integral_bound * (1.0 + 1e-3);
    return tb;
}

}  // namespace fockspec
