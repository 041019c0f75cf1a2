#include "fockspec/fock.hpp"

#include <algorithm>
#include <cmath>

namespace fockspec {

cdouble OrthoBasis::eval(long n, cdouble z) const {
    if (n == 0) return std::exp(-log_norm(0));
    const double t = std::abs(z);
    if (t == 0.0) return 0.0;
    const double mag = n * std::log(t) - log_norm(n);
    return std::polar(std::exp(mag), n * std::arg(z));
}

cdouble KernelValue::value() const {
    return std::polar(std::exp(log_abs), arg);
}

KernelValue kernel(const OrthoBasis& b, cdouble z, cdouble zeta,
                   double trunc_threshold) {
    KernelValue kv;
    const double tz = std::abs(z), tzeta = std::abs(zeta);
    const MomentTable& mt = b.moments();
    if (tz == 0.0 || tzeta == 0.0) {
        kv.log_abs = -mt.log_I(0);
        kv.arg = 0.0;
        kv.trunc_ratio = 0.0;
        kv.terms = 1;
        kv.reliable = true;
        return kv;
    }
    const double lprod = std::log(tz) + std::log(tzeta);
    const double dtheta = std::arg(z) - std::arg(zeta);
    const long n_max = b.n_max();

    // Term logs are concave in n (moment log-convexity), so scan to the
    // peak, then carry on until the terms are negligible next to it.
    std::vector<double> tl(n_max + 1);
    double peak = -1e308;
    long stop = n_max;
    for (long n = 0; n <= n_max; ++n) {
        tl[n] = n * lprod - mt.log_I(n);
        peak = std::max(peak, tl[n]);
        if (tl[n] < peak - 46.0) {  // e^-46 ~ 1e-20, below double noise
            stop = n;
            break;
        }
    }
    std::vector<cdouble> terms(stop + 1);
    for (long n = 0; n <= stop; ++n)
        terms[n] = std::polar(std::exp(tl[n] - peak), n * dtheta);
    const cdouble s = pairwise_sum(terms);
    const double sa = std::abs(s);

    kv.terms = static_cast<int>(stop + 1);
    if (sa == 0.0) {
        kv.log_abs = -1e308;
        kv.arg = 0.0;
    } else {
        kv.log_abs = peak + std::log(sa);
        kv.arg = std::arg(s);
    }
    kv.trunc_ratio = (sa == 0.0) ? 1.0 : std::exp(tl[stop] - peak) / sa;
    kv.reliable = kv.trunc_ratio <= trunc_threshold;
    return kv;
}

KernelValue normalized_kernel(const OrthoBasis& b, cdouble lambda, cdouble z,
                              double trunc_threshold) {
    const KernelValue kzl = kernel(b, z, lambda, trunc_threshold);
    const KernelValue kll = kernel(b, lambda, lambda, trunc_threshold);
    KernelValue kv;
    kv.log_abs = kzl.log_abs - 0.5 * kll.log_abs;
    kv.arg = kzl.arg;
    kv.trunc_ratio = std::max(kzl.trunc_ratio, kll.trunc_ratio);
    kv.terms = std::max(kzl.terms, kll.terms);
    kv.reliable = kzl.reliable && kll.reliable;
    return kv;
}

double reliable_radius(const OrthoBasis& b, long guard) {
    const long n_edge = std::max<long>(1, b.n_max() - guard);
    const MomentTable& mt = b.moments();
    return std::exp(0.5 * (mt.log_I(n_edge) - mt.log_I(n_edge - 1)));
}

DiagStats diagonal_estimate_check(const OrthoBasis& b, const WeightSpec& w,
                                  const std::vector<cdouble>& samples,
                                  double trunc_threshold) {
    if (samples.empty())
        throw DomainError("diagonal_estimate_check: empty sample");
    DiagStats st;
    st.min_ratio = 1e308;
    st.max_ratio = -1e308;
    for (const cdouble& z : samples) {
        const KernelValue kv = kernel(b, z, z, trunc_threshold);
        if (!kv.reliable) {
            ++st.n_rejected;
            st.worst_trunc = std::max(st.worst_trunc, kv.trunc_ratio);
            continue;
        }
        const double r = rho(w, z, 1e-8);
        const double log_ratio =
            kv.log_abs + 2.0 * std::log(r) - 2.0 * eval_phi(w, z);
        const double ratio = std::exp(log_ratio);
        st.min_ratio = std::min(st.min_ratio, ratio);
        st.max_ratio = std::max(st.max_ratio, ratio);
        ++st.n_accepted;
    }
    return st;
}

OffdiagFit offdiagonal_decay_fit(const OrthoBasis& b, const WeightSpec& w,
                                 const std::vector<const DistanceField*>& fields,
                                 int targets_per_field,
                                 double trunc_threshold) {
    if (fields.empty())
        throw DomainError("offdiagonal_decay_fit: no distance fields");
    struct Pair {
        double excess;  // log(|K| rho rho e^{-phi-phi})
        double d;
        cdouble z, zeta;
    };
    std::vector<Pair> pairs;
    for (const DistanceField* f : fields) {
        const cdouble z = f->source();
        const double rho_z = rho(w, z, 1e-8);
        const double phi_z = eval_phi(w, z);
        const std::size_t total =
            static_cast<std::size_t>(f->nx()) * f->ny();
        const std::size_t stride =
            std::max<std::size_t>(1, total / targets_per_field);
        for (std::size_t k = 0; k < total; k += stride) {
            const int i = static_cast<int>(k % f->nx());
            const int j = static_cast<int>(k / f->nx());
            const cdouble zeta = f->node(i, j);
            const double d = f->dist_at(i, j);
            if (!(d > 1e-9) || !std::isfinite(d)) continue;
            const KernelValue kv = kernel(b, z, zeta, trunc_threshold);
            if (!kv.reliable) continue;
            const double excess = kv.log_abs + std::log(rho_z) +
                                  std::log(f->rho_at(i, j)) - phi_z -
                                  eval_phi(w, zeta);
            pairs.push_back({excess, d, z, zeta});
        }
    }
    OffdiagFit fit;
    fit.n_pairs = static_cast<int>(pairs.size());
    if (pairs.size() < 16)
        throw DomainError("offdiagonal_decay_fit: too few usable pairs");

    std::vector<double> dsort(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) dsort[i] = pairs[i].d;
    std::sort(dsort.begin(), dsort.end());
    const double d_median = dsort[dsort.size() / 2];

    for (double eps = 1.0; eps >= 0.049; eps -= 0.05) {
        double need = -1e308;
        std::size_t arg = 0;
        std::vector<double> fx, fy;
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const double de = std::pow(pairs[i].d, eps);
            const double req = pairs[i].excess + de;
            if (req > need) {
                need = req;
                arg = i;
            }
            if (pairs[i].d >= d_median) {
                fx.push_back(de);
                fy.push_back(req);
            }
        }
        // The required constant must flatten out with distance, otherwise
        // this eps overstates the decay.
        bool pass = false;
        if (fx.size() >= 8) pass = fit_line(fx, fy).slope <= 0.02;
        if (pass) {
            fit.eps_fit = eps;
            fit.c_fit = std::exp(need);
            fit.ok = true;
            fit.witness_z = pairs[arg].z;
            fit.witness_zeta = pairs[arg].zeta;
            return fit;
        }
        if (eps <= 0.051) {
            fit.witness_z = pairs[arg].z;
            fit.witness_zeta = pairs[arg].zeta;
        }
    }
    fit.ok = false;
    return fit;
}

NearDiagStats near_diagonal_check(const OrthoBasis& b, const WeightSpec& w,
                                  double alpha,
                                  const std::vector<cdouble>& samples,
                                  double trunc_threshold) {
    if (!(alpha > 0)) throw DomainError("near_diagonal_check: alpha <= 0");
    if (samples.empty())
        throw DomainError("near_diagonal_check: empty sample");
    NearDiagStats st;
    st.min_ratio = 1e308;
    st.max_ratio = -1e308;
    for (const cdouble& z : samples) {
        const KernelValue kzz = kernel(b, z, z, trunc_threshold);
        if (!kzz.reliable) {
            ++st.n_rejected;
            continue;
        }
        const double r = rho(w, z, 1e-8);
        for (int a = 0; a < 8; ++a) {
            for (double frac : {0.3, 0.6, 0.95}) {
                const cdouble zeta =
                    z + std::polar(alpha * r * frac, 2.0 * M_PI * a / 8.0);
                const KernelValue kzx = kernel(b, z, zeta, trunc_threshold);
                const KernelValue kxx = kernel(b, zeta, zeta, trunc_threshold);
                if (!kzx.reliable || !kxx.reliable) {
                    ++st.n_rejected;
                    continue;
                }
                const double ratio = std::exp(
                    kzx.log_abs - 0.5 * kzz.log_abs - 0.5 * kxx.log_abs);
                st.min_ratio = std::min(st.min_ratio, ratio);
                st.max_ratio = std::max(st.max_ratio, ratio);
                ++st.n_used;
            }
        }
    }
    return st;
}

}  // namespace fockspec
