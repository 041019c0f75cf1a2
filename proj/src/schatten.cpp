#include "fockspec/schatten.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <utility>

#include "fockspec/fock.hpp"
#include "fockspec/quadrature.hpp"

namespace fockspec {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "CONVERGES";
        case Verdict::Diverges: return "DIVERGES";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
        case Verdict::NotApplicable: return "NOT_APPLICABLE";
    }
    return "INCONCLUSIVE";
}

LadderFit ladder_verdict(std::span<const double> partials) {
    LadderFit lf;
    if (partials.size() < 3) return lf;
    const std::size_t nu = partials.size() - 1;
    std::vector<double> u(nu);
    for (std::size_t i = 0; i < nu; ++i) u[i] = partials[i + 1] - partials[i];

    const double scale = std::abs(partials.back());
    if (scale == 0.0) {
        lf.verdict = Verdict::Converges;
        return lf;
    }
    if (u.back() <= 1e-13 * scale) {  // sum already stalled
        lf.verdict = Verdict::Converges;
        return lf;
    }

    lf.nondecreasing = true;
    for (std::size_t i = 0; i + 1 < nu; ++i)
        if (u[i + 1] < u[i] * (1.0 - 1e-9)) lf.nondecreasing = false;

    std::vector<double> xs(nu), ys(nu);
    for (std::size_t i = 0; i < nu; ++i) {
        xs[i] = static_cast<double>(i);
        ys[i] = std::log2(std::max(u[i], 1e-300));
    }
    const LineFit fit = fit_line(xs, ys);
    lf.q_hat = std::exp2(fit.slope);
    lf.tau_hat = 1.0 - fit.slope;

    if (lf.nondecreasing)
        lf.verdict = Verdict::Diverges;
    else if (lf.q_hat < 0.9)
        lf.verdict = Verdict::Converges;
    else if (lf.tau_hat > 1.05)
        lf.verdict = Verdict::Converges;
    else if (lf.tau_hat < 0.95)
        lf.verdict = Verdict::Diverges;
    else
        lf.verdict = Verdict::Inconclusive;
    return lf;
}

void PartialLadder::write_csv(std::ostream& os) const {
    os << "R_or_N,partial\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        os << format_g17(x[i]) << "," << format_g17(partial[i]) << "\n";
}

namespace {

void require_doubling(std::span<const double> xs, const char* who) {
    if (xs.size() < 4)
        throw DomainError(std::string(who) + ": need at least 4 ladder rungs");
    if (!(xs[0] > 0))
        throw DomainError(std::string(who) + ": rungs must be positive");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (std::abs(xs[i + 1] / xs[i] - 2.0) > 1e-9)
            throw DomainError(std::string(who) +
                              ": ladder must double at each rung");
}

bool derivative_vanishes(const SymbolPoly& g) {
    for (const cdouble& c : g.derivative().coeffs())
        if (c != 0.0) return false;
    return true;
}

// Angular p-th power mean of |g'| at radius r; exact for monomial g'.
double angular_pow_mean(const SymbolPoly& gp, double r, double p) {
    int nz = 0;
    long k = 0;
    for (long d = 0; d <= gp.degree(); ++d)
        if (gp.coeff(d) != 0.0) {
            ++nz;
            k = d;
        }
    if (nz == 0) return 0.0;
    if (nz == 1) return std::pow(std::abs(gp.coeff(k)) * std::pow(r, k), p);
    return periodic_mean(
        [&](double th) {
            return std::pow(std::abs(gp.eval(std::polar(r, th))), p);
        },
        1e-10, 64);
}

}  // namespace

CriterionResult criterion_integral(const WeightSpec& w, const SymbolPoly& g,
                                   double p, std::span<const double> radii,
                                   const RadialRhoCache* cache) {
    if (!(p > 0)) throw DomainError("criterion_integral: p must be positive");
    require_doubling(radii, "criterion_integral");

    CriterionResult res;
    const SymbolPoly gp = g.derivative();
    const bool zero = derivative_vanishes(g);
    if (w.kind() == WeightKind::RadialPower && !zero) {
        const double d = static_cast<double>(g.degree());
        res.exponent =
            p * (d - 1.0) + (p - 2.0) * (2.0 - w.m()) / 2.0 + 1.0;
        res.exact_verdict =
            res.exponent < -1.0 ? Verdict::Converges : Verdict::Diverges;
    }
    if (zero) {
        for (double R : radii) {
            res.ladder.x.push_back(R);
            res.ladder.partial.push_back(0.0);
        }
        res.ladder.fit.verdict = Verdict::Converges;
        res.verdict = Verdict::Converges;
        if (w.kind() == WeightKind::RadialPower)
            res.exact_verdict = Verdict::Converges;
        return res;
    }

    std::unique_ptr<RadialRhoCache> own;
    if (!cache) {
        own = std::make_unique<RadialRhoCache>(w, radii.back() * 1.05 + 1.0,
                                               1024, 1e-7);
        cache = own.get();
    }
    auto f = [&](double r) {
        return 2.0 * M_PI * r * angular_pow_mean(gp, r, p) *
               std::pow((*cache)(r), p - 2.0);
    };
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    double acc = 0.0, prev = 0.0;
    for (double R : radii) {
        acc += integrate_or_throw(f, prev, R, opt);
        res.ladder.x.push_back(R);
        res.ladder.partial.push_back(acc);
        prev = R;
    }
    res.ladder.fit = ladder_verdict(res.ladder.partial);
    res.verdict = res.ladder.fit.verdict;
    return res;
}

CriticalExponent critical_exponent(double m, long d) {
    if (!(m > 0)) throw DomainError("critical_exponent: m must be positive");
    if (d < 0) throw DomainError("critical_exponent: degree must be >= 0");
    CriticalExponent ce;
    if (d == 0) {
        ce.p_star = 2.0;
        ce.kind = CriticalExponent::Kind::NotApplicable;
    } else if (2 * d >= m) {
        ce.p_star = std::numeric_limits<double>::infinity();
        ce.kind = CriticalExponent::Kind::Never;
    } else {
        ce.p_star = 2.0 * m / (m - 2.0 * d);
        ce.kind = CriticalExponent::Kind::Threshold;
    }
    return ce;
}

DecayFit decay_fit(const HankelSpectrum& sp, long n1, long n2) {
    const long N = static_cast<long>(sp.s.size()) - 1;
    if (n1 < 1 || n2 > N) throw DomainError("decay_fit: window outside spectrum");
    if (n2 < 2 * n1) throw DomainError("decay_fit: window too narrow");
    if (n2 > N - 2 * sp.symbol_degree)
        throw DomainError("decay_fit: window inside the truncation edge band");
    std::vector<double> xs, ys;
    xs.reserve(n2 - n1 + 1);
    for (long n = n1; n <= n2; ++n) {
        if (!(sp.s[n] > 0))
            throw DomainError("decay_fit: nonpositive singular value in window");
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(sp.s[n]));
    }
    const LineFit fit = fit_line(xs, ys);
    DecayFit df;
    df.alpha = -fit.slope;
    df.stderr_ = fit.slope_stderr;
    df.n1 = n1;
    df.n2 = n2;
    return df;
}

SchattenPartial schatten_partial_norm(const HankelSpectrum& sp, double p) {
    if (!(p > 0))
        throw DomainError("schatten_partial_norm: p must be positive");
    SchattenPartial out;
    const long L = static_cast<long>(sp.s.size());
    if (L == 0) {
        out.verdict = Verdict::Converges;
        return out;
    }
    // Octave counts; the floor skips the pre-asymptotic head when the
    // spectrum is long enough to afford it.
    const long floor_n = (L >= 800) ? 100 : 25;
    std::vector<long> counts;
    for (long c = L; c >= floor_n; c /= 2) counts.push_back(c);
    if (counts.size() < 2) counts.push_back(L);
    std::reverse(counts.begin(), counts.end());

    KahanSum acc;
    long done = 0;
    for (long c : counts) {
        for (; done < c; ++done) acc.add(std::pow(sp.s[done], p));
        out.ladder.x.push_back(static_cast<double>(c));
        out.ladder.partial.push_back(acc.value());
    }
    out.ladder.fit = ladder_verdict(out.ladder.partial);
    out.verdict = out.ladder.fit.verdict;
    return out;
}

EnvelopeResult envelope_mixed_norm(const WeightSpec& w, double p, double eps,
                                   std::span<const double> radii) {
    if (!(p > 2)) throw DomainError("envelope_mixed_norm: p must exceed 2");
    if (!(eps > 0) || eps > 1)
        throw DomainError("envelope_mixed_norm: eps must lie in (0,1]");
    require_doubling(radii, "envelope_mixed_norm");

    EnvelopeResult res;
    res.p = p;
    res.eps = eps;
    const double pp = p / (p - 1.0);
    res.d_max = std::min(std::pow(46.0 / pp, 1.0 / eps), 45.0);
    if (w.kind() == WeightKind::RadialPower) {
        res.exponent = (p - 2.0) * (2.0 - w.m()) / 2.0 + 1.0;
        res.exact_verdict =
            res.exponent < -1.0 ? Verdict::Converges : Verdict::Diverges;
    }

    const double r_max = radii.back();
    RadialRhoCache cache(w, r_max * 1.3 + 2.0, 1024, 1e-7);

    // Inner mixed-norm integrands at |z| = r. The near branch of B is the
    // exact polar integral (p' < 2 keeps it finite); the transpose's near
    // set {|z - zeta| <= rho(zeta)} has its boundary radius solved per
    // angle. Far branches ride the decay field's cells.
    auto inner_at = [&](double r, double* tail_frac) {
        const cdouble z(r, 0.0);
        const double rz = cache(r);
        LocalDecayField field(w, cache, z, res.d_max, 3.0);

        KahanSum far_b, far_star;
        const int n_shell = 4;
        double shell[n_shell] = {0, 0, 0, 0};
        const double d0 = 0.7 * res.d_max;
        const double dstep = (res.d_max - d0) / n_shell;
        for (const DecayCell& c : field.cells()) {
            const double sep = std::abs(c.z - z);
            const double damp = std::exp(-pp * std::pow(c.d, eps));
            if (sep > rz) {
                far_b.add(damp * c.area);
                if (c.d > d0) {
                    int j = static_cast<int>((c.d - d0) / dstep);
                    shell[std::min(j, n_shell - 1)] += damp * c.area;
                }
            }
            const double rzc = cache(std::abs(c.z));
            if (sep > rzc) far_star.add(damp * c.area * std::pow(rzc, -pp));
        }

        const double near_b =
            2.0 * M_PI * std::pow(rz, 2.0 - pp) / (2.0 - pp);
        const int na = 64;
        double near_star = 0.0;
        for (int a = 0; a < na; ++a) {
            const double th = 2.0 * M_PI * a / na;
            const cdouble dir = std::polar(1.0, th);
            auto fs = [&](double s) { return s - cache(std::abs(z + s * dir)); };
            double hi = 2.0 * rz;
            int guard = 0;
            while (fs(hi) < 0) {
                hi *= 1.6;
                if (++guard > 90)
                    throw BracketError(
                        "envelope_mixed_norm: transpose boundary unbounded");
            }
            double lo = 0.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (fs(mid) < 0 ? lo : hi) = mid;
            }
            near_star += std::pow(0.5 * (lo + hi), 2.0 - pp);
        }
        near_star *= (2.0 * M_PI / na) / (2.0 - pp);

        const double fb = near_b + std::pow(rz, -pp) * far_b.value();
        const double fstar = near_star + far_star.value();
        if (tail_frac) {
            double ratio = 0.0;
            int nr = 0;
            for (int j = 0; j + 1 < n_shell; ++j)
                if (shell[j] > 0 && shell[j + 1] > 0) {
                    ratio += shell[j + 1] / shell[j];
                    ++nr;
                }
            if (nr > 0 && shell[n_shell - 1] > 0) {
                ratio = std::min(ratio / nr, 0.97);
                const double tail =
                    shell[n_shell - 1] * ratio / (1.0 - ratio);
                *tail_frac = tail * std::pow(rz, -pp) / fb;
            } else {
                *tail_frac = 0.0;
            }
        }
        return std::pair<double, double>(fb, fstar);
    };

    // 6-node Gauss-Legendre per annulus; fixed rule because every node
    // costs a decay-field build.
    static const double gx[3] = {0.2386191860831969, 0.6612093864662645,
                                 0.9324695142031521};
    static const double gw[3] = {0.4679139345726910, 0.3607615730481386,
                                 0.1713244923791704};
    KahanSum acc_b, acc_s;
    double prev = 0.0;
    const double pw = p / pp;  // = p - 1
    for (double R : radii) {
        const double mid = 0.5 * (prev + R), half = 0.5 * (R - prev);
        for (int i = 0; i < 3; ++i) {
            for (double sgn : {-1.0, 1.0}) {
                const double r = mid + sgn * half * gx[i];
                const double wq = half * gw[i];
                double tf = 0.0;
                const auto [fb, fstar] =
                    inner_at(r, (R == r_max) ? &res.tail_frac : &tf);
                acc_b.add(wq * 2.0 * M_PI * r * std::pow(fb, pw));
                acc_s.add(wq * 2.0 * M_PI * r * std::pow(fstar, pw));
            }
        }
        res.b_ladder.x.push_back(R);
        res.b_ladder.partial.push_back(acc_b.value());
        res.bstar_ladder.x.push_back(R);
        res.bstar_ladder.partial.push_back(acc_s.value());
        prev = R;
    }
    res.b_ladder.fit = ladder_verdict(res.b_ladder.partial);
    res.bstar_ladder.fit = ladder_verdict(res.bstar_ladder.partial);
    res.verdict_b = res.b_ladder.fit.verdict;
    res.verdict_bstar = res.bstar_ladder.fit.verdict;
    if (res.verdict_b == Verdict::Diverges ||
        res.verdict_bstar == Verdict::Diverges)
        res.verdict = Verdict::Diverges;
    else if (res.verdict_b == Verdict::Converges &&
             res.verdict_bstar == Verdict::Converges)
        res.verdict = Verdict::Converges;
    else
        res.verdict = Verdict::Inconclusive;
    return res;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (static_cast<unsigned char>(c) < 0x20) continue;
        out.push_back(c);
    }
    return out;
}

const char* kind_name(CriticalExponent::Kind k) {
    switch (k) {
        case CriticalExponent::Kind::Threshold: return "THRESHOLD";
        case CriticalExponent::Kind::NotApplicable: return "NOT_APPLICABLE";
        case CriticalExponent::Kind::Never: return "NEVER";
    }
    return "THRESHOLD";
}

}  // namespace

void SchattenReport::write_json(std::ostream& os) const {
    os << "{\n";
    os << "  \"version\": \"" << kVersion << "\",\n";
    os << "  \"weight\": \"" << json_escape(weight_id) << "\",\n";
    os << "  \"symbol\": \"" << json_escape(symbol) << "\",\n";
    os << "  \"operator\": \"" << json_escape(operator_label) << "\",\n";
    os << "  \"N\": " << N << ",\n";
    os << "  \"m_eff\": " << format_g17(m_eff) << ",\n";
    os << "  \"m_fitted\": " << (m_fitted ? "true" : "false") << ",\n";
    os << "  \"p_star\": {\"kind\": \"" << kind_name(p_star.kind) << "\"";
    if (std::isfinite(p_star.p_star))
        os << ", \"value\": " << format_g17(p_star.p_star);
    os << "},\n";
    os << "  \"hs_verdict\": \"" << to_string(hs_verdict) << "\",\n";
    os << "  \"alpha_fit\": {\"alpha\": " << format_g17(alpha.alpha)
       << ", \"stderr\": " << format_g17(alpha.stderr_) << ", \"n1\": "
       << alpha.n1 << ", \"n2\": " << alpha.n2 << "},\n";
    os << "  \"per_p\": [\n";
    for (std::size_t i = 0; i < per_p.size(); ++i) {
        const PerPVerdict& v = per_p[i];
        os << "    {\"p\": " << format_g17(v.p) << ", \"criterion\": \""
           << to_string(v.criterion) << "\", \"spectral\": \""
           << to_string(v.spectral) << "\", \"arithmetic\": \""
           << to_string(v.arithmetic) << "\", \"verdict\": \""
           << to_string(v.verdict) << "\", \"near_threshold\": "
           << (v.near_threshold ? "true" : "false") << "}"
           << (i + 1 < per_p.size() ? "," : "") << "\n";
    }
    os << "  ]\n";
    os << "}\n";
}

SchattenReport classify(const WeightSpec& w, const SymbolPoly& g,
                        std::span<const double> p_grid,
                        const HankelSpectrum& sp) {
    if (p_grid.empty()) throw DomainError("classify: empty p grid");
    for (std::size_t i = 0; i + 1 < p_grid.size(); ++i)
        if (!(p_grid[i] < p_grid[i + 1]))
            throw DomainError("classify: p grid must be strictly increasing");

    SchattenReport rep;
    rep.weight_id = w.id();
    rep.symbol = g.to_string();
    rep.N = sp.N;
    const long d = g.degree();
    rep.operator_label =
        (d == 1 && g.coeff(1) == cdouble(1.0, 0.0))
            ? "canonical dbar solution operator restricted to the Fock space"
            : "Hankel operator with anti-analytic symbol";

    if (g.is_constant()) {
        rep.m_eff = (w.kind() == WeightKind::RadialPower) ? w.m() : 0.0;
        rep.p_star = critical_exponent(std::max(rep.m_eff, 1.0), 0);
        for (double p : p_grid) {
            PerPVerdict v;
            v.p = p;
            v.criterion = v.spectral = v.arithmetic = v.verdict =
                Verdict::Converges;
            rep.per_p.push_back(v);
        }
        rep.hs_verdict = Verdict::Converges;
        return rep;
    }

    if (w.kind() == WeightKind::RadialPower) {
        rep.m_eff = w.m();
    } else {
        const double r_hi = 0.98 * w.table_rmax();
        const GrowthFit gf = growth_exponents(w, r_hi / 100.0, r_hi, 40);
        rep.m_eff = 2.0 - 2.0 * gf.slope;
        rep.m_fitted = true;
    }
    rep.p_star = critical_exponent(rep.m_eff, d);

    {
        const long n2 = std::min(sp.N - 2 * sp.symbol_degree, sp.N / 2);
        const long n1 = std::max<long>(8, n2 / 10);
        if (n2 >= 2 * n1) rep.alpha = decay_fit(sp, n1, n2);
    }

    std::vector<double> radii;
    for (double R = 1.0; R <= 64.0; R *= 2.0) radii.push_back(R);
    RadialRhoCache cache(w, radii.back() * 1.05 + 1.0, 1024, 1e-7);

    for (double p : p_grid) {
        PerPVerdict v;
        v.p = p;
        const CriterionResult cr = criterion_integral(w, g, p, radii, &cache);
        v.criterion = cr.verdict;
        v.spectral = schatten_partial_norm(sp, p).verdict;
        if (rep.p_star.kind == CriticalExponent::Kind::Never) {
            v.arithmetic = Verdict::Diverges;
        } else {
            const double e = p * (d - 1.0) +
                             (p - 2.0) * (2.0 - rep.m_eff) / 2.0 + 1.0;
            v.arithmetic =
                e < -1.0 ? Verdict::Converges : Verdict::Diverges;
        }
        v.near_threshold =
            rep.p_star.kind == CriticalExponent::Kind::Threshold &&
            std::abs(p - rep.p_star.p_star) <= 0.1 * rep.p_star.p_star;
        if (v.near_threshold) {
            // Inside the band the arithmetic verdict resolves the entry.
            v.verdict = v.arithmetic;
        } else {
            // Consensus of the methods that decided; a decided
            // contradiction stays visible instead of being resolved away.
            bool has_c = false, has_d = false;
            for (Verdict x : {v.criterion, v.spectral, v.arithmetic}) {
                has_c = has_c || x == Verdict::Converges;
                has_d = has_d || x == Verdict::Diverges;
            }
            if (has_c && has_d)
                v.verdict = Verdict::Inconclusive;
            else if (has_c)
                v.verdict = Verdict::Converges;
            else if (has_d)
                v.verdict = Verdict::Diverges;
        }
        rep.per_p.push_back(v);
    }

    rep.hs_verdict = schatten_partial_norm(sp, 2.0).verdict;
    return rep;
}

}  // namespace fockspec
