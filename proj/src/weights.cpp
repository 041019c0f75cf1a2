#include "fockspec/weights.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "fockspec/quadrature.hpp"

namespace fockspec {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

WeightSpec WeightSpec::radial_power(double m) {
    if (!(m > 0))
        throw DomainError("radial_power requires m > 0");
    WeightSpec w;
    w.kind_ = WeightKind::RadialPower;
    w.m_ = m;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "radial_power(m=%g)", m);
    w.id_ = buf;
    w.rmax_ = std::numeric_limits<double>::infinity();
    return w;
}

WeightSpec WeightSpec::tabulated(DensityTable table) {
    const std::size_t n = table.r.size();
    if (n < 2 || table.dens.size() != n)
        throw DomainError("density table needs >= 2 matching rows");
    if (table.r[0] != 0.0)
        throw DomainError("density table must start at r = 0");
    for (std::size_t i = 0; i < n; ++i) {
        if (table.dens[i] < 0)
            throw DomainError("density table has a negative density");
        if (i > 0 && !(table.r[i] > table.r[i - 1]))
            throw DomainError("density table radii must be strictly increasing");
    }

    WeightSpec w;
    w.kind_ = WeightKind::TabulatedRadial;
    w.m_ = 0.0;
    w.rmax_ = table.r.back();

    // Segment models. Power fits anchor at the right node so the first
    // segment (left node at 0) can borrow the next segment's exponent.
    auto power_alpha = [](double ra, double da, double rb,
                          double db) -> double {
        if (!(ra > 0) || !(da > 0) || !(db > 0)) return std::nan("");
        const double a = std::log(db / da) / std::log(rb / ra);
        return (a > -1.9) ? a : std::nan("");
    };

    double mass_acc = 0.0, phi_acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Segment s{};
        s.r0 = table.r[i];
        s.r1 = table.r[i + 1];
        const double d0 = table.dens[i], d1 = table.dens[i + 1];
        double alpha = power_alpha(s.r0, d0, s.r1, d1);
        if (i == 0 && d0 == 0.0 && d1 > 0.0 && n >= 3) {
            alpha = power_alpha(table.r[1], table.dens[1], table.r[2],
                                table.dens[2]);
            if (std::isnan(alpha) || alpha <= 0) alpha = 1.0;
        } else if (d0 == d1) {
            alpha = 0.0;
        }
        if (!std::isnan(alpha)) {
            s.power = true;
            s.r_anchor = s.r1;
            s.d_anchor = d1;
            s.alpha = alpha;
        } else {
            s.power = false;
            const double slope = (d1 - d0) / (s.r1 - s.r0);
            s.lin_a = d0 - slope * s.r0;
            s.lin_b = slope;
        }
        s.mass0 = mass_acc;
        s.phi0 = phi_acc;
        mass_acc += w.seg_mass_inc(s, s.r1);
        phi_acc += w.seg_phi_inc(s, s.r1);
        w.segs_.push_back(s);
    }
    // Continuation segment: the last model, open ended.
    Segment cont = w.segs_.back();
    cont.r0 = w.rmax_;
    cont.r1 = std::numeric_limits<double>::infinity();
    cont.mass0 = mass_acc;
    cont.phi0 = phi_acc;
    w.segs_.push_back(cont);

    if (!(mass_acc > 1.0))
        throw DomainError("density table mass M(r_max) must exceed 1");

    char buf[64];
    std::snprintf(buf, sizeof(buf), "tabulated(rows=%zu,rmax=%g)", n, w.rmax_);
    w.id_ = buf;
    return w;
}

const WeightSpec::Segment& WeightSpec::segment_for(double t) const {
    // Linear scan; tables are small and segments are checked in order.
    for (const Segment& s : segs_)
        if (t <= s.r1) return s;
    return segs_.back();
}

double WeightSpec::density(double t) const {
    if (t < 0) throw DomainError("density: negative radius");
    if (kind_ == WeightKind::RadialPower) {
        if (m_ == 2.0) return 4.0;
        return m_ * m_ * std::pow(t, m_ - 2.0);
    }
    const Segment& s = segment_for(t);
    if (s.power) {
        if (t == 0.0) return (s.alpha > 0) ? 0.0 : s.d_anchor;
        return s.d_anchor * std::pow(t / s.r_anchor, s.alpha);
    }
    return std::max(0.0, s.lin_a + s.lin_b * t);
}

double WeightSpec::seg_mass_inc(const Segment& s, double t) const {
    if (s.power) {
        const double beta = s.alpha + 2.0;
        const double c = kTwoPi * s.d_anchor * std::pow(s.r_anchor, -s.alpha);
        return c * (std::pow(t, beta) - std::pow(s.r0, beta)) / beta;
    }
    const double a = s.lin_a, b = s.lin_b;
    return kTwoPi * (a * (t * t - s.r0 * s.r0) / 2.0 +
                     b * (t * t * t - s.r0 * s.r0 * s.r0) / 3.0);
}

double WeightSpec::seg_phi_inc(const Segment& s, double t) const {
    if (t == s.r0) return 0.0;
    if (s.power) {
        const double beta = s.alpha + 2.0;
        const double c = kTwoPi * s.d_anchor * std::pow(s.r_anchor, -s.alpha);
        const double k = s.mass0 - c * std::pow(s.r0, beta) / beta;
        double inc = c * (std::pow(t, beta) - std::pow(s.r0, beta)) /
                     (kTwoPi * beta * beta);
        if (s.r0 > 0 && k != 0.0) inc += k / kTwoPi * std::log(t / s.r0);
        return inc;
    }
    const double a = s.lin_a, b = s.lin_b;
    const double k = s.mass0 - M_PI * a * s.r0 * s.r0 -
                     (kTwoPi / 3.0) * b * s.r0 * s.r0 * s.r0;
    double inc = a * (t * t - s.r0 * s.r0) / 4.0 +
                 b * (t * t * t - s.r0 * s.r0 * s.r0) / 9.0;
    if (s.r0 > 0 && k != 0.0) inc += k / kTwoPi * std::log(t / s.r0);
    return inc;
}

double WeightSpec::mass(double t) const {
    if (t < 0) throw DomainError("mass: negative radius");
    if (kind_ == WeightKind::RadialPower) return kTwoPi * m_ * std::pow(t, m_);
    if (t == 0) return 0.0;
    const Segment& s = segment_for(t);
    return s.mass0 + seg_mass_inc(s, t);
}

double WeightSpec::phi_radial(double t) const {
    if (t < 0) throw DomainError("phi: negative radius");
    if (kind_ == WeightKind::RadialPower) return std::pow(t, m_);
    if (t == 0) return 0.0;
    const Segment& s = segment_for(t);
    return s.phi0 + seg_phi_inc(s, t);
}

double WeightSpec::table_rmax() const { return rmax_; }

double eval_phi(const WeightSpec& w, cdouble z) {
    const double t = std::abs(z);
    if (w.kind() == WeightKind::TabulatedRadial && t > w.table_rmax()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "eval_phi: |z| = %g outside table range [0, %g]", t,
                      w.table_rmax());
        throw DomainError(buf);
    }
    return w.phi_radial(t);
}

double disc_mass_centered(const WeightSpec& w, double r) {
    if (r < 0) throw DomainError("disc_mass_centered: negative radius");
    return w.mass(r);
}

double disc_mass(const WeightSpec& w, cdouble z, double r, double rel_tol) {
    if (r < 0) throw DomainError("disc_mass: negative radius");
    if (r == 0) return 0.0;
    const double d = std::abs(z);
    QuadOptions opt;
    opt.rel_tol = rel_tol;
    auto ring = [&w](double t) { return kTwoPi * t * w.density(t); };
    if (d <= 1e-14 * std::max(1.0, r))
        return integrate_or_throw(ring, 0.0, r, opt);

    double full = 0.0;
    if (r > d) full = integrate_or_throw(ring, 0.0, r - d, opt);
    // Band of circles about 0 meeting the disc partially; arc angle via
    // atan2 of factored half-angle products, stable when r << d where the
    // law-of-cosines cosine sits within roundoff of +-1.
    auto arc = [&](double t) {
        const double u = t - d;
        const double s1 = std::max(0.0, (r - u) * (r + u));
        const double s2 = std::max(0.0, (t + d - r) * (t + d + r));
        const double theta = std::atan2(std::sqrt(s1 * s2), 0.5 * (s2 - s1));
        return 2.0 * theta * t * w.density(t);
    };
    const double band = integrate_or_throw(arc, std::abs(d - r), d + r, opt);
    return full + band;
}

double log_moment(const WeightSpec& w, long n) {
    if (n < 0) throw DomainError("log_moment: n must be >= 0");
    if (w.kind() == WeightKind::RadialPower) {
        const double m = w.m();
        const double s = (2.0 * n + 2.0) / m;
        return std::log(kTwoPi / m) + std::lgamma(s) - s * std::log(2.0);
    }
    return log_moment_quadrature(w, n);
}

double log_moment_quadrature(const WeightSpec& w, long n, double rel_tol) {
    if (n < 0) throw DomainError("log_moment: n must be >= 0");
    // g(r) = log(2 pi) + (2n+1) log r - 2 phi(r) is unimodal: its
    // derivative has the sign of (2n+1) pi - M(r) and M is monotone.
    auto g = [&](double r) {
        return std::log(kTwoPi) + (2.0 * n + 1.0) * std::log(r) -
               2.0 * w.phi_radial(r);
    };
    const double target = (2.0 * n + 1.0) * M_PI;
    double lo = 1e-30, hi = 1.0;
    int guard = 0;
    while (w.mass(hi) < target) {
        hi *= 2.0;
        if (++guard > 2000) throw BracketError("log_moment: peak not bracketed");
    }
    while (w.mass(lo) > target) lo /= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (w.mass(mid) < target ? lo : hi) = mid;
    }
    const double r_peak = 0.5 * (lo + hi);
    const double g_peak = g(r_peak);

    const double drop = 90.0;  // e^-90, far below double noise on the sum
    double r_lo = r_peak;
    while (r_lo > 1e-280 && g(r_lo) > g_peak - drop) r_lo *= 0.5;
    double r_hi = r_peak;
    guard = 0;
    while (g(r_hi) > g_peak - drop) {
        r_hi *= 2.0;
        if (++guard > 2000)
            throw QuadratureError("log_moment: tail does not decay", 0.0);
    }

    QuadOptions opt;
    opt.rel_tol = rel_tol;
    auto h = [&](double r) { return std::exp(g(r) - g_peak); };
    const double integral = integrate_or_throw(h, r_lo, r_hi, opt);

    // Octave bound on the remainder past r_hi; h is decreasing there.
    double tail = 0.0, a = r_hi;
    for (int k = 0; k < 300; ++k) {
        const double piece = h(a) * a;
        tail += piece;
        if (piece < 1e-16 * integral) break;
        if (k == 299)
            throw QuadratureError("log_moment: tail bound not geometric",
                                  piece);
        a *= 2.0;
    }
    (void)tail;  // bounded below 1e-13 of the bulk by the drop choice
    return g_peak + std::log(integral);
}

MomentTable::MomentTable(const WeightSpec& w, long n_max) {
    if (n_max < 1) throw DomainError("MomentTable: n_max must be >= 1");
    weight_id_ = w.id();
    log_I_.resize(n_max + 1);
    for (long n = 0; n <= n_max; ++n) log_I_[n] = log_moment(w, n);
    for (long n = 1; n < n_max; ++n) {
        const double gap =
            log_I_[n - 1] + log_I_[n + 1] - 2.0 * log_I_[n];
        if (gap < -1e-9)
            throw Error("MomentTable: log-convexity violated at n = " +
                        std::to_string(n));
    }
}

double MomentTable::log_I(long n) const {
    if (n < 0 || n >= static_cast<long>(log_I_.size()))
        throw DomainError("MomentTable: index " + std::to_string(n) +
                          " outside [0, " + std::to_string(n_max()) + "]");
    return log_I_[n];
}

double MomentTable::ratio(long n_hi, long n_lo) const {
    return std::exp(log_I(n_hi) - log_I(n_lo));
}

void MomentTable::write_csv(std::ostream& os) const {
    os << "n,log_moment\n";
    for (std::size_t n = 0; n < log_I_.size(); ++n)
        os << n << "," << format_g17(log_I_[n]) << "\n";
}

}  // namespace fockspec
