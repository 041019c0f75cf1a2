#include "fockspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <queue>

#include "fockspec/quadrature.hpp"

namespace fockspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mass_radius_seed(const WeightSpec& w) {
    // Radius with closed-form centered mass 1; seed only, never a result.
    double hi = 1.0;
    int guard = 0;
    while (w.mass(hi) < 1.0) {
        hi *= 2.0;
        if (++guard > 400) throw BracketError("rho: centered mass stays < 1");
    }
    double lo = hi / 2.0;
    while (lo > 1e-300 && w.mass(lo) > 1.0) lo /= 2.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (w.mass(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double rho_solve(const WeightSpec& w, double d_center, double tol,
                 double seed) {
    const double quad_tol = std::clamp(tol * 0.05, 1e-13, 1e-9);
    const cdouble z(d_center, 0.0);
    auto f = [&](double r) { return disc_mass(w, z, r, quad_tol) - 1.0; };

    if (seed <= 0) {
        const double dens = w.density(d_center);
        seed = (std::isfinite(dens) && dens > 1e-12)
                   ? 1.0 / std::sqrt(M_PI * dens)
                   : mass_radius_seed(w);
    }
    double a = seed * 0.7, b = seed * 1.4;
    double fa = f(a), fb = f(b);
    int guard = 0;
    while (fa > 0.0) {
        b = a;
        fb = fa;
        a *= 0.5;
        fa = f(a);
        if (++guard > 60) throw BracketError("rho: no lower bracket");
    }
    while (fb < 0.0) {
        a = b;
        fa = fb;
        b *= 2.0;
        fb = f(b);
        if (++guard > 60) throw BracketError("rho: no upper bracket");
    }

    // Illinois false position; the mass map is strictly increasing.
    int side = 0;
    for (int it = 0; it < 120; ++it) {
        const double x = (a * fb - b * fa) / (fb - fa);
        const double fx = f(x);
        if (std::abs(fx) <= tol) return x;
        if (fx < 0.0) {
            if (!(x >= a)) throw Error("rho: mass map not monotone");
            a = x;
            fa = fx;
            if (side == -1) fb *= 0.5;
            side = -1;
        } else {
            if (!(x <= b)) throw Error("rho: mass map not monotone");
            b = x;
            fb = fx;
            if (side == 1) fa *= 0.5;
            side = 1;
        }
        if (b - a <= 1e-15 * b) break;
    }
    const double x = 0.5 * (a + b);
    if (std::abs(f(x)) <= 10.0 * tol) return x;
    throw Error("rho: residual above tolerance after iteration cap");
}

}  // namespace

double rho(const WeightSpec& w, cdouble z, double tol) {
    if (!(tol > 0)) throw DomainError("rho: tol must be positive");
    return rho_solve(w, std::abs(z), tol, 0.0);
}

RadialRhoCache::RadialRhoCache(const WeightSpec& w, double t_max, int n_nodes,
                               double tol)
    : w_(&w), t_max_(t_max) {
    if (!(t_max > 0) || n_nodes < 16)
        throw DomainError("RadialRhoCache: bad t_max or node count");
    const int n = n_nodes;
    t_.resize(n + 1);
    v_.resize(n + 1);
    // Quadratic clustering: small radii resolved absolutely, large ones
    // relatively; rho is smooth in between.
    double seed = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = static_cast<double>(k) / n;
        t_[k] = t_max * u * u;
        v_[k] = rho_solve(*w_, t_[k], tol, seed);
        seed = v_[k];
    }
    min_v_ = *std::min_element(v_.begin(), v_.end());

    // Fritsch-Carlson slopes keep the interpolant shape-preserving.
    const std::size_t m = t_.size();
    std::vector<double> h(m - 1), s(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        h[i] = t_[i + 1] - t_[i];
        s[i] = (v_[i + 1] - v_[i]) / h[i];
    }
    d_.assign(m, 0.0);
    auto endpoint = [](double h0, double h1, double s0, double s1) {
        double d0 = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d0 * s0 <= 0.0)
            d0 = 0.0;
        else if (s0 * s1 < 0.0 && std::abs(d0) > 3.0 * std::abs(s0))
            d0 = 3.0 * s0;
        return d0;
    };
    d_[0] = endpoint(h[0], h[1], s[0], s[1]);
    d_[m - 1] = endpoint(h[m - 2], h[m - 3], s[m - 2], s[m - 3]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
        if (s[i - 1] * s[i] <= 0.0) {
            d_[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
        }
    }
}

double RadialRhoCache::operator()(double t) const {
    if (t < 0) throw DomainError("RadialRhoCache: negative radius");
    const std::size_t m = t_.size();
    if (t >= t_max_) {
        // Power-law continuation from the terminal log-slope.
        const double vend = v_[m - 1];
        double q = d_[m - 1] * t_max_ / vend;
        q = std::clamp(q, -5.0, 5.0);
        return vend * std::pow(t / t_max_, q);
    }
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    const std::size_t i = std::max<std::ptrdiff_t>(1, it - t_.begin()) - 1;
    const double h = t_[i + 1] - t_[i];
    const double x = (t - t_[i]) / h;
    const double h00 = (1 + 2 * x) * (1 - x) * (1 - x);
    const double h10 = x * (1 - x) * (1 - x);
    const double h01 = x * x * (3 - 2 * x);
    const double h11 = x * x * (x - 1);
    return h00 * v_[i] + h * h10 * d_[i] + h01 * v_[i + 1] +
           h * h11 * d_[i + 1];
}

DistanceField::DistanceField(const WeightSpec& w, const BoxSpec& box,
                             cdouble source, double cap_factor,
                             const RadialRhoCache* cache)
    : box_(box), source_(source) {
    if (!(box.x1 > box.x0) || !(box.y1 > box.y0))
        throw DomainError("DistanceField: empty box");
    if (source.real() < box.x0 || source.real() > box.x1 ||
        source.imag() < box.y0 || source.imag() > box.y1)
        throw DomainError("DistanceField: source outside box");
    if (!(cap_factor >= 1.0))
        throw DomainError("DistanceField: cap_factor must be >= 1");

    const double cx[4] = {box.x0, box.x1, box.x0, box.x1};
    const double cy[4] = {box.y0, box.y0, box.y1, box.y1};
    double t_hi = 0.0;
    for (int c = 0; c < 4; ++c)
        t_hi = std::max(t_hi, std::hypot(cx[c], cy[c]));
    double t_lo = 0.0;
    if (box.x0 > 0 || box.x1 < 0 || box.y0 > 0 || box.y1 < 0) {
        const double dx = std::max({box.x0, -box.x1, 0.0});
        const double dy = std::max({box.y0, -box.y1, 0.0});
        t_lo = std::hypot(dx, dy);
    }

    std::unique_ptr<RadialRhoCache> own;
    if (!cache) {
        own = std::make_unique<RadialRhoCache>(w, t_hi * 1.02 + 1e-9, 512,
                                               1e-7);
        cache = own.get();
    }
    double rho_min = kInf;
    for (int k = 0; k <= 256; ++k) {
        const double t = t_lo + (t_hi - t_lo) * k / 256.0;
        rho_min = std::min(rho_min, (*cache)(t));
    }
    h_ = rho_min / cap_factor;

    // Anchor the lattice on the source.
    ox_ = source.real() - h_ * std::ceil((source.real() - box.x0) / h_);
    oy_ = source.imag() - h_ * std::ceil((source.imag() - box.y0) / h_);
    nx_ = static_cast<int>(std::ceil((box.x1 - ox_) / h_)) + 1;
    ny_ = static_cast<int>(std::ceil((box.y1 - oy_) / h_)) + 1;
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    if (n > 16'000'000)
        throw Error("DistanceField: grid would exceed 16M nodes; shrink the "
                    "box or cap_factor");

    rho_.resize(n);
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i)
            rho_[idx(i, j)] = (*cache)(std::abs(node(i, j)));

    dist_.assign(n, kInf);
    const int si = static_cast<int>(std::lround((source.real() - ox_) / h_));
    const int sj = static_cast<int>(std::lround((source.imag() - oy_) / h_));
    const std::size_t s = idx(si, sj);

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;

    // Upwind eikonal marching instead of graph shortest paths: a lattice
    // path metric overestimates oblique directions by up to 8%, which is a
    // bias no refinement removes.  Seeding a 3h disc with exact values
    // sidesteps the point-source singularity of the scheme.
    for (int j = std::max(0, sj - 3); j <= std::min(ny_ - 1, sj + 3); ++j)
        for (int i = std::max(0, si - 3); i <= std::min(nx_ - 1, si + 3);
             ++i) {
            const double r = std::abs(node(i, j) - source);
            if (r > 3.0 * h_ * 1.0001) continue;
            const std::size_t v = idx(i, j);
            dist_[v] = r * 2.0 / (rho_[v] + rho_[s]);
            pq.push({dist_[v], v});
        }

    struct AxisSel {
        bool ok = false;
        double alpha = 0.0, beta = 0.0, d1 = kInf;
    };
    auto pick_axis = [&](int i, int j, int axis) {
        AxisSel sel;
        for (int sgn : {-1, 1}) {
            const int di = axis ? 0 : sgn, dj = axis ? sgn : 0;
            const int i1 = i + di, j1 = j + dj;
            if (i1 < 0 || i1 >= nx_ || j1 < 0 || j1 >= ny_) continue;
            const double d1 = dist_[idx(i1, j1)];
            if (!std::isfinite(d1) || d1 >= sel.d1) continue;
            sel.ok = true;
            sel.d1 = d1;
            sel.alpha = 1.0 / h_;
            sel.beta = d1 / h_;
            const int i2 = i + 2 * di, j2 = j + 2 * dj;
            if (i2 >= 0 && i2 < nx_ && j2 >= 0 && j2 < ny_) {
                const double d2 = dist_[idx(i2, j2)];
                if (std::isfinite(d2) && d2 <= d1) {
                    sel.alpha = 1.5 / h_;
                    sel.beta = (4.0 * d1 - d2) / (2.0 * h_);
                }
            }
        }
        return sel;
    };
    auto solve_two = [](const AxisSel& a, const AxisSel& b, double slow) {
        double A = 0.0, B = 0.0, C = -slow * slow;
        for (const AxisSel* t : {&a, &b})
            if (t->ok) {
                A += t->alpha * t->alpha;
                B += -2.0 * t->alpha * t->beta;
                C += t->beta * t->beta;
            }
        if (A == 0.0) return kInf;
        const double disc = B * B - 4.0 * A * C;
        if (disc < 0.0) return kInf;
        return (-B + std::sqrt(disc)) / (2.0 * A);
    };
    auto recompute = [&](int i, int j) {
        const AxisSel ax = pick_axis(i, j, 0);
        const AxisSel ay = pick_axis(i, j, 1);
        if (!ax.ok && !ay.ok) return kInf;
        const double slow = 1.0 / rho_[idx(i, j)];
        const double d = solve_two(ax, ay, slow);
        if (std::isfinite(d) && (!ax.ok || d >= ax.d1) &&
            (!ay.ok || d >= ay.d1))
            return d;
        // Causality fallback: one-sided along the smaller upwind value.
        const AxisSel& one = (!ay.ok || (ax.ok && ax.d1 <= ay.d1)) ? ax : ay;
        const AxisSel none;
        double ds = solve_two(one, none, slow);
        if (!std::isfinite(ds) || ds < one.d1) ds = one.d1 + h_ * slow;
        return ds;
    };

    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist_[u]) continue;
        const int ui = static_cast<int>(u % nx_);
        const int uj = static_cast<int>(u / nx_);
        const int dxs[4] = {1, -1, 0, 0};
        const int dys[4] = {0, 0, 1, -1};
        for (int e = 0; e < 4; ++e) {
            const int vi = ui + dxs[e], vj = uj + dys[e];
            if (vi < 0 || vi >= nx_ || vj < 0 || vj >= ny_) continue;
            const std::size_t v = idx(vi, vj);
            if (dist_[v] <= d) continue;  // already settled at least as low
            const double nd = recompute(vi, vj);
            if (nd < dist_[v] * (1.0 - 1e-14)) {
                dist_[v] = nd;
                pq.push({nd, v});
            }
        }
    }
}

cdouble DistanceField::node(int i, int j) const {
    return {ox_ + i * h_, oy_ + j * h_};
}

double DistanceField::value(cdouble z) const {
    if (z.real() < box_.x0 - h_ || z.real() > box_.x1 + h_ ||
        z.imag() < box_.y0 - h_ || z.imag() > box_.y1 + h_)
        throw DomainError("DistanceField: endpoint outside box");
    const double fx = std::clamp((z.real() - ox_) / h_, 0.0, nx_ - 1.0);
    const double fy = std::clamp((z.imag() - oy_) / h_, 0.0, ny_ - 1.0);
    const int i0 = std::min(static_cast<int>(fx), nx_ - 2 >= 0 ? nx_ - 2 : 0);
    const int j0 = std::min(static_cast<int>(fy), ny_ - 2 >= 0 ? ny_ - 2 : 0);
    if (nx_ < 2 || ny_ < 2) return dist_[idx(i0, j0)];
    const double tx = fx - i0, ty = fy - j0;
    const double c00 = dist_[idx(i0, j0)], c10 = dist_[idx(i0 + 1, j0)];
    const double c01 = dist_[idx(i0, j0 + 1)], c11 = dist_[idx(i0 + 1, j0 + 1)];
    if (!std::isfinite(c00) || !std::isfinite(c10) || !std::isfinite(c01) ||
        !std::isfinite(c11)) {
        // Nearest reached node when the cell touches unreached territory.
        const int i = static_cast<int>(std::lround(fx));
        const int j = static_cast<int>(std::lround(fy));
        return dist_[idx(std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1))];
    }
    return (1 - tx) * (1 - ty) * c00 + tx * (1 - ty) * c10 +
           (1 - tx) * ty * c01 + tx * ty * c11;
}

void DistanceField::write_csv(std::ostream& os) const {
    os << "x,y,dist\n";
    for (int j = 0; j < ny_; ++j)
        for (int i = 0; i < nx_; ++i) {
            const cdouble z = node(i, j);
            os << format_g17(z.real()) << "," << format_g17(z.imag()) << ","
               << format_g17(dist_[idx(i, j)]) << "\n";
        }
}

double bergman_distance(const WeightSpec& w, cdouble z, cdouble zeta,
                        double cap_factor) {
    if (z == zeta) return 0.0;
    const double rz = rho(w, z, 1e-8);
    const double rzeta = rho(w, zeta, 1e-8);
    const double pad = 0.35 * std::abs(z - zeta) + 3.0 * std::max(rz, rzeta);
    BoxSpec box{std::min(z.real(), zeta.real()) - pad,
                std::min(z.imag(), zeta.imag()) - pad,
                std::max(z.real(), zeta.real()) + pad,
                std::max(z.imag(), zeta.imag()) + pad};
    DistanceField f(w, box, z, cap_factor);
    return f.value(zeta);
}

DoublingStats doubling_stats(const WeightSpec& w,
                             const std::vector<cdouble>& centers,
                             const std::vector<double>& radii) {
    if (centers.empty() || radii.empty() ||
        centers.size() * radii.size() < 2)
        throw DomainError("doubling_stats: degenerate sample");
    DoublingStats st;
    st.n_centers = static_cast<int>(centers.size());
    st.n_radii = static_cast<int>(radii.size());
    std::vector<double> lx, ly;
    for (const cdouble& z : centers) {
        std::vector<double> mass(radii.size());
        for (std::size_t i = 0; i < radii.size(); ++i) {
            if (!(radii[i] > 0))
                throw DomainError("doubling_stats: radii must be positive");
            mass[i] = disc_mass(w, z, radii[i], 1e-9);
            const double m2 = disc_mass(w, z, 2.0 * radii[i], 1e-9);
            st.c_doubling = std::max(st.c_doubling, m2 / mass[i]);
        }
        for (std::size_t i = 0; i < radii.size(); ++i)
            for (std::size_t j = i + 1; j < radii.size(); ++j) {
                if (radii[j] <= radii[i]) continue;
                lx.push_back(std::log(radii[j] / radii[i]));
                ly.push_back(std::log(mass[j] / mass[i]));
            }
    }
    if (lx.size() >= 2) st.gamma_fit = fit_line(lx, ly).slope;
    return st;
}

double rho_comparability(const WeightSpec& w, double r_mult,
                         const std::vector<cdouble>& centers, double tol) {
    if (!(r_mult > 0)) throw DomainError("rho_comparability: r_mult <= 0");
    if (centers.empty())
        throw DomainError("rho_comparability: no sample centers");
    double c = 1.0;
    for (const cdouble& z : centers) {
        const double rz = rho(w, z, tol);
        for (int a = 0; a < 8; ++a) {
            const double th = 2.0 * M_PI * a / 8.0;
            for (double frac : {0.35, 0.7, 1.0}) {
                const cdouble zeta =
                    z + std::polar(r_mult * rz * frac, th);
                const double rzeta = rho(w, zeta, tol);
                c = std::max({c, rz / rzeta, rzeta / rz});
            }
        }
    }
    return c;
}

GrowthFit growth_exponents(const WeightSpec& w, double r_lo, double r_hi,
                           int n_samples) {
    if (!(r_lo > 0) || !(r_hi >= 100.0 * r_lo))
        throw DomainError("growth_exponents: range must span >= 2 decades");
    if (n_samples < 4) throw DomainError("growth_exponents: too few samples");
    std::vector<double> lx(n_samples), ly(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double t =
            r_lo * std::pow(r_hi / r_lo,
                            static_cast<double>(i) / (n_samples - 1));
        lx[i] = std::log(t);
        ly[i] = std::log(rho(w, cdouble(t, 0.0), 1e-8));
    }
    const LineFit fit = fit_line(lx, ly);
    return {fit.slope, fit.slope_stderr};
}

EnvelopeFit distance_envelope_check(const WeightSpec& w,
                                    const DistanceField& field,
                                    int max_targets) {
    const cdouble z = field.source();
    const double rho_z = rho(w, z, 1e-8);
    EnvelopeFit fit;
    fit.witness_z = z;

    std::vector<double> far_u, far_d;
    const std::size_t total =
        static_cast<std::size_t>(field.nx()) * field.ny();
    const std::size_t stride = std::max<std::size_t>(1, total / max_targets);
    double c_near = 1.0;
    for (std::size_t k = 0; k < total; k += stride) {
        const int i = static_cast<int>(k % field.nx());
        const int j = static_cast<int>(k / field.nx());
        const cdouble zeta = field.node(i, j);
        const double d = field.dist_at(i, j);
        const double u = std::abs(z - zeta) / rho_z;
        if (u < 1e-12 || !std::isfinite(d) || d <= 0.0) continue;
        if (u <= 1.0)
            c_near = std::max({c_near, d / u, u / d});
        else {
            far_u.push_back(u);
            far_d.push_back(d);
        }
    }
    fit.c_near = c_near;

    double best_c = kInf, best_delta = 0.0;
    cdouble best_witness;
    for (double delta = 0.05; delta <= 0.951; delta += 0.025) {
        double c = 1.0;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < far_u.size(); ++i) {
            const double lower = std::pow(far_u[i], delta) / far_d[i];
            const double upper = far_d[i] / std::pow(far_u[i], 2.0 - delta);
            const double need = std::max(lower, upper);
            if (need > c) {
                c = need;
                arg = i;
            }
        }
        if (c < best_c) {
            best_c = c;
            best_delta = delta;
            const double uu = far_u.empty() ? 0.0 : far_u[arg];
            best_witness = z + cdouble(uu * rho_z, 0.0);
        }
    }
    fit.delta_fit = best_delta;
    fit.c_far = far_u.empty() ? 1.0 : best_c;
    fit.ok = std::isfinite(fit.c_far) && fit.c_far < 1e6;
    if (!fit.ok) fit.witness_zeta = best_witness;
    return fit;
}

LocalDecayField::LocalDecayField(const WeightSpec& w,
                                 const RadialRhoCache& cache, cdouble center,
                                 double d_max, double res)
    : d_max_(d_max) {
    if (!(d_max > 0) || !(res >= 1.0))
        throw DomainError("LocalDecayField: bad d_max or resolution");
    const double tc = std::abs(center);
    const double budget = 1.35 * d_max + 3.0;

    QuadOptions qo;
    qo.rel_tol = 1e-6;
    auto metric_span = [&](double a, double b) {
        if (a == b) return 0.0;
        return integrate([&](double t) { return 1.0 / cache(t); }, a, b, qo)
            .value;
    };

    // Reachable radial band for the budget.
    double step = cache(tc) * 0.5;
    double r_out = tc;
    while (metric_span(tc, r_out + step) < budget) {
        r_out += step;
        step *= 1.6;
    }
    r_out += step;
    double r_in = 0.0;
    if (metric_span(0.0, tc) > budget) {
        step = cache(tc) * 0.5;
        r_in = tc;
        while (r_in - step > 0 && metric_span(r_in - step, tc) < budget) {
            r_in -= step;
            step *= 1.6;
        }
        r_in = std::max(0.0, r_in - step);
    }

    // Rings stepped at rho/res.
    std::vector<double> rr;
    if (r_in == 0.0) rr.push_back(0.0);
    double r = (r_in == 0.0) ? cache(0.0) / res : r_in;
    while (r < r_out) {
        rr.push_back(r);
        r += cache(r) / res;
        if (rr.size() > 400'000)
            throw Error("LocalDecayField: ring count blew up");
    }
    rr.push_back(r);
    const std::size_t nring = rr.size();

    // Angular window from the cheapest rotation radius in the band.  Any
    // point at metric distance <= budget sits within budget/min_cost of the
    // center ray, so pad relative to that reach (an absolute pad would dwarf
    // the window itself at large center radii).
    double th_max = M_PI;
    if (r_in > 0.0) {
        double min_cost = kInf;
        for (double t : rr)
            if (t > 0) min_cost = std::min(min_cost, t / cache(t));
        const double reach = budget / min_cost;
        const double cell = (cache(rr.front()) / res) / rr.front();
        th_max = std::min(M_PI, 1.15 * reach + 4.0 * cell);
    }
    const bool wrap = th_max >= M_PI - 1e-12;
    const double base_ang = (tc > 0) ? std::arg(center) : 0.0;

    std::vector<int> ring_n(nring), ring_off(nring);
    std::vector<double> ring_dth(nring), ring_rho(nring);
    std::size_t n_nodes = 0;
    for (std::size_t ji = 0; ji < nring; ++ji) {
        ring_rho[ji] = cache(rr[ji]);
        int n;
        if (rr[ji] == 0.0)
            n = 1;
        else
            n = std::max(8, static_cast<int>(std::ceil(
                                2.0 * th_max * rr[ji] / (ring_rho[ji] / res))));
        ring_n[ji] = n;
        ring_dth[ji] = 2.0 * th_max / n;
        ring_off[ji] = static_cast<int>(n_nodes);
        n_nodes += n;
        if (n_nodes > 30'000'000)
            throw Error("LocalDecayField: node count blew up");
    }

    auto angle_of = [&](std::size_t ji, int i) {
        return -th_max + (i + 0.5) * ring_dth[ji];
    };
    auto pos_of = [&](std::size_t ji, int i) -> cdouble {
        if (rr[ji] == 0.0) return {0.0, 0.0};
        return std::polar(rr[ji], base_ang + angle_of(ji, i));
    };

    // Upwind eikonal marching on the polar grid (radial and tangential are
    // orthogonal axes).  A ring-graph shortest path overestimates oblique
    // directions by a bias no resolution removes; marching does not.
    std::vector<double> dist(n_nodes, kInf);
    std::vector<char> frozen(n_nodes, 0);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;

    // Exact seeding in a small disc around the center kills the
    // point-source singularity of the scheme.
    const double rho_c = cache(tc);
    const double seed_r = 3.5 * rho_c / res;
    for (std::size_t ji = 0; ji < nring; ++ji) {
        if (ring_n[ji] == 1) {
            if (tc <= seed_r) {
                const std::size_t v = ring_off[ji];
                dist[v] = tc * 2.0 / (ring_rho[ji] + rho_c);
                frozen[v] = 1;
                pq.push({dist[v], v});
            }
            continue;
        }
        if (std::abs(rr[ji] - tc) > seed_r) continue;
        const double dth = ring_dth[ji];
        const double fc = th_max / dth - 0.5;  // index at relative angle 0
        const double half =
            (seed_r / std::max(rr[ji], 1e-300)) / dth + 2.0;
        int lo = static_cast<int>(std::floor(fc - half));
        int hi = static_cast<int>(std::ceil(fc + half));
        if (hi - lo + 1 >= ring_n[ji]) {
            lo = 0;
            hi = ring_n[ji] - 1;
        }
        for (int iv = lo; iv <= hi; ++iv) {
            int v = iv;
            if (wrap)
                v = (v % ring_n[ji] + ring_n[ji]) % ring_n[ji];
            else if (v < 0 || v >= ring_n[ji])
                continue;
            const double r = std::abs(pos_of(ji, v) - center);
            if (r > seed_r) continue;
            const std::size_t u = ring_off[ji] + v;
            const double dv = r * 2.0 / (ring_rho[ji] + rho_c);
            if (dv < dist[u]) {
                dist[u] = dv;
                frozen[u] = 1;
                pq.push({dv, u});
            }
        }
    }

    struct Axis {
        bool ok = false;
        double alpha = 0.0, beta = 0.0, d1 = kInf, step = 0.0;
    };
    // Sample the adjacent ring at this node's own angle.  Min over the two
    // bracketing nodes would fold the tangential variation into the radial
    // axis and bias every ring step low.
    auto radial_sample = [&](std::size_t jq, double th) -> double {
        if (ring_n[jq] == 1) return dist[ring_off[jq]];
        const int n = ring_n[jq];
        const double fidx = (th + th_max) / ring_dth[jq] - 0.5;
        int i0 = static_cast<int>(std::floor(fidx));
        const double frac = fidx - i0;
        int i1 = i0 + 1;
        if (wrap) {
            i0 = (i0 % n + n) % n;
            i1 = (i1 % n + n) % n;
        } else {
            i0 = std::clamp(i0, 0, n - 1);
            i1 = std::clamp(i1, 0, n - 1);
        }
        const double a = dist[ring_off[jq] + i0];
        const double b = dist[ring_off[jq] + i1];
        if (i0 == i1 || frac <= 1e-9) return a;
        if (frac >= 1.0 - 1e-9) return b;
        if (!std::isfinite(a) || !std::isfinite(b)) return kInf;
        return (1.0 - frac) * a + frac * b;
    };
    auto recompute = [&](std::size_t ji, int i) -> double {
        const double slow = 1.0 / ring_rho[ji];
        if (ring_n[ji] == 1) {
            if (nring < 2) return dist[ring_off[ji]];
            double best = kInf;
            for (int v = 0; v < ring_n[1]; ++v)
                best = std::min(best, dist[ring_off[1] + v]);
            return best + (rr[1] - rr[0]) * slow;
        }
        Axis tg, rd;
        const double dt_len = rr[ji] * ring_dth[ji];
        for (int sgn : {-1, 1}) {
            int v1 = i + sgn;
            if (wrap)
                v1 = (v1 + ring_n[ji]) % ring_n[ji];
            else if (v1 < 0 || v1 >= ring_n[ji])
                continue;
            const double d1 = dist[ring_off[ji] + v1];
            if (!std::isfinite(d1) || d1 >= tg.d1) continue;
            tg = {true, 1.0 / dt_len, d1 / dt_len, d1, dt_len};
            int v2 = i + 2 * sgn;
            if (wrap)
                v2 = (v2 + ring_n[ji]) % ring_n[ji];
            else if (v2 < 0 || v2 >= ring_n[ji])
                v2 = -1;
            if (v2 >= 0) {
                const double d2 = dist[ring_off[ji] + v2];
                if (std::isfinite(d2) && d2 <= d1) {
                    tg.alpha = 1.5 / dt_len;
                    tg.beta = (4.0 * d1 - d2) / (2.0 * dt_len);
                }
            }
        }
        const double th = angle_of(ji, i);
        for (int sgn : {-1, 1}) {
            const std::ptrdiff_t jn = static_cast<std::ptrdiff_t>(ji) + sgn;
            if (jn < 0 || jn >= static_cast<std::ptrdiff_t>(nring)) continue;
            const double d1 = radial_sample(static_cast<std::size_t>(jn), th);
            if (!std::isfinite(d1) || d1 >= rd.d1) continue;
            const double dr = std::abs(rr[static_cast<std::size_t>(jn)] -
                                       rr[ji]);
            rd = {true, 1.0 / dr, d1 / dr, d1, dr};
        }
        if (!tg.ok && !rd.ok) return kInf;
        double A = 0.0, B = 0.0, C = -slow * slow;
        for (const Axis* t : {&tg, &rd})
            if (t->ok) {
                A += t->alpha * t->alpha;
                B += -2.0 * t->alpha * t->beta;
                C += t->beta * t->beta;
            }
        double d = kInf;
        if (A > 0.0) {
            const double disc = B * B - 4.0 * A * C;
            if (disc >= 0.0) d = (-B + std::sqrt(disc)) / (2.0 * A);
        }
        if (std::isfinite(d) && (!tg.ok || d >= tg.d1) &&
            (!rd.ok || d >= rd.d1))
            return d;
        const Axis& one = (!rd.ok || (tg.ok && tg.d1 <= rd.d1)) ? tg : rd;
        double ds = (one.beta + slow) / one.alpha;
        if (!std::isfinite(ds) || ds < one.d1) ds = one.d1 + one.step * slow;
        return ds;
    };

    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        if (d > budget) continue;
        // Locate the ring by offset.
        std::size_t ji =
            std::upper_bound(ring_off.begin(), ring_off.end(),
                             static_cast<int>(u)) -
            ring_off.begin() - 1;
        const int i = static_cast<int>(u) - ring_off[ji];
        auto touch = [&, d](std::size_t jq, int v) {
            const std::size_t t = ring_off[jq] + v;
            if (frozen[t] || dist[t] <= d) return;
            const double nd = recompute(jq, v);
            if (nd < dist[t] * (1.0 - 1e-14)) {
                dist[t] = nd;
                pq.push({nd, t});
            }
        };

        if (ring_n[ji] > 1) {
            for (int di : {-1, 1}) {
                int v = i + di;
                if (wrap)
                    v = (v + ring_n[ji]) % ring_n[ji];
                else if (v < 0 || v >= ring_n[ji])
                    continue;
                touch(ji, v);
            }
        }
        for (int dj : {-1, 1}) {
            const std::ptrdiff_t jn = static_cast<std::ptrdiff_t>(ji) + dj;
            if (jn < 0 || jn >= static_cast<std::ptrdiff_t>(nring)) continue;
            const std::size_t jq = static_cast<std::size_t>(jn);
            if (ring_n[jq] == 1) {
                touch(jq, 0);
                continue;
            }
            if (ring_n[ji] == 1) {
                for (int v = 0; v < ring_n[jq]; ++v) touch(jq, v);
                continue;
            }
            // Every node whose interpolation pair contains this one.
            const double th = angle_of(ji, i);
            const double fq = (th + th_max) / ring_dth[jq] - 0.5;
            const int hw =
                static_cast<int>(std::ceil(ring_dth[ji] / ring_dth[jq])) + 1;
            if (2 * hw + 1 >= ring_n[jq]) {
                for (int v = 0; v < ring_n[jq]; ++v) touch(jq, v);
                continue;
            }
            const int c0 = static_cast<int>(std::lround(fq));
            for (int v0 = c0 - hw; v0 <= c0 + hw; ++v0) {
                int v = v0;
                if (wrap)
                    v = (v % ring_n[jq] + ring_n[jq]) % ring_n[jq];
                else if (v < 0 || v >= ring_n[jq])
                    continue;
                touch(jq, v);
            }
        }
    }

    // Cells: ring bands sliced by the angular step.
    cells_.reserve(n_nodes / 2);
    for (std::size_t ji = 0; ji < nring; ++ji) {
        const double lo = (ji == 0) ? std::max(0.0, rr[0] - (rr[1] - rr[0]) / 2)
                                    : 0.5 * (rr[ji - 1] + rr[ji]);
        const double hi = (ji + 1 == nring)
                              ? rr[ji] + 0.5 * (rr[ji] - rr[ji - 1])
                              : 0.5 * (rr[ji] + rr[ji + 1]);
        const double band = 0.5 * (hi * hi - lo * lo);
        for (int i = 0; i < ring_n[ji]; ++i) {
            const double d = dist[ring_off[ji] + i];
            if (!(d <= d_max)) continue;
            double area = ring_dth[ji] * band;
            if (rr[ji] == 0.0) area = M_PI * hi * hi;
            cells_.push_back({pos_of(ji, i), area, d});
        }
    }
}

DecayLadder integral_decay_check(const WeightSpec& w, cdouble zeta, int k,
                                 double eps, double d_max,
                                 const RadialRhoCache* cache) {
    if (k < 0) throw DomainError("integral_decay_check: k must be >= 0");
    if (!(eps > 0)) throw DomainError("integral_decay_check: eps must be > 0");
    if (!(d_max > 0)) throw DomainError("integral_decay_check: d_max <= 0");

    DecayLadder lad;
    lad.thresholds = {d_max / 8.0, d_max / 4.0, d_max / 2.0, d_max};
    lad.partials.assign(4, 0.0);
    lad.rho_center = rho(w, zeta, 1e-8);

    std::unique_ptr<RadialRhoCache> own;
    if (!cache) {
        // Rough reach estimate with direct solves before committing to a
        // cache range.
        double t = std::max(std::abs(zeta), lad.rho_center);
        double acc = 0.0;
        int guard = 0;
        while (acc < 1.45 * d_max + 4.0) {
            const double r_here = rho_solve(w, t, 1e-6, 0.0);
            acc += 0.6;
            t += 0.6 * r_here;
            if (++guard > 100000)
                throw Error("integral_decay_check: reach estimate ran away");
        }
        own = std::make_unique<RadialRhoCache>(w, t * 1.05, 768, 1e-7);
        cache = own.get();
    }

    const double tc = std::abs(zeta);
    if (tc < 1e-12) {
        // Radial route: d(0, r) is the 1D metric integral.
        double r = 0.0, d = 0.0;
        std::vector<KahanSum> acc(4);
        int guard = 0;
        while (d < d_max) {
            const double rho_here = (*cache)(r);
            const double dr = rho_here / 8.0;
            const double rm = r + dr / 2;
            const double dm = d + 0.5 * dr / rho_here;
            const double piece = 2.0 * M_PI * std::pow(rm, k + 1.0) *
                                 w.density(rm) *
                                 std::exp(-std::pow(dm, eps));
            for (int b = 0; b < 4; ++b)
                if (dm <= lad.thresholds[b]) acc[b].add(piece * dr);
            r += dr;
            d += dr / rho_here;
            if (++guard > 40'000'000)
                throw Error("integral_decay_check: radial march ran away");
        }
        for (int b = 0; b < 4; ++b) lad.partials[b] = acc[b].value();
    } else {
        LocalDecayField field(w, *cache, zeta, d_max, 3.0);
        std::vector<KahanSum> acc(4);
        for (const DecayCell& c : field.cells()) {
            const double piece = std::pow(std::abs(c.z - zeta), k) *
                                 w.density(std::abs(c.z)) * c.area *
                                 std::exp(-std::pow(c.d, eps));
            for (int b = 0; b < 4; ++b)
                if (c.d <= lad.thresholds[b]) acc[b].add(piece);
        }
        for (int b = 0; b < 4; ++b) lad.partials[b] = acc[b].value();
    }
    lad.value = lad.partials[3] / std::pow(lad.rho_center, k);
    return lad;
}

}  // namespace fockspec
