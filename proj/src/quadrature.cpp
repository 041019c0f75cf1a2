#include "fockspec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fockspec {

namespace {

// 15-point Gauss-Legendre on [-1, 1].
constexpr int kGn = 15;
constexpr double kGx[kGn] = {
    -0.98799251802048543,  -0.93727339240070590,  -0.84820658341042722,
    -0.72441773136017005,  -0.57097217260853885,  -0.39415134707756337,
    -0.20119409399743452,  0.0,                   0.20119409399743452,
    0.39415134707756337,   0.57097217260853885,   0.72441773136017005,
    0.84820658341042722,   0.93727339240070590,   0.98799251802048543};
constexpr double kGw[kGn] = {
    0.030753241996117268, 0.070366047488108124, 0.107159220467171935,
    0.139570677926154314, 0.166269205816993934, 0.186161000015562211,
    0.198431485327111576, 0.202578241925561273, 0.198431485327111576,
    0.186161000015562211, 0.166269205816993934, 0.139570677926154314,
    0.107159220467171935, 0.070366047488108124, 0.030753241996117268};

double gauss_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc[kGn];
    for (int i = 0; i < kGn; ++i) acc[i] = kGw[i] * f(c + h * kGx[i]);
    return h * pairwise_sum(std::span<const double>(acc, kGn));
}

struct AdaptState {
    const std::function<double(double)>* f;
    double rel_tol;
    double abs_tol;
    int max_depth;
    int min_depth;
    double scale;  // running magnitude of the whole integral, for rel checks
    double err;
    int panels;
    bool stalled;
};

double adapt(AdaptState& st, double a, double b, double whole, int depth) {
    const double c = 0.5 * (a + b);
    const double left = gauss_panel(*st.f, a, c);
    const double right = gauss_panel(*st.f, c, b);
    const double refined = left + right;
    const double delta = std::abs(refined - whole);
    st.scale = std::max(st.scale, std::abs(refined));
    const double tol =
        std::max(st.abs_tol, st.rel_tol * std::max(st.scale, std::abs(refined)));
    if (depth >= st.min_depth && delta <= tol) {
        st.err += delta;
        st.panels += 2;
        return refined;
    }
    if (depth >= st.max_depth) {
        st.err += delta;
        st.panels += 2;
        st.stalled = true;
        return refined;
    }
    return adapt(st, a, c, left, depth + 1) + adapt(st, c, b, right, depth + 1);
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadOptions& opt) {
    QuadResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    AdaptState st{&f, opt.rel_tol, opt.abs_tol, opt.max_depth,
                  opt.min_depth, 0.0, 0.0, 0, false};
    const double whole = gauss_panel(f, a, b);
    st.scale = std::abs(whole);
    res.value = adapt(st, a, b, whole, 0);
    res.abs_err = st.err;
    res.panels = st.panels;
    res.converged = !st.stalled;
    return res;
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadOptions& opt) {
    const QuadResult res = integrate(f, a, b, opt);
    if (!res.converged) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "quadrature refinement stalled on [%g, %g], achieved "
                      "abs error estimate %.3e",
                      a, b, res.abs_err);
        throw QuadratureError(buf, res.abs_err);
    }
    return res.value;
}

double periodic_mean(const std::function<double(double)>& f, double tol, int n0,
                     int n_max) {
    const double two_pi = 2.0 * M_PI;
    int n = n0;
    auto mean_n = [&](int k) {
        std::vector<double> vals(k);
        for (int i = 0; i < k; ++i) vals[i] = f(two_pi * i / k);
        return pairwise_sum(vals) / k;
    };
    double prev = mean_n(n);
    while (n < n_max) {
        n *= 2;
        const double cur = mean_n(n);
        const double d = std::abs(cur - prev);
        if (d <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

}  // namespace fockspec
