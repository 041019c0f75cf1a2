#include <cmath>
#include <complex>

#include "doctest.h"
#include "fockspec/fock.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/quadrature.hpp"
#include "fockspec/weights.hpp"

using namespace fockspec;

TEST_CASE("basis evaluation matches the monomial form") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 40);
    const OrthoBasis b(mt);
    const cdouble z(1.0, 1.0);
    const cdouble want = z * z / std::sqrt(M_PI * 2.0 / 8.0);  // I_2 = pi/4
    const cdouble got = b.eval(2, z);
    CHECK(std::abs(got - want) < 1e-12);
    CHECK(std::abs(b.eval(0, cdouble(0, 0)) -
                   cdouble(1.0 / std::sqrt(M_PI / 2.0), 0)) < 1e-12);
    CHECK(std::abs(b.eval(3, cdouble(0, 0))) == 0.0);
}

TEST_CASE("gaussian kernel against the exponential closed form") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 80);
    const OrthoBasis b(mt);
    const cdouble pts[] = {{0, 0}, {1, 0}, {0, 2}, {-1, 1}, {1.5, -0.5}};
    for (cdouble z : pts)
        for (cdouble zeta : pts) {
            const KernelValue kv = kernel(b, z, zeta, 1e-10);
            CHECK(kv.reliable);
            const cdouble exact =
                (2.0 / M_PI) * std::exp(2.0 * z * std::conj(zeta));
            CHECK(std::abs(kv.value() - exact) <= 1e-8 * std::abs(exact));
        }
}

TEST_CASE("kernel is hermitian") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    const cdouble pairs[][2] = {
        {{1.2, 0.3}, {0.5, -1.1}},
        {{2.0, 0.0}, {0.0, 2.2}},
        {{-1.7, 0.4}, {1.0, 1.0}},
    };
    for (const auto& pr : pairs) {
        const KernelValue a = kernel(b, pr[0], pr[1]);
        const KernelValue bb = kernel(b, pr[1], pr[0]);
        CHECK(a.log_abs == doctest::Approx(bb.log_abs).epsilon(1e-12));
        const cdouble va = a.value(), vb = std::conj(bb.value());
        CHECK(std::abs(va - vb) <= 1e-10 * std::abs(va));
    }
}

TEST_CASE("kernel reproduces basis functions under the pairing") {
    // <e_3, K(., lambda)> over the quartic weight, radial quadrature with
    // a 64-point angular mean as the independent oracle.
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 240);
    const OrthoBasis b(mt);
    const cdouble lambda(1.3, 0.0);

    auto angular_mean = [&](double r) {
        cdouble acc = 0.0;
        const int na = 64;
        for (int a = 0; a < na; ++a) {
            const cdouble z = std::polar(r, 2.0 * M_PI * a / na);
            const KernelValue kv = kernel(b, z, lambda);
            acc += b.eval(3, z) * std::conj(kv.value());
        }
        return acc / static_cast<double>(na);
    };
    QuadOptions opt;
    opt.rel_tol = 1e-9;
    const double re = integrate(
                          [&](double r) {
                              return angular_mean(r).real() * 2.0 * M_PI * r *
                                     std::exp(-2.0 * w.phi_radial(r));
                          },
                          0.0, 4.0, opt)
                          .value;
    const cdouble want = b.eval(3, lambda);
    CHECK(re == doctest::Approx(want.real()).epsilon(1e-6));
}

TEST_CASE("reliable radius matches the moment ratio") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    // I_n / I_(n-1) = n/2 for the gaussian: the edge index 260 sits at
    // sqrt(130).
    CHECK(reliable_radius(b, 40) ==
          doctest::Approx(std::sqrt(130.0)).epsilon(1e-12));
}

TEST_CASE("diagonal ratio is constant for the gaussian") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    std::vector<cdouble> samples;
    for (int i = 0; i < 12; ++i)
        samples.push_back(std::polar(0.25 * (i + 1), 0.6 * i));
    const DiagStats st = diagonal_estimate_check(b, w, samples, 1e-8);
    CHECK(st.n_rejected == 0);
    const double want = 1.0 / (2.0 * M_PI * M_PI);  // (2/pi) rho^2
    CHECK(st.min_ratio == doctest::Approx(want).epsilon(1e-6));
    CHECK(st.max_ratio == doctest::Approx(want).epsilon(1e-6));
}

TEST_CASE("near-diagonal ratio follows the gaussian law") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    const std::vector<cdouble> samples = {{0, 0}, {1, 0.5}, {-2, 1}};
    const double alpha = 0.25;
    const NearDiagStats st = near_diagonal_check(b, w, alpha, samples, 1e-8);
    CHECK(st.n_rejected == 0);
    // |K-hat| = exp(-|z - zeta|^2); the largest offset is 0.95 alpha rho.
    const double rho_flat = 1.0 / (2.0 * std::sqrt(M_PI));
    const double floor_want =
        std::exp(-std::pow(0.95 * alpha * rho_flat, 2.0));
    CHECK(st.min_ratio == doctest::Approx(floor_want).epsilon(1e-4));
    CHECK(st.max_ratio <= 1.0 + 1e-10);
}

TEST_CASE("off-diagonal fit accepts the gaussian decay at full strength") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    const BoxSpec box{-3.0, -3.0, 3.0, 3.0};
    const DistanceField f1(w, box, cdouble(0, 0), 6.0);
    const DistanceField f2(w, box, cdouble(1.5, 1.0), 6.0);
    const OffdiagFit fit =
        offdiagonal_decay_fit(b, w, {&f1, &f2}, 400, 1e-8);
    CHECK(fit.ok);
    // Gaussian off-diagonal decay e^(-d^2 rho^2) beats every eps <= 1.
    CHECK(fit.eps_fit == doctest::Approx(1.0));
    CHECK(fit.n_pairs > 100);
    CHECK(fit.c_fit > 0.0);
}

TEST_CASE("unreliable evaluations are flagged, not silently returned") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 60);
    const OrthoBasis b(mt);
    // Far beyond the edge of a 60-term basis.
    const KernelValue kv = kernel(b, cdouble(4, 0), cdouble(4, 0), 1e-10);
    CHECK(!kv.reliable);
    CHECK(kv.trunc_ratio > 1e-10);
}
