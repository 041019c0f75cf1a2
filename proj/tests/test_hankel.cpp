#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "fockspec/fock.hpp"
#include "fockspec/hankel.hpp"
#include "fockspec/weights.hpp"

using namespace fockspec;

TEST_CASE("symbol polynomial drops the constant and keeps derivatives") {
    const SymbolPoly g({cdouble(7, 0), cdouble(3, 0), cdouble(1, 0)});
    CHECK(g.degree() == 2);
    CHECK(std::abs(g.coeff(0)) == 0.0);
    CHECK(std::abs(g.coeff(1) - cdouble(3, 0)) < 1e-15);
    CHECK(!g.is_constant());
    CHECK(!g.is_monomial());

    const SymbolPoly dg = g.derivative();
    CHECK(std::abs(dg.eval(cdouble(1, 0)) - cdouble(5, 0)) < 1e-14);

    const SymbolPoly z2 = SymbolPoly::monomial(2);
    CHECK(z2.is_monomial());
    CHECK(z2.to_string() == "z^2");
    CHECK(SymbolPoly(std::vector<cdouble>{}).is_constant());
}

TEST_CASE("gaussian monomial gram is the half-identity") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 61);
    const BandMatrix G = hankel_gram(mt, SymbolPoly::monomial(1), 60);
    CHECK(G.n == 61);
    CHECK(G.bw == 0);
    // Log-space moments round at ~1e-16 * lgamma(n), so the entry error
    // grows linearly in n; 2.9e-12 is the observed worst case at n = 60.
    for (long n = 0; n <= 60; ++n)
        CHECK(std::abs(G.at(n, n) - cdouble(0.5, 0)) < 1e-13 * (n + 10.0));
}

TEST_CASE("gram entries are hermitian across the band") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 42);
    const SymbolPoly g({cdouble(0, 0), cdouble(1, 0), cdouble(0.5, 0.25)});
    const BandMatrix G = hankel_gram(mt, g, 40);
    CHECK(G.bw == 1);
    for (long j = 0; j <= 40; ++j)
        for (long k = std::max<long>(0, j - 1);
             k <= std::min<long>(40, j + 1); ++k) {
            const cdouble a = G.at(j, k);
            const cdouble b = std::conj(G.at(k, j));
            CHECK(std::abs(a - b) <= 1e-14 * (1.0 + std::abs(a)));
        }
}

TEST_CASE("quadratic gaussian symbol spectrum by hand") {
    // m=2, g=z^2: s_n^2 = (I_{n+2}/I_n) - (I_n/I_{n-2}) = (4n+2)/4 for
    // n >= 2, with s_0^2 = 1/2, s_1^2 = 3/2 from the projection-free head.
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 82);
    const HankelSpectrum sp = closed_form_spectrum(mt, 2, 80);
    std::vector<double> want;
    want.push_back(std::sqrt(0.5));
    want.push_back(std::sqrt(1.5));
    for (long n = 2; n <= 80; ++n)
        want.push_back(std::sqrt((4.0 * n + 2.0) / 4.0));
    std::sort(want.begin(), want.end(), std::greater<double>());
    REQUIRE(sp.s.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(sp.s[i] == doctest::Approx(want[i]).epsilon(1e-11));
}

TEST_CASE("banded eigensolver matches a dense eigen oracle") {
    const WeightSpec w = WeightSpec::radial_power(6.0);
    const long N = 100;
    const MomentTable mt(w, N + 2);
    const SymbolPoly g({cdouble(0, 0), cdouble(0.7, 0.2), cdouble(1, 0)});
    const BandMatrix G = hankel_gram(mt, g, N);

    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(N + 1, N + 1);
    for (long j = 0; j <= N; ++j)
        for (long k = std::max<long>(0, j - G.bw);
             k <= std::min(N, j + G.bw); ++k)
            dense(j, k) = G.at(j, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
    REQUIRE(es.info() == Eigen::Success);
    std::vector<double> oracle;
    for (long i = 0; i <= N; ++i)
        oracle.push_back(std::sqrt(std::max(0.0, es.eigenvalues()[i])));
    std::sort(oracle.begin(), oracle.end(), std::greater<double>());

    const HankelSpectrum sp = singular_values(G, mt.weight_id(), "test", 2);
    REQUIRE(sp.s.size() == oracle.size());
    const double scale = oracle[0];
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(std::abs(sp.s[i] - oracle[i]) <= 1e-11 * scale);
}

TEST_CASE("eigensolver route reproduces the closed form for monomials") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 151);
    const HankelSpectrum cf = closed_form_spectrum(mt, 1, 150);
    const BandMatrix G = hankel_gram(mt, SymbolPoly::monomial(1), 150);
    const HankelSpectrum eig = singular_values(G, mt.weight_id(), "z", 1);
    REQUIRE(cf.s.size() == eig.s.size());
    for (std::size_t i = 0; i < cf.s.size(); ++i)
        CHECK(eig.s[i] == doctest::Approx(cf.s[i]).epsilon(1e-10));
    CHECK(eig.method == "eigensolver");
    CHECK(cf.method == "closed_form");
    CHECK(eig.symbol_degree == 1);
}

TEST_CASE("spectra stabilize under truncation refinement") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const SymbolPoly g({cdouble(0, 0), cdouble(1, 0), cdouble(0.3, 0)});
    const MomentTable mt(w, 244);
    const BandMatrix G120 = hankel_gram(mt, g, 120);
    const BandMatrix G240 = hankel_gram(mt, g, 240);
    const HankelSpectrum a = singular_values(G120, mt.weight_id(), "g", 2);
    const HankelSpectrum b = singular_values(G240, mt.weight_id(), "g", 2);
    for (int i = 0; i < 20; ++i)
        CHECK(a.s[i] == doctest::Approx(b.s[i]).epsilon(1e-6));
}

TEST_CASE("growth indicator separates bounded from unbounded symbols") {
    const WeightSpec w2 = WeightSpec::radial_power(2.0);
    const GrowthIndicator flat =
        symbol_growth_indicator(w2, SymbolPoly::monomial(1), 1.0, 100.0);
    CHECK(flat.bounded);
    CHECK(!flat.compact);
    CHECK(std::abs(flat.exponent) < 0.05);

    const GrowthIndicator quad =
        symbol_growth_indicator(w2, SymbolPoly::monomial(2), 1.0, 100.0);
    CHECK(!quad.bounded);
    CHECK(quad.exponent > 0.9);

    const WeightSpec w4 = WeightSpec::radial_power(4.0);
    const GrowthIndicator dec =
        symbol_growth_indicator(w4, SymbolPoly::monomial(1), 1.0, 100.0);
    CHECK(dec.compact);
    CHECK(dec.exponent < -0.9);
}

TEST_CASE("kernel image identity in the gaussian model") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 200);
    const OrthoBasis b(mt);
    const std::vector<cdouble> samples = {
        {0, 0}, {0.8, 0.3}, {-1.2, 0.5}, {0, -1.5}, {2, 0}};
    const double resid =
        kernel_image_check(b, w, SymbolPoly::monomial(1), cdouble(1, 0),
                           samples);
    CHECK(resid <= 1e-8);
}

TEST_CASE("linear symbols make the dbar difference exact") {
    // For g = z and f = e_0 the homogeneous part is linear in conj(z), so
    // the centered difference has no truncation error at all; only the
    // cubic test function exposes the second-order collapse.
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 30);
    const OrthoBasis b(mt);
    const std::vector<cdouble> f = {1.0};
    const double r =
        dbar_residual(b, SymbolPoly::monomial(1), f, cdouble(0.5, 0.2), 1e-3);
    CHECK(r <= 1e-10);
}

TEST_CASE("flat toeplitz trace bound collapses to equality") {
    // |g'|^2 rho^2 is the constant 1/(4 pi): both sides equal
    // (N+1) (4 pi)^{-p/2}, so the inequality is tight here.
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 64);
    const OrthoBasis b(mt);
    const TraceBound tb =
        toeplitz_trace_bound(b, w, SymbolPoly::monomial(1), 4.0, 60);
    const double want = 61.0 / (16.0 * M_PI * M_PI);
    CHECK(tb.trace_sum == doctest::Approx(want).epsilon(1e-4));
    CHECK(tb.integral_bound ==
          doctest::Approx(tb.trace_sum).epsilon(1e-4));
    CHECK(tb.holds);
}

TEST_CASE("spectral integral inequality in the flat model") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 300);
    const OrthoBasis b(mt);
    const HankelSpectrum sp = closed_form_spectrum(mt, 1, 298);
    const SpineqResult sq =
        spineq_check(b, w, sp, SymbolPoly::monomial(1), 4.0, 3.0);
    // lhs = (1/4) area / rho^2 = 9 pi^2; rhs = 299/4.
    CHECK(sq.rhs == doctest::Approx(299.0 / 4.0).epsilon(1e-9));
    CHECK(sq.lhs == doctest::Approx(9.0 * M_PI * M_PI).epsilon(0.01));
    CHECK(sq.ratio < 2.0);
    CHECK(sq.ratio > 1.0);
}

TEST_CASE("spectrum csv carries the header and sorted values") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const MomentTable mt(w, 21);
    const HankelSpectrum sp = closed_form_spectrum(mt, 1, 20);
    std::ostringstream os;
    sp.write_csv(os);
    const std::string text = os.str();
    CHECK(text.substr(0, 6) == "n,s_n\n");
    CHECK(std::count(text.begin(), text.end(), '\n') == 22);
    CHECK(std::is_sorted(sp.s.begin(), sp.s.end(), std::greater<double>()));
}
