#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fockspec/geometry.hpp"
#include "fockspec/quadrature.hpp"
#include "fockspec/weights.hpp"

using namespace fockspec;

namespace {
const double kRhoFlat = 1.0 / (2.0 * std::sqrt(M_PI));
}

TEST_CASE("unit-mass radius closed forms") {
    const WeightSpec w2 = WeightSpec::radial_power(2.0);
    for (cdouble z : {cdouble(0, 0), cdouble(1, 0), cdouble(-2, 1.5)})
        CHECK(rho(w2, z, 1e-10) == doctest::Approx(kRhoFlat).epsilon(1e-9));

    const WeightSpec w4 = WeightSpec::radial_power(4.0);
    CHECK(rho(w4, cdouble(0, 0), 1e-10) ==
          doctest::Approx(std::pow(8.0 * M_PI, -0.25)).epsilon(1e-8));
    // Large-radius asymptote rho ~ 1/(m sqrt(pi) t^((m-2)/2)).
    const double t = 50.0;
    CHECK(rho(w4, cdouble(t, 0), 1e-10) ==
          doctest::Approx(1.0 / (4.0 * std::sqrt(M_PI) * t)).epsilon(2e-3));
}

TEST_CASE("rho shrinks outward and the cache tracks the solver") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const RadialRhoCache cache(w, 12.0, 512, 1e-8);
    double prev = 1e300;
    for (double t : {0.0, 0.4, 1.1, 2.7, 5.0, 9.5, 11.5}) {
        const double direct = rho(w, cdouble(t, 0), 1e-10);
        CHECK(cache(t) == doctest::Approx(direct).epsilon(2e-5));
        CHECK(direct < prev + 1e-12);
        prev = direct;
    }
    CHECK(cache.min_value() > 0.0);
}

TEST_CASE("flat geodesics are straight lines") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const BoxSpec box{-1.5, -1.5, 1.5, 1.5};
    const DistanceField field(w, box, cdouble(0, 0), 8.0);
    const double want = 2.0 * std::sqrt(M_PI);  // d(0, 1) = 1/rho

    const double dx = field.value(cdouble(1.0, 0.0));
    const double dy = field.value(cdouble(0.0, 1.0));
    CHECK(dx == doctest::Approx(want).epsilon(0.02));
    // The axes are interchangeable on the anchored lattice.
    CHECK(dx == doctest::Approx(dy).epsilon(1e-9));
    const double dd = field.value(cdouble(1.0, 1.0));
    CHECK(dd == doctest::Approx(want * std::sqrt(2.0)).epsilon(0.03));
    CHECK(field.dist_at(0, 0) >= 0.0);

    std::ostringstream os;
    field.write_csv(os);
    CHECK(os.str().substr(0, 9) == "x,y,dist\n");
}

TEST_CASE("grid refinement converges on an oblique target") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const BoxSpec box{-0.5, -0.5, 1.3, 0.5};
    const cdouble target(1.0, 0.3);  // direction off every grid axis
    const double exact = std::abs(target) / kRhoFlat;
    const double tol[] = {0.08, 0.04, 0.02};
    int k = 0;
    for (double cap : {3.0, 6.0, 12.0}) {
        const DistanceField f(w, box, cdouble(0, 0), cap);
        CHECK(std::abs(f.value(target) - exact) <= tol[k++] * exact);
    }
}

TEST_CASE("quartic radial distance matches the metric integral") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const RadialRhoCache cache(w, 3.0, 512, 1e-8);
    QuadOptions opt;
    opt.rel_tol = 1e-8;
    const double exact =
        integrate([&](double t) { return 1.0 / cache(t); }, 0.0, 2.0, opt)
            .value;
    const double got = bergman_distance(w, cdouble(0, 0), cdouble(2, 0), 8.0);
    CHECK(got / exact > 0.97);
    CHECK(got / exact < 1.09);
}

TEST_CASE("growth exponents recover (2-m)/2") {
    for (double m : {2.0, 4.0, 6.0}) {
        const WeightSpec w = WeightSpec::radial_power(m);
        const GrowthFit f = growth_exponents(w, 1.0, 100.0, 40);
        CHECK(std::abs(f.slope - (2.0 - m) / 2.0) < 0.03);
    }
    CHECK_THROWS_AS(
        (void)growth_exponents(WeightSpec::radial_power(2.0), 1.0, 5.0, 10),
        DomainError);
}

TEST_CASE("rho comparability within a unit-mass disc") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const std::vector<cdouble> centers = {{0, 0}, {1.5, 0}, {0, 4}};
    const double c = rho_comparability(w, 1.0, centers);
    CHECK(c >= 1.0);
    CHECK(c < 3.0);
}

TEST_CASE("local decay cells tile the metric ball in the flat case") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const RadialRhoCache cache(w, 12.0, 512, 1e-8);
    const LocalDecayField field(w, cache, cdouble(0, 0), 5.0, 3.0);
    double area = 0.0;
    double worst_gap = 0.0;
    for (const DecayCell& c : field.cells()) {
        CHECK(c.d <= 5.0 + 1e-12);
        area += c.area;
        // Flat metric: d is |z|/rho up to lattice slack.
        worst_gap = std::max(
            worst_gap, std::abs(c.d - std::abs(c.z) / kRhoFlat));
        (void)c;
    }
    const double ball = M_PI * std::pow(5.0 * kRhoFlat, 2.0);
    CHECK(area == doctest::Approx(ball).epsilon(0.08));
    CHECK(worst_gap < 0.35);
}

TEST_CASE("decay integral hits the flat closed form") {
    // int |z| e^(-|z|/rho) dmu / rho = 16 pi rho^2 = 4 for density 4.
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const DecayLadder lad = integral_decay_check(w, cdouble(0, 0), 1, 1.0, 60.0);
    CHECK(lad.value == doctest::Approx(4.0).epsilon(0.01));
    CHECK(lad.partials.size() == 4);
    CHECK(lad.partials[0] <= lad.partials[3] + 1e-12);
    // Truncation levels cover the tail: the last octave adds nearly nothing.
    CHECK(lad.partials[3] - lad.partials[2] <= 1e-6 * lad.partials[3]);

    // Off-center agrees by translation invariance of the flat metric.
    const DecayLadder off = integral_decay_check(w, cdouble(2, 1), 1, 1.0, 40.0);
    CHECK(off.value == doctest::Approx(4.0).epsilon(0.06));
}

TEST_CASE("envelope fit accepts the flat kernel decay") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const BoxSpec box{-2.0, -2.0, 2.0, 2.0};
    const DistanceField field(w, box, cdouble(0.5, 0), 6.0);
    const EnvelopeFit fit = distance_envelope_check(w, field, 2000);
    CHECK(fit.ok);
    CHECK(fit.c_near > 0.0);
    CHECK(fit.delta_fit > 0.0);
}
