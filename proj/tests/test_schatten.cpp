#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fockspec/hankel.hpp"
#include "fockspec/schatten.hpp"
#include "fockspec/weights.hpp"
#include "json.hpp"

using namespace fockspec;

namespace {
std::vector<double> partials_from_ratio(double r, int n) {
    std::vector<double> out;
    double term = 1.0, acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += term;
        out.push_back(acc);
        term *= r;
    }
    return out;
}
}  // namespace

TEST_CASE("ladder verdicts by increment ratio") {
    CHECK(ladder_verdict(partials_from_ratio(0.5, 6)).verdict ==
          Verdict::Converges);
    CHECK(ladder_verdict(partials_from_ratio(2.0, 6)).verdict ==
          Verdict::Diverges);
    CHECK(ladder_verdict(partials_from_ratio(1.0, 6)).verdict ==
          Verdict::Diverges);  // flat increments never settle
    // Gentle decay: stage one abstains, the implied tail exponent decides.
    const LadderFit gentle = ladder_verdict(partials_from_ratio(0.93, 8));
    CHECK(gentle.verdict == Verdict::Converges);
    CHECK(gentle.tau_hat == doctest::Approx(1.0 - std::log2(0.93)).epsilon(1e-9));
    // Too close to the harmonic edge to call.
    CHECK(ladder_verdict(partials_from_ratio(0.98, 8)).verdict ==
          Verdict::Inconclusive);
    // Degenerate ladders.
    const std::vector<double> two = {1.0, 1.5};
    CHECK(ladder_verdict(two).verdict == Verdict::Inconclusive);
    const std::vector<double> zeros(5, 0.0);
    CHECK(ladder_verdict(zeros).verdict == Verdict::Converges);
}

TEST_CASE("critical exponent arithmetic") {
    const CriticalExponent a = critical_exponent(4.0, 1);
    CHECK(a.kind == CriticalExponent::Kind::Threshold);
    CHECK(a.p_star == doctest::Approx(4.0));
    CHECK(critical_exponent(6.0, 1).p_star == doctest::Approx(3.0));
    CHECK(critical_exponent(6.0, 2).p_star == doctest::Approx(6.0));
    CHECK(critical_exponent(8.0, 1).p_star == doctest::Approx(8.0 / 3.0));

    const CriticalExponent never = critical_exponent(4.0, 2);
    CHECK(never.kind == CriticalExponent::Kind::Never);
    CHECK(std::isinf(never.p_star));
    CHECK(critical_exponent(2.0, 1).kind == CriticalExponent::Kind::Never);

    const CriticalExponent na = critical_exponent(4.0, 0);
    CHECK(na.kind == CriticalExponent::Kind::NotApplicable);
    CHECK(na.p_star == doctest::Approx(2.0));
}

TEST_CASE("decay fit recovers a synthetic power law") {
    HankelSpectrum sp;
    sp.weight_id = "synthetic";
    sp.symbol = "z";
    sp.symbol_degree = 1;
    sp.N = 400;
    sp.s.push_back(10.0);
    for (long n = 1; n <= 400; ++n)
        sp.s.push_back(3.0 * std::pow(n, -0.4));
    const DecayFit f = decay_fit(sp, 20, 200);
    CHECK(f.alpha == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(f.stderr_ < 1e-10);
    CHECK(f.n1 == 20);
    CHECK(f.n2 == 200);

    // Window guards: the truncation edge band and the two-octave floor.
    CHECK_THROWS_AS((void)decay_fit(sp, 20, 399), DomainError);
    CHECK_THROWS_AS((void)decay_fit(sp, 100, 150), DomainError);
}

TEST_CASE("partial schatten ladders on manufactured spectra") {
    HankelSpectrum flat;
    flat.N = 2000;
    flat.s.assign(2001, 1.0 / std::sqrt(2.0));
    CHECK(schatten_partial_norm(flat, 2.0).verdict == Verdict::Diverges);

    HankelSpectrum dec;
    dec.N = 2000;
    dec.s.push_back(2.0);
    for (long n = 1; n <= 2000; ++n) dec.s.push_back(1.0 / n);
    CHECK(schatten_partial_norm(dec, 2.0).verdict == Verdict::Converges);

    CHECK_THROWS_AS((void)schatten_partial_norm(flat, 0.0), DomainError);
    const SchattenPartial lad = schatten_partial_norm(flat, 2.0);
    CHECK(lad.ladder.partial.back() ==
          doctest::Approx(2001.0 * 0.5).epsilon(1e-12));
    std::ostringstream os;
    lad.ladder.write_csv(os);
    CHECK(os.str().substr(0, 15) == "R_or_N,partial\n");
}

TEST_CASE("criterion integral agrees with its exact branch") {
    std::vector<double> radii = {1, 2, 4, 8, 16, 32, 64};
    {
        const WeightSpec w = WeightSpec::radial_power(2.0);
        const CriterionResult cr =
            criterion_integral(w, SymbolPoly::monomial(1), 4.0, radii);
        CHECK(cr.exponent == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cr.exact_verdict == Verdict::Diverges);
        CHECK(cr.verdict == Verdict::Diverges);
        for (std::size_t i = 1; i < cr.ladder.partial.size(); ++i)
            CHECK(cr.ladder.partial[i] > cr.ladder.partial[i - 1]);
    }
    {
        const WeightSpec w = WeightSpec::radial_power(4.0);
        const CriterionResult cr =
            criterion_integral(w, SymbolPoly::monomial(1), 5.0, radii);
        CHECK(cr.exponent == doctest::Approx(-2.0).epsilon(1e-12));
        CHECK(cr.exact_verdict == Verdict::Converges);
        CHECK(cr.verdict == Verdict::Converges);
    }
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const std::vector<double> linear = {1, 2, 3, 4};
    CHECK_THROWS_AS((void)criterion_integral(w, SymbolPoly::monomial(1), 3.0,
                                             linear),
                    DomainError);
    const std::vector<double> short_radii = {1, 2, 4};
    CHECK_THROWS_AS((void)criterion_integral(w, SymbolPoly::monomial(1), 3.0,
                                             short_radii),
                    DomainError);
    CHECK_THROWS_AS((void)criterion_integral(w, SymbolPoly::monomial(1), 0.0,
                                             radii),
                    DomainError);
}

TEST_CASE("below the hilbert-schmidt line everything diverges") {
    // m = 2, d = 1 sits in the never-compact regime: criterion, spectrum,
    // and exponent arithmetic must all say DIVERGES at every p.
    const WeightSpec w = WeightSpec::radial_power(2.0);
    // N large enough that the partial-sum ladder has rungs to decide on.
    const MomentTable mt(w, 257);
    const HankelSpectrum sp = closed_form_spectrum(mt, 1, 256);
    const std::vector<double> grid = {3.0, 4.0};
    const SchattenReport rep =
        classify(w, SymbolPoly::monomial(1), grid, sp);
    CHECK(rep.p_star.kind == CriticalExponent::Kind::Never);
    CHECK(rep.hs_verdict == Verdict::Diverges);
    REQUIRE(rep.per_p.size() == 2);
    for (const PerPVerdict& v : rep.per_p) {
        CHECK(v.criterion == Verdict::Diverges);
        CHECK(v.spectral == Verdict::Diverges);
        CHECK(v.arithmetic == Verdict::Diverges);
        CHECK(v.verdict == Verdict::Diverges);
        CHECK(!v.near_threshold);
    }

    std::ostringstream os;
    rep.write_json(os);
    const nlohmann::json j = nlohmann::json::parse(os.str());
    CHECK(j.at("p_star").at("kind") == "NEVER");
    CHECK(j.at("per_p").size() == 2);
    CHECK(j.at("hs_verdict") == "DIVERGES");
    CHECK(j.contains("version"));
}

TEST_CASE("the threshold itself is exempt, not silenced") {
    const WeightSpec w = WeightSpec::radial_power(4.0);
    const MomentTable mt(w, 601);
    const HankelSpectrum sp = closed_form_spectrum(mt, 1, 600);
    const std::vector<double> grid = {4.0};  // exactly p*
    const SchattenReport rep =
        classify(w, SymbolPoly::monomial(1), grid, sp);
    CHECK(rep.p_star.p_star == doctest::Approx(4.0));
    REQUIRE(rep.per_p.size() == 1);
    CHECK(rep.per_p[0].near_threshold);
    CHECK(rep.per_p[0].verdict == Verdict::Diverges);
}

TEST_CASE("envelope ladder diverges for the flat weight") {
    const WeightSpec w = WeightSpec::radial_power(2.0);
    const std::vector<double> radii = {1, 2, 4, 8};
    const EnvelopeResult er = envelope_mixed_norm(w, 4.0, 1.0, radii);
    CHECK(er.exponent == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(er.exact_verdict == Verdict::Diverges);
    CHECK(er.verdict == Verdict::Diverges);
    CHECK(er.b_ladder.partial.size() == radii.size());
    for (std::size_t i = 1; i < radii.size(); ++i) {
        CHECK(er.b_ladder.partial[i] >= er.b_ladder.partial[i - 1]);
        CHECK(er.bstar_ladder.partial[i] >= er.bstar_ladder.partial[i - 1]);
    }
    CHECK(er.tail_frac >= 0.0);
    CHECK(er.d_max > 1.0);

    CHECK_THROWS_AS((void)envelope_mixed_norm(w, 2.0, 1.0, radii),
                    DomainError);
    CHECK_THROWS_AS((void)envelope_mixed_norm(w, 4.0, 1.5, radii),
                    DomainError);
}
