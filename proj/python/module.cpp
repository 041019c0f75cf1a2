#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fockspec/common.hpp"
#include "fockspec/fock.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/hankel.hpp"
#include "fockspec/schatten.hpp"
#include "fockspec/weights.hpp"

namespace py = pybind11;
using namespace fockspec;

namespace {

SymbolPoly poly_of(const std::vector<cdouble>& coeffs) {
    return SymbolPoly(coeffs);
}

HankelSpectrum spectrum_of(const WeightSpec& w,
                           const std::vector<cdouble>& coeffs, long N) {
    const SymbolPoly g = poly_of(coeffs);
    const MomentTable mt(w, N + std::max<long>(g.degree(), 1) + 1);
    // Monomials have a closed spectrum; anything else goes through the
    // banded eigensolver.
    long nonzero = 0, k = 0;
    for (long d = 1; d <= g.degree(); ++d)
        if (g.coeff(d) != 0.0) {
            ++nonzero;
            k = d;
        }
    if (nonzero == 1 && g.coeff(0) == 0.0 && g.coeff(k) == cdouble(1.0, 0.0))
        return closed_form_spectrum(mt, k, N);
    return singular_values(hankel_gram(mt, g, N), w.id(), g.to_string(),
                           g.degree());
}

}  // namespace

PYBIND11_MODULE(_fockspec, mod) {
    mod.doc() = "Fock space Hankel operator laboratory";
    mod.attr("__version__") = kVersion;

    py::class_<WeightSpec>(mod, "Weight")
        .def_static("radial_power", &WeightSpec::radial_power, py::arg("m"))
        .def_property_readonly("m", &WeightSpec::m)
        .def_property_readonly("id", &WeightSpec::id)
        .def("density", &WeightSpec::density, py::arg("t"))
        .def("phi", &WeightSpec::phi_radial, py::arg("t"))
        .def("__repr__",
             [](const WeightSpec& w) { return "<Weight " + w.id() + ">"; });

    mod.def(
        "rho", [](const WeightSpec& w, cdouble z) { return rho(w, z); },
        py::arg("weight"), py::arg("z"),
        "Radius at which the weight measure of the disc reaches one");

    mod.def(
        "log_moment",
        [](const WeightSpec& w, long n) { return log_moment(w, n); },
        py::arg("weight"), py::arg("n"));

    mod.def(
        "distance",
        [](const WeightSpec& w, cdouble z, cdouble zeta, double cap) {
            return bergman_distance(w, z, zeta, cap);
        },
        py::arg("weight"), py::arg("z"), py::arg("zeta"),
        py::arg("grid_cap") = 8.0);

    mod.def(
        "rho_growth_slope",
        [](const WeightSpec& w, double r_lo, double r_hi, int n) {
            return growth_exponents(w, r_lo, r_hi, n).slope;
        },
        py::arg("weight"), py::arg("r_lo"), py::arg("r_hi"),
        py::arg("n_samples") = 40);

    mod.def(
        "kernel",
        [](const WeightSpec& w, long n_max, cdouble z, cdouble zeta) {
            const MomentTable mt(w, n_max);
            const OrthoBasis b(mt);
            const KernelValue kv = kernel(b, z, zeta);
            return py::make_tuple(kv.value(), kv.reliable);
        },
        py::arg("weight"), py::arg("n_max"), py::arg("z"), py::arg("zeta"),
        "Truncated reproducing kernel value and its reliability flag");

    mod.def(
        "spectrum",
        [](const WeightSpec& w, const std::vector<cdouble>& coeffs, long N) {
            return spectrum_of(w, coeffs, N).s;
        },
        py::arg("weight"), py::arg("coeffs"), py::arg("N"),
        "Singular values of the Hankel operator with anti-analytic "
        "polynomial symbol, truncated at degree N");

    mod.def(
        "decay_fit",
        [](const std::vector<double>& s, long degree, long n1, long n2) {
            HankelSpectrum sp;
            sp.s = s;
            sp.N = static_cast<long>(s.size()) - 1;
            sp.symbol_degree = degree;
            const DecayFit f = decay_fit(sp, n1, n2);
            return py::make_tuple(f.alpha, f.stderr_);
        },
        py::arg("singular_values"), py::arg("symbol_degree"), py::arg("n1"),
        py::arg("n2"));

    mod.def(
        "critical_exponent",
        [](double m, long d) {
            const CriticalExponent ce = critical_exponent(m, d);
            const char* kind = "THRESHOLD";
            if (ce.kind == CriticalExponent::Kind::NotApplicable)
                kind = "NOT_APPLICABLE";
            if (ce.kind == CriticalExponent::Kind::Never) kind = "NEVER";
            return py::make_tuple(ce.p_star, std::string(kind));
        },
        py::arg("m"), py::arg("d"));

    mod.def(
        "schatten_partial",
        [](const std::vector<double>& s, double p) {
            HankelSpectrum sp;
            sp.s = s;
            sp.N = static_cast<long>(s.size()) - 1;
            return std::string(to_string(schatten_partial_norm(sp, p).verdict));
        },
        py::arg("singular_values"), py::arg("p"));

    mod.def(
        "criterion_verdict",
        [](const WeightSpec& w, const std::vector<cdouble>& coeffs, double p,
           const std::vector<double>& radii) {
            const CriterionResult cr =
                criterion_integral(w, poly_of(coeffs), p, radii);
            return py::make_tuple(std::string(to_string(cr.verdict)),
                                  cr.exponent);
        },
        py::arg("weight"), py::arg("coeffs"), py::arg("p"), py::arg("radii"));

    mod.def(
        "envelope_verdict",
        [](const WeightSpec& w, double p, double eps,
           const std::vector<double>& radii) {
            const EnvelopeResult er = envelope_mixed_norm(w, p, eps, radii);
            return py::make_tuple(std::string(to_string(er.verdict)),
                                  er.exponent);
        },
        py::arg("weight"), py::arg("p"), py::arg("eps"), py::arg("radii"));

    mod.def(
        "classify_json",
        [](const WeightSpec& w, const std::vector<cdouble>& coeffs,
           const std::vector<double>& p_grid, long N) {
            const HankelSpectrum sp = spectrum_of(w, coeffs, N);
            const SchattenReport rep =
                classify(w, poly_of(coeffs), p_grid, sp);
            std::ostringstream os;
            rep.write_json(os);
            return os.str();
        },
        py::arg("weight"), py::arg("coeffs"), py::arg("p_grid"), py::arg("N"),
        "Full Schatten membership report as a JSON string");

    py::register_exception<Error>(mod, "FockspecError");
}
