#pragma once

#include <vector>

#include "fockspec/common.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/weights.hpp"

namespace fockspec {

// Monomial basis e_n = z^n / ||z^n||; norms live in the moment table.
class OrthoBasis {
public:
    explicit OrthoBasis(const MomentTable& mt) : mt_(&mt) {}

    long n_max() const { return mt_->n_max(); }
    const MomentTable& moments() const { return *mt_; }
    double log_norm(long n) const { return 0.5 * mt_->log_I(n); }
    cdouble eval(long n, cdouble z) const;

private:
    const MomentTable* mt_;
};

// Log-magnitude/phase kernel value; exp(2 phi) overflows doubles well
// inside ranges of interest, so the log form is the primary one.
struct KernelValue {
    double log_abs = 0.0;
    double arg = 0.0;
    double trunc_ratio = 0.0;  // |last retained term| / |sum|
    int terms = 0;
    bool reliable = false;
    cdouble value() const;
};

KernelValue kernel(const OrthoBasis& b, cdouble z, cdouble zeta,
                   double trunc_threshold = 1e-10);

// k_lambda = K(., lambda) / sqrt(K(lambda, lambda)); unreliable K(lambda,
// lambda) propagates into the flag.
KernelValue normalized_kernel(const OrthoBasis& b, cdouble lambda, cdouble z,
                              double trunc_threshold = 1e-10);

// Largest |z| whose term-peak index stays guard terms inside the basis.
double reliable_radius(const OrthoBasis& b, long guard = 40);

struct DiagStats {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    int n_accepted = 0;
    int n_rejected = 0;
    double worst_trunc = 0.0;  // largest truncation estimate among rejects
};
// K(z,z) rho^2 e^(-2 phi) over samples; out-of-reliable-region samples are
// rejected and counted with their truncation estimates.
DiagStats diagonal_estimate_check(const OrthoBasis& b, const WeightSpec& w,
                                  const std::vector<cdouble>& samples,
                                  double trunc_threshold = 1e-8);

struct OffdiagFit {
    double eps_fit = 0.0;
    double c_fit = 0.0;
    bool ok = false;
    cdouble witness_z, witness_zeta;
    int n_pairs = 0;
};
// Fits the largest eps in (0,1] with |K| <= c e^(phi+phi)/(rho rho)
// e^(-d^eps) across pairs (field source, sampled node). An eps passes when
// the required constant stops growing with d on the far half of the data.
OffdiagFit offdiagonal_decay_fit(const OrthoBasis& b, const WeightSpec& w,
                                 const std::vector<const DistanceField*>& fields,
                                 int targets_per_field = 600,
                                 double trunc_threshold = 1e-8);

struct NearDiagStats {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    int n_used = 0;
    int n_rejected = 0;
};
// |K(z,zeta)| / sqrt(K(z,z) K(zeta,zeta)) over pairs with
// |z - zeta| < alpha rho(z).
NearDiagStats near_diagonal_check(const OrthoBasis& b, const WeightSpec& w,
                                  double alpha,
                                  const std::vector<cdouble>& samples,
                                  double trunc_threshold = 1e-8);

}  // namespace fockspec
