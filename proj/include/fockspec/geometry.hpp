#pragma once

#include <iosfwd>
#include <vector>

#include "fockspec/common.hpp"
#include "fockspec/weights.hpp"

namespace fockspec {

// Unit-mass radius: mu(D(z, rho(z))) = 1 within tol, safeguarded
// secant/bisection on the quadrature mass.
double rho(const WeightSpec& w, cdouble z, double tol = 1e-10);

// Radial rho(t) sampled once and served by monotone cubic interpolation;
// backs grid fills where a fraction of a percent is plenty.
class RadialRhoCache {
public:
    RadialRhoCache(const WeightSpec& w, double t_max, int n_nodes = 1024,
                   double tol = 1e-8);
    double operator()(double t) const;
    double t_max() const { return t_max_; }
    double min_value() const { return min_v_; }
    const WeightSpec& weight() const { return *w_; }

private:
    const WeightSpec* w_;
    double t_max_ = 0.0;
    double min_v_ = 0.0;
    std::vector<double> t_, v_, d_;
};

struct BoxSpec {
    double x0, y0, x1, y1;
};

// Geodesic distances for the rho^-2 metric on an 8-neighbor lattice,
// edge weight = Euclidean length * 2/(rho(a)+rho(b)). The lattice is
// anchored so the source is exactly a node.
class DistanceField {
public:
    DistanceField(const WeightSpec& w, const BoxSpec& box, cdouble source,
                  double cap_factor = 8.0,
                  const RadialRhoCache* cache = nullptr);

    double value(cdouble z) const;  // nearest node; out-of-box throws
    cdouble source() const { return source_; }
    double spacing() const { return h_; }
    const BoxSpec& box() const { return box_; }

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    cdouble node(int i, int j) const;
    double dist_at(int i, int j) const { return dist_[idx(i, j)]; }
    double rho_at(int i, int j) const { return rho_[idx(i, j)]; }

    void write_csv(std::ostream& os) const;  // "x,y,dist"

private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(j) * nx_ + i;
    }
    BoxSpec box_{};
    cdouble source_;
    double h_ = 0.0;
    double ox_ = 0.0, oy_ = 0.0;  // node (0,0) position
    int nx_ = 0, ny_ = 0;
    std::vector<double> rho_, dist_;
};

// Convenience wrapper: builds a padded field around the pair.
double bergman_distance(const WeightSpec& w, cdouble z, cdouble zeta,
                        double cap_factor = 8.0);

struct DoublingStats {
    double c_doubling = 0.0;  // sup mu(D(z,2r))/mu(D(z,r))
    double gamma_fit = 0.0;   // slope of log mass-ratio vs log radius-ratio
    int n_centers = 0;
    int n_radii = 0;
};
DoublingStats doubling_stats(const WeightSpec& w,
                             const std::vector<cdouble>& centers,
                             const std::vector<double>& radii);

double rho_comparability(const WeightSpec& w, double r_mult,
                         const std::vector<cdouble>& centers,
                         double tol = 1e-9);

struct GrowthFit {
    double slope = 0.0;
    double stderr_ = 0.0;
};
// Log-log slope of rho over [r_lo, r_hi]; range must span >= 2 decades.
GrowthFit growth_exponents(const WeightSpec& w, double r_lo, double r_hi,
                           int n_samples = 40);

struct EnvelopeFit {
    double c_near = 0.0;    // two-sided linear band constant inside D(z)
    double delta_fit = 0.0; // exponent passing both far-field bounds
    double c_far = 0.0;
    bool ok = false;
    cdouble witness_z, witness_zeta;
};
EnvelopeFit distance_envelope_check(const WeightSpec& w,
                                    const DistanceField& field,
                                    int max_targets = 4000);

// Metric-adapted polar cells around the origin restricted to the set
// reachable within d_max from center; Dijkstra on rings. Cell areas are
// Lebesgue; callers multiply by the density when integrating d-mu.
struct DecayCell {
    cdouble z;
    double area;
    double d;
};
class LocalDecayField {
public:
    LocalDecayField(const WeightSpec& w, const RadialRhoCache& cache,
                    cdouble center, double d_max, double res = 3.0);
    const std::vector<DecayCell>& cells() const { return cells_; }
    double d_max() const { return d_max_; }

private:
    std::vector<DecayCell> cells_;
    double d_max_ = 0.0;
};

struct DecayLadder {
    std::vector<double> thresholds;  // d-truncation levels
    std::vector<double> partials;    // integral up to each level
    double value = 0.0;              // final partial / rho(zeta)^k
    double rho_center = 0.0;
};
// int |z-zeta|^k exp(-d_phi(z,zeta)^eps) dmu(z) over {d <= d_max},
// normalized by rho(zeta)^k. Radial 1D route at zeta = 0, polar field
// otherwise; the d-truncation makes values at different zeta comparable.
DecayLadder integral_decay_check(const WeightSpec& w, cdouble zeta, int k,
                                 double eps, double d_max = 60.0,
                                 const RadialRhoCache* cache = nullptr);

}  // namespace fockspec
