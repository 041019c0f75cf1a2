#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fockspec/common.hpp"

namespace fockspec {

enum class WeightKind { RadialPower, TabulatedRadial };

struct DensityTable {
    std::vector<double> r;     // strictly increasing, r[0] == 0
    std::vector<double> dens;  // Laplacian values at r[i], >= 0
};

// Radial weight phi with measure mu = (Laplacian phi) dm. Convention is
// Laplacian = d2/dx2 + d2/dy2, so |z|^m has density m^2 r^(m-2).
// Tabulated densities are interpolated power-law per segment (log-log),
// with mass and phi integrated in closed form segment by segment.
class WeightSpec {
public:
    static WeightSpec radial_power(double m);
    static WeightSpec tabulated(DensityTable table);

    WeightKind kind() const { return kind_; }
    double m() const { return m_; }
    const std::string& id() const { return id_; }

    // Radial density at t >= 0; beyond the table the last segment's model
    // is continued (moment tails need it). Strict callers use table_rmax.
    double density(double t) const;

    // M(t) = mu(D(0,t)), exact per segment model.
    double mass(double t) const;

    // phi(t) with the same continuation rule as density.
    double phi_radial(double t) const;

    double table_rmax() const;  // +inf for RadialPower

private:
    WeightSpec() = default;

    struct Segment {
        double r0, r1;
        bool power;        // power model anchored at (r_anchor, d_anchor)
        double r_anchor, d_anchor, alpha;
        double lin_a, lin_b;  // dens = a + b t when !power
        double mass0, phi0;   // cumulative values at r0
    };
    double seg_mass_inc(const Segment& s, double t) const;
    double seg_phi_inc(const Segment& s, double t) const;
    const Segment& segment_for(double t) const;

    WeightKind kind_ = WeightKind::RadialPower;
    double m_ = 2.0;
    std::string id_;
    std::vector<Segment> segs_;     // tabulated only; last entry continues
    double rmax_ = 0.0;
};

// phi(z); strict out-of-domain error beyond a density table's range.
double eval_phi(const WeightSpec& w, cdouble z);

// mu(D(0,r)) by the closed-form mass function.
double disc_mass_centered(const WeightSpec& w, double r);

// mu(D(z,r)) by quadrature over circles about the origin: full circles
// below |r-d| plus the arc-overlap band. Independent of the closed form.
double disc_mass(const WeightSpec& w, cdouble z, double r,
                 double rel_tol = 1e-10);

// log I_n, I_n = int |z|^(2n) e^(-2 phi) dm. Exact log-Gamma for powers,
// peak-factored quadrature otherwise.
double log_moment(const WeightSpec& w, long n);

// Quadrature route for any weight kind; the cross-check oracle for powers.
double log_moment_quadrature(const WeightSpec& w, long n,
                             double rel_tol = 1e-12);

class MomentTable {
public:
    MomentTable(const WeightSpec& w, long n_max);

    long n_max() const { return static_cast<long>(log_I_.size()) - 1; }
    const std::string& weight_id() const { return weight_id_; }
    double log_I(long n) const;
    // I_hi / I_lo without leaving the representable range.
    double ratio(long n_hi, long n_lo) const;
    void write_csv(std::ostream& os) const;  // "n,log_moment"

private:
    std::string weight_id_;
    std::vector<double> log_I_;
};

}  // namespace fockspec
