#pragma once

#include <string>
#include <vector>

#include "fockspec/common.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/weights.hpp"

namespace fockspec {

// Flat key = value config with one nested level: list values are comma
// separated. '#' starts a comment. Environment variables override file
// values: key a.b maps to FOCKSPEC_A_B.
struct ExperimentConfig {
    WeightSpec weight = WeightSpec::radial_power(2.0);
    std::vector<cdouble> symbol_coeffs{0.0, 1.0};
    long N = 200;
    std::vector<double> p_grid{3.0, 4.0, 5.0};
    BoxSpec box{-3.0, -3.0, 3.0, 3.0};
    cdouble source{0.0, 0.0};
    double grid_cap = 8.0;
    double rho_tol = 1e-10;
    double trunc_tol = 1e-8;
    double envelope_eps = 1.0;  // 0 selects the fitted kernel exponent
    std::vector<double> radii{1, 2, 4, 8, 16, 32, 64};
    std::string out_dir = ".";
    std::string config_hash;  // FNV-1a of the canonical key=value form
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig default_config();  // env overrides still apply

// Canonical serialization (sorted keys, g17 floats) and its hash.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash_of(const ExperimentConfig& cfg);

}  // namespace fockspec
