#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "fockspec/config.hpp"

using namespace fockspec;
namespace fs = std::filesystem;

namespace {
fs::path write_tmp(const std::string& stem, const std::string& body) {
    const fs::path p = fs::temp_directory_path() / stem;
    std::ofstream out(p);
    out << body;
    return p;
}
}  // namespace

TEST_CASE("full config file round trip") {
    const fs::path p = write_tmp("fockspec_cfg_full.cfg",
                                 "# experiment\n"
                                 "weight.kind = radial_power\n"
                                 "weight.m = 4\n"
                                 "symbol.coeffs = 0, (0.5,0.25), 1\n"
                                 "truncation.n = 120\n"
                                 "p.grid = 2.5, 4, 5.5\n"
                                 "box = -2, -2, 2, 2\n"
                                 "source = (0.5,-0.5)\n"
                                 "grid.cap = 6\n"
                                 "rho.tol = 1e-9\n"
                                 "trunc.tol = 1e-7\n"
                                 "envelope.eps = 0.5\n"
                                 "radii = 1, 2, 4, 8\n"
                                 "out.dir = artifacts\n");
    const ExperimentConfig cfg = load_config(p.string());
    CHECK(cfg.weight.m() == doctest::Approx(4.0));
    REQUIRE(cfg.symbol_coeffs.size() == 3);
    CHECK(cfg.symbol_coeffs[1] == cdouble(0.5, 0.25));
    CHECK(cfg.N == 120);
    CHECK(cfg.p_grid == std::vector<double>{2.5, 4.0, 5.5});
    CHECK(cfg.box.x0 == -2.0);
    CHECK(cfg.box.y1 == 2.0);
    CHECK(cfg.source == cdouble(0.5, -0.5));
    CHECK(cfg.grid_cap == 6.0);
    CHECK(cfg.rho_tol == 1e-9);
    CHECK(cfg.trunc_tol == 1e-7);
    CHECK(cfg.envelope_eps == 0.5);
    CHECK(cfg.radii == std::vector<double>{1, 2, 4, 8});
    CHECK(cfg.out_dir == "artifacts");
    CHECK(cfg.config_hash.size() == 16);
    fs::remove(p);
}

TEST_CASE("config diagnostics carry line and key") {
    const fs::path p = write_tmp("fockspec_cfg_bad.cfg",
                                 "weight.m = 4\n"
                                 "no.such.key = 1\n");
    try {
        (void)load_config(p.string());
        FAIL("expected a diagnostic");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("no.such.key") != std::string::npos);
    }
    fs::remove(p);
    CHECK_THROWS_AS((void)load_config("/nonexistent/fockspec.cfg"),
                    DomainError);
}

TEST_CASE("environment overrides file and defaults") {
    setenv("FOCKSPEC_TRUNCATION_N", "64", 1);
    const ExperimentConfig cfg = default_config();
    CHECK(cfg.N == 64);
    unsetenv("FOCKSPEC_TRUNCATION_N");
    CHECK(default_config().N == 200);
}

TEST_CASE("config validation rejects bad values") {
    const fs::path a = write_tmp("fockspec_cfg_smalln.cfg",
                                 "truncation.n = 8\n");
    CHECK_THROWS_AS((void)load_config(a.string()), DomainError);
    fs::remove(a);
    const fs::path b = write_tmp("fockspec_cfg_unsorted.cfg",
                                 "p.grid = 5, 3, 4\n");
    CHECK_THROWS_AS((void)load_config(b.string()), DomainError);
    fs::remove(b);
}

TEST_CASE("canonical form and hash are stable") {
    ExperimentConfig cfg = default_config();
    const std::string c1 = canonical_config(cfg);
    CHECK(c1 == canonical_config(cfg));
    const std::string h = config_hash_of(cfg);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    cfg.N = 201;
    CHECK(config_hash_of(cfg) != h);
}

TEST_CASE("tabulated weight wiring") {
    std::string rows = "r,density\n";
    for (int i = 0; i <= 80; ++i) {
        const double r = 0.05 * i;
        rows += std::to_string(r) + "," + std::to_string(16.0 * r * r) + "\n";
    }
    const fs::path tab = write_tmp("fockspec_density.csv", rows);
    const fs::path p = write_tmp(
        "fockspec_cfg_tab.cfg",
        "weight.kind = tabulated\nweight.table = " + tab.string() + "\n");
    const ExperimentConfig cfg = load_config(p.string());
    CHECK(cfg.weight.kind() == WeightKind::TabulatedRadial);
    CHECK(cfg.weight.density(1.0) == doctest::Approx(16.0).epsilon(1e-6));
    fs::remove(p);
    fs::remove(tab);
}
