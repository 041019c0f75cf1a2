// Experiment runner: every check is a subcommand, artifacts carry the
// config hash, identical config + version means byte-identical output.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fockspec/acceptance.hpp"
#include "fockspec/common.hpp"
#include "fockspec/config.hpp"
#include "fockspec/fock.hpp"
#include "fockspec/geometry.hpp"
#include "fockspec/hankel.hpp"
#include "fockspec/schatten.hpp"
#include "fockspec/weights.hpp"

namespace {

using namespace fockspec;

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) >= 0x20) out += c;
        }
    }
    return out;
}

std::ofstream open_artifact(const ExperimentConfig& cfg,
                            const std::string& name, bool preamble) {
    std::filesystem::create_directories(cfg.out_dir);
    const std::string path = cfg.out_dir + "/" + name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write artifact '" + path + "'");
    if (preamble)
        os << "# fockspec " << kVersion << " config=" << cfg.config_hash
           << "\n";
    return os;
}

SymbolPoly symbol_of(const ExperimentConfig& cfg) {
    return SymbolPoly(cfg.symbol_coeffs);
}

HankelSpectrum spectrum_of(const ExperimentConfig& cfg) {
    const SymbolPoly g = symbol_of(cfg);
    if (g.is_constant())
        throw DomainError("spectrum: symbol has no non-constant term");
    const MomentTable mt(cfg.weight, cfg.N + g.degree());
    const BandMatrix G = hankel_gram(mt, g, cfg.N);
    return singular_values(G, cfg.weight.id(), g.to_string(), g.degree());
}

void cmd_rho(const ExperimentConfig& cfg) {
    auto os = open_artifact(cfg, "rho.csv", true);
    os << "x,y,rho\n";
    const int n = 65;
    for (int j = 0; j < n; ++j) {
        const double y =
            cfg.box.y0 + (cfg.box.y1 - cfg.box.y0) * j / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double x =
                cfg.box.x0 + (cfg.box.x1 - cfg.box.x0) * i / (n - 1);
            const double r = rho(cfg.weight, cdouble(x, y), cfg.rho_tol);
            os << format_g17(x) << "," << format_g17(y) << ","
               << format_g17(r) << "\n";
        }
    }
}

void cmd_distance(const ExperimentConfig& cfg) {
    const DistanceField field(cfg.weight, cfg.box, cfg.source, cfg.grid_cap);
    auto os = open_artifact(cfg, "distance.csv", true);
    field.write_csv(os);
}

void cmd_kernel_check(const ExperimentConfig& cfg) {
    const MomentTable mt(cfg.weight, cfg.N);
    const OrthoBasis b(mt);

    std::vector<cdouble> samples;
    const int n = 9;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            samples.push_back(
                {cfg.box.x0 + (cfg.box.x1 - cfg.box.x0) * i / (n - 1),
                 cfg.box.y0 + (cfg.box.y1 - cfg.box.y0) * j / (n - 1)});

    const DiagStats ds =
        diagonal_estimate_check(b, cfg.weight, samples, cfg.trunc_tol);
    const NearDiagStats nd =
        near_diagonal_check(b, cfg.weight, 0.25, samples, cfg.trunc_tol);

    const DistanceField f1(cfg.weight, cfg.box, cfg.source, cfg.grid_cap);
    const cdouble second(cfg.box.x0 + 0.75 * (cfg.box.x1 - cfg.box.x0),
                         cfg.box.y0 + 0.75 * (cfg.box.y1 - cfg.box.y0));
    const DistanceField f2(cfg.weight, cfg.box, second, cfg.grid_cap);
    const OffdiagFit od = offdiagonal_decay_fit(
        b, cfg.weight, {&f1, &f2}, 600, cfg.trunc_tol);

    auto os = open_artifact(cfg, "kernel_check.json", false);
    os << "{\n";
    os << "  \"fockspec\": \"" << kVersion << "\",\n";
    os << "  \"config_hash\": \"" << cfg.config_hash << "\",\n";
    os << "  \"weight\": \"" << json_escape(cfg.weight.id()) << "\",\n";
    os << "  \"n_max\": " << b.n_max() << ",\n";
    os << "  \"diagonal\": {\"min_ratio\": " << format_g17(ds.min_ratio)
       << ", \"max_ratio\": " << format_g17(ds.max_ratio)
       << ", \"accepted\": " << ds.n_accepted
       << ", \"rejected\": " << ds.n_rejected << "},\n";
    os << "  \"near_diagonal\": {\"alpha\": 0.25, \"min_ratio\": "
       << format_g17(nd.min_ratio)
       << ", \"max_ratio\": " << format_g17(nd.max_ratio)
       << ", \"used\": " << nd.n_used << ", \"rejected\": " << nd.n_rejected
       << "},\n";
    os << "  \"offdiagonal\": {\"eps_fit\": " << format_g17(od.eps_fit)
       << ", \"c_fit\": " << format_g17(od.c_fit)
       << ", \"ok\": " << (od.ok ? "true" : "false")
       << ", \"n_pairs\": " << od.n_pairs << "}\n";
    os << "}\n";
}

void cmd_spectrum(const ExperimentConfig& cfg) {
    const HankelSpectrum sp = spectrum_of(cfg);
    auto os = open_artifact(cfg, "spectrum.csv", true);
    sp.write_csv(os);
}

void cmd_schatten(const ExperimentConfig& cfg) {
    const HankelSpectrum sp = spectrum_of(cfg);
    const SchattenReport rep =
        classify(cfg.weight, symbol_of(cfg), cfg.p_grid, sp);
    auto os = open_artifact(cfg, "schatten.json", false);
    os << "{\n";
    os << "  \"fockspec\": \"" << kVersion << "\",\n";
    os << "  \"config_hash\": \"" << cfg.config_hash << "\",\n";
    os << "  \"report\":\n";
    rep.write_json(os);
    os << "}\n";
}

void cmd_envelope(const ExperimentConfig& cfg) {
    double eps = cfg.envelope_eps;
    std::string eps_note = "pinned";
    if (eps == 0.0) {
        // Fit the kernel decay exponent and clamp it into (0.1, 1].
        const MomentTable mt(cfg.weight, cfg.N);
        const OrthoBasis b(mt);
        const DistanceField f1(cfg.weight, cfg.box, cfg.source,
                               cfg.grid_cap);
        const OffdiagFit od =
            offdiagonal_decay_fit(b, cfg.weight, {&f1}, 600, cfg.trunc_tol);
        eps = od.ok ? std::min(1.0, std::max(0.1, od.eps_fit)) : 1.0;
        eps_note = od.ok ? "fitted" : "fit failed, fallback";
    }

    auto os = open_artifact(cfg, "envelope.csv", true);
    os << "p,R,partial_b,partial_bstar\n";
    for (double p : cfg.p_grid) {
        if (!(p > 2.0)) {
            os << "# p=" << format_g17(p)
               << " skipped: mixed norm needs p > 2\n";
            continue;
        }
        const EnvelopeResult er =
            envelope_mixed_norm(cfg.weight, p, eps, cfg.radii);
        os << "# p=" << format_g17(p) << " eps=" << format_g17(er.eps) << " ("
           << eps_note << ") d_max=" << format_g17(er.d_max)
           << " verdict=" << to_string(er.verdict)
           << " b=" << to_string(er.verdict_b)
           << " bstar=" << to_string(er.verdict_bstar)
           << " tail_frac=" << format_g17(er.tail_frac) << "\n";
        for (std::size_t i = 0; i < er.b_ladder.x.size(); ++i)
            os << format_g17(p) << "," << format_g17(er.b_ladder.x[i]) << ","
               << format_g17(er.b_ladder.partial[i]) << ","
               << format_g17(er.bstar_ladder.partial[i]) << "\n";
    }
}

int cmd_verify() {
    const std::vector<AcceptanceItem> items = run_acceptance(std::cout);
    return all_passed(items) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Fock-space Hankel laboratory: weights, metric geometry, kernels, "
        "spectra, Schatten ladders"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_override;
    int threads = 0;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--out", out_override, "artifact directory override");
    app.add_option("--threads", threads,
                   "worker cap, 0 = default; results never depend on it")
        ->check(CLI::NonNegativeNumber);

    CLI::App* sub_rho =
        app.add_subcommand("rho", "unit-mass radius field over the box");
    CLI::App* sub_dist = app.add_subcommand(
        "distance", "geodesic distance field from the source");
    CLI::App* sub_kc = app.add_subcommand(
        "kernel-check", "diagonal / off-diagonal / near-diagonal reports");
    CLI::App* sub_spec =
        app.add_subcommand("spectrum", "Hankel singular values");
    CLI::App* sub_sch = app.add_subcommand(
        "schatten", "three-way Schatten classification report");
    CLI::App* sub_env = app.add_subcommand(
        "envelope", "mixed-norm partial ladders over doubling radii");
    CLI::App* sub_verify =
        app.add_subcommand("verify", "full acceptance suite, exit 0 iff green");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    ExperimentConfig cfg;
    try {
        cfg = config_path.empty() ? default_config()
                                  : load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        cfg.config_hash = config_hash_of(cfg);
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": {\"kind\": \"config\", \"message\": \""
                  << json_escape(e.what()) << "\"}}\n";
        return 2;
    }

    try {
        if (sub_verify->parsed()) return cmd_verify();
        if (sub_rho->parsed()) cmd_rho(cfg);
        if (sub_dist->parsed()) cmd_distance(cfg);
        if (sub_kc->parsed()) cmd_kernel_check(cfg);
        if (sub_spec->parsed()) cmd_spectrum(cfg);
        if (sub_sch->parsed()) cmd_schatten(cfg);
        if (sub_env->parsed()) cmd_envelope(cfg);
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": {\"kind\": \"module\", \"message\": \""
                  << json_escape(e.what()) << "\"}}\n";
        return 1;
    }
    return 0;
}
