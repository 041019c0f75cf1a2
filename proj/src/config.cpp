#include "fockspec/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace fockspec {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    const std::string last = trim(cur);
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw DomainError("config key '" + key + "': bad number '" + s + "'");
    return v;
}

// "1.5" or "(re,im)"
cdouble parse_complex(const std::string& s, const std::string& key) {
    if (!s.empty() && s.front() == '(') {
        if (s.back() != ')')
            throw DomainError("config key '" + key + "': unbalanced '(' in '" +
                              s + "'");
        const std::string body = s.substr(1, s.size() - 2);
        const auto parts = split_list(body);
        if (parts.size() != 2)
            throw DomainError("config key '" + key +
                              "': complex needs (re,im), got '" + s + "'");
        return {parse_double(parts[0], key), parse_double(parts[1], key)};
    }
    return {parse_double(s, key), 0.0};
}

std::string env_name(const std::string& key) {
    std::string out = "FOCKSPEC_";
    for (char c : key)
        out.push_back(c == '.' ? '_'
                               : static_cast<char>(std::toupper(
                                     static_cast<unsigned char>(c))));
    return out;
}

DensityTable load_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open density table '" + path + "'");
    DensityTable t;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string row = trim(line);
        if (row.empty() || row[0] == '#') continue;
        const auto cols = split_list(row);
        if (cols.size() != 2)
            throw DomainError("density table '" + path + "' line " +
                              std::to_string(lineno) + ": need 'r,density'");
        if (lineno == 1 && !std::isdigit(static_cast<unsigned char>(
                               cols[0].empty() ? 'x' : cols[0][0])) &&
            cols[0] != "0")
            continue;  // header row
        t.r.push_back(parse_double(cols[0], "weight.table"));
        t.dens.push_back(parse_double(cols[1], "weight.table"));
    }
    return t;
}

struct RawConfig {
    std::map<std::string, std::string> kv;
    std::map<std::string, long> line_of;
};

void apply_env(RawConfig& raw) {
    static const char* keys[] = {
        "weight.kind", "weight.m",        "weight.table", "symbol.coeffs",
        "truncation.n", "p.grid",         "box",          "source",
        "grid.cap",     "rho.tol",        "trunc.tol",    "envelope.eps",
        "radii",        "out.dir",
    };
    for (const char* k : keys) {
        const char* v = std::getenv(env_name(k).c_str());
        if (v) raw.kv[k] = trim(v);
    }
}

ExperimentConfig build(const RawConfig& raw) {
    ExperimentConfig cfg;
    auto context = [&](const std::string& key) {
        auto it = raw.line_of.find(key);
        return it == raw.line_of.end()
                   ? "config key '" + key + "'"
                   : "config line " + std::to_string(it->second) + ", key '" +
                         key + "'";
    };
    std::string kind = "radial_power", table_path;
    double m = 2.0;
    for (const auto& [key, val] : raw.kv) {
        if (key == "weight.kind") {
            kind = val;
        } else if (key == "weight.m") {
            m = parse_double(val, key);
        } else if (key == "weight.table") {
            table_path = val;
        } else if (key == "symbol.coeffs") {
            cfg.symbol_coeffs.clear();
            for (const auto& c : split_list(val))
                cfg.symbol_coeffs.push_back(parse_complex(c, key));
            if (cfg.symbol_coeffs.empty())
                throw DomainError(context(key) + ": empty coefficient list");
        } else if (key == "truncation.n") {
            cfg.N = static_cast<long>(parse_double(val, key));
        } else if (key == "p.grid") {
            cfg.p_grid.clear();
            for (const auto& c : split_list(val))
                cfg.p_grid.push_back(parse_double(c, key));
        } else if (key == "box") {
            const auto c = split_list(val);
            if (c.size() != 4)
                throw DomainError(context(key) + ": box needs x0,y0,x1,y1");
            cfg.box = {parse_double(c[0], key), parse_double(c[1], key),
                       parse_double(c[2], key), parse_double(c[3], key)};
        } else if (key == "source") {
            cfg.source = parse_complex(val, key);
        } else if (key == "grid.cap") {
            cfg.grid_cap = parse_double(val, key);
        } else if (key == "rho.tol") {
            cfg.rho_tol = parse_double(val, key);
        } else if (key == "trunc.tol") {
            cfg.trunc_tol = parse_double(val, key);
        } else if (key == "envelope.eps") {
            cfg.envelope_eps = parse_double(val, key);
        } else if (key == "radii") {
            cfg.radii.clear();
            for (const auto& c : split_list(val))
                cfg.radii.push_back(parse_double(c, key));
        } else if (key == "out.dir") {
            cfg.out_dir = val;
        } else {
            throw DomainError(context(key) + ": unknown key");
        }
    }

    if (kind == "radial_power") {
        cfg.weight = WeightSpec::radial_power(m);
    } else if (kind == "tabulated") {
        if (table_path.empty())
            throw DomainError("config: weight.kind=tabulated needs weight.table");
        cfg.weight = WeightSpec::tabulated(load_density_csv(table_path));
    } else {
        throw DomainError(context("weight.kind") + ": unknown kind '" + kind +
                          "' (radial_power or tabulated)");
    }

    if (cfg.N < 16) throw DomainError("config: truncation.n must be >= 16");
    if (!std::is_sorted(cfg.p_grid.begin(), cfg.p_grid.end()))
        throw DomainError("config: p.grid must be sorted ascending");
    if (!(cfg.rho_tol > 0) || !(cfg.trunc_tol > 0) || !(cfg.grid_cap > 0))
        throw DomainError("config: tolerances must be positive");
    if (!(cfg.box.x1 > cfg.box.x0) || !(cfg.box.y1 > cfg.box.y0))
        throw DomainError("config: box must have positive extent");
    cfg.config_hash = config_hash_of(cfg);
    return cfg;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config '" + path + "'");
    RawConfig raw;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string row = trim(line);
        if (row.empty()) continue;
        const auto eq = row.find('=');
        if (eq == std::string::npos)
            throw DomainError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        std::string key = trim(row.substr(0, eq));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
            return static_cast<char>(std::tolower(c));
        });
        if (key.empty())
            throw DomainError("config line " + std::to_string(lineno) +
                              ": empty key");
        raw.kv[key] = trim(row.substr(eq + 1));
        raw.line_of[key] = lineno;
    }
    apply_env(raw);
    return build(raw);
}

ExperimentConfig default_config() {
    RawConfig raw;
    apply_env(raw);
    return build(raw);
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "box = " << format_g17(cfg.box.x0) << ", " << format_g17(cfg.box.y0)
       << ", " << format_g17(cfg.box.x1) << ", " << format_g17(cfg.box.y1)
       << "\n";
    os << "envelope.eps = " << format_g17(cfg.envelope_eps) << "\n";
    os << "grid.cap = " << format_g17(cfg.grid_cap) << "\n";
    os << "p.grid = ";
    for (std::size_t i = 0; i < cfg.p_grid.size(); ++i)
        os << (i ? ", " : "") << format_g17(cfg.p_grid[i]);
    os << "\n";
    os << "radii = ";
    for (std::size_t i = 0; i < cfg.radii.size(); ++i)
        os << (i ? ", " : "") << format_g17(cfg.radii[i]);
    os << "\n";
    os << "rho.tol = " << format_g17(cfg.rho_tol) << "\n";
    os << "source = (" << format_g17(cfg.source.real()) << ","
       << format_g17(cfg.source.imag()) << ")\n";
    os << "symbol.coeffs = ";
    for (std::size_t i = 0; i < cfg.symbol_coeffs.size(); ++i)
        os << (i ? ", " : "") << "(" << format_g17(cfg.symbol_coeffs[i].real())
           << "," << format_g17(cfg.symbol_coeffs[i].imag()) << ")";
    os << "\n";
    os << "trunc.tol = " << format_g17(cfg.trunc_tol) << "\n";
    os << "truncation.n = " << cfg.N << "\n";
    os << "weight.id = " << cfg.weight.id() << "\n";
    return os.str();
}

std::string config_hash_of(const ExperimentConfig& cfg) {
    const std::string s = canonical_config(cfg);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace fockspec
