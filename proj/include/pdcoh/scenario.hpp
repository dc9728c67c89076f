#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdcoh/common.hpp"
#include "pdcoh/csd.hpp"
#include "pdcoh/detection.hpp"
#include "pdcoh/entanglement.hpp"
#include "pdcoh/oracle.hpp"

namespace pdcoh {

enum class RunKind { franson_scan, hom_scan, bound_sweep, factorization_check, wk_validate };

// Flat "key = value" scenario description. Every run is fully determined by
// the config plus the seed; unknown keys are rejected.
class ScenarioConfig {
public:
    static ScenarioConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static ScenarioConfig parse(const std::string& text) {
        ScenarioConfig c;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            auto eq = s.find('=');
            if (eq == std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = trim(s.substr(0, eq));
            std::string val = trim(s.substr(eq + 1));
            if (key.empty() || val.empty())
                throw config_error("line " + std::to_string(lineno) + ": empty key or value");
            if (c.values_.count(key))
                throw config_error("duplicate key: " + key);
            c.values_[key] = val;
        }
        c.validate_keys();
        return c;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

    RunKind run_kind() const {
        std::string k = get("run");
        if (k == "franson-scan") return RunKind::franson_scan;
        if (k == "hom-scan") return RunKind::hom_scan;
        if (k == "bound-sweep") return RunKind::bound_sweep;
        if (k == "factorization-check") return RunKind::factorization_check;
        if (k == "wk-validate") return RunKind::wk_validate;
        throw config_error("unknown run kind: " + k);
    }

    std::string get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw config_error("missing required key: " + key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double get_num(const std::string& key) const { return to_num(key, get(key)); }
    double num_or(const std::string& key, double dflt) const {
        return has(key) ? get_num(key) : dflt;
    }
    int get_int(const std::string& key) const {
        double v = get_num(key);
        int i = static_cast<int>(v);
        if (i != v) throw config_error(key + ": expected an integer");
        return i;
    }
    int int_or(const std::string& key, int dflt) const {
        return has(key) ? get_int(key) : dflt;
    }

    // "inf" or a positive number
    std::optional<double> get_window(const std::string& key) const {
        std::string v = get_or(key, "inf");
        if (v == "inf") return std::nullopt;
        return to_num(key, v);
    }

    std::vector<double> get_list(const std::string& key) const {
        std::vector<double> out;
        std::istringstream ss(get(key));
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(to_num(key, trim(tok)));
        if (out.empty()) throw config_error(key + ": empty list");
        return out;
    }

    // --- assembled model pieces -------------------------------------------

    CrossSpectralDensity pump() const {
        std::string kind = get("pump.kind");
        if (kind == "file") return CrossSpectralDensity::load(get("pump.file"));
        if (kind != "gsm") throw config_error("pump.kind must be 'gsm' or 'file'");
        GaussianSchellModel m;
        m.amplitude = num_or("pump.amplitude", 1.0);
        m.bandwidth = get_num("pump.bandwidth");
        std::string cw = get("pump.corr_width");
        m.corr_width = cw == "inf" ? std::nullopt : std::optional<double>(to_num("pump.corr_width", cw));
        m.center = get_num("pump.center");
        m.validate();
        if (!has("grid.points") && !has("grid.span")) return CrossSpectralDensity::from_model(m);
        int n = int_or("grid.points", 257);
        FrequencyGrid g = has("grid.span") ? FrequencyGrid(m.center, get_num("grid.span"), n)
                                           : m.default_grid(n);
        return CrossSpectralDensity::tabulate(m, g);
    }

    SpectralResponse response(double pump_center) const {
        AlternativeResponse ar;
        std::string pm = get_or("response.phase_matching", "unity");
        if (pm == "gaussian") ar.phase_matching = {PhaseMatching::Model::gaussian, get_num("response.pm_width")};
        else if (pm == "sinc") ar.phase_matching = {PhaseMatching::Model::sinc, get_num("response.pm_width")};
        else if (pm != "unity") throw config_error("response.phase_matching: unknown model " + pm);
        ar.filter_s = parse_filter("response.filter_s");
        ar.filter_i = parse_filter("response.filter_i");
        std::optional<PhaseScreen> screen;
        if (get_or("response.screen", "off") == "on") {
            PhaseScreen ps;
            ps.sigma = num_or("response.screen_sigma", 1.0);
            ps.corr_width = num_or("response.screen_corr_width", 1.0);
            ps.draws = int_or("response.screen_draws", 64);
            ps.seed = static_cast<std::uint64_t>(int_or("response.screen_seed", 1));
            screen = ps;
        }
        return SpectralResponse::symmetric(ar, get_num("response.signal_center"),
                                           get_num("response.idler_center"), pump_center,
                                           screen);
    }

    PathwayPair pathways() const {
        PathwayPair p;
        p.alt1 = {num_or("paths.tau_p1", 0), num_or("paths.tau_s1", 0), num_or("paths.tau_i1", 0),
                  num_or("paths.phi_p1", 0), num_or("paths.phi_s1", 0), num_or("paths.phi_i1", 0)};
        p.alt2 = {num_or("paths.tau_p2", 0), num_or("paths.tau_s2", 0), num_or("paths.tau_i2", 0),
                  num_or("paths.phi_p2", 0), num_or("paths.phi_s2", 0), num_or("paths.phi_i2", 0)};
        return p;
    }

    CouplingAmplitudes couplings() const {
        return {num_or("couplings.ks1", 1), num_or("couplings.ki1", 1),
                num_or("couplings.ks2", 1), num_or("couplings.ki2", 1)};
    }

    AveragingWindows windows() const {
        return {get_window("windows.t_pc"), get_window("windows.t_ci")};
    }

    FrequencyGrid d_grid(const SpectralResponse& resp) const {
        int n = int_or("dgrid.points", 129);
        if (has("dgrid.span"))
            return FrequencyGrid(resp.difference_center(), get_num("dgrid.span"), n);
        return resp.default_d_grid(n);
    }

private:
    static std::string trim(const std::string& s) {
        auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    static double to_num(const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw config_error("");
            if (!std::isfinite(d)) throw config_error("");
            return d;
        } catch (...) {
            throw config_error(key + ": not a finite number: '" + v + "'");
        }
    }

    Filter parse_filter(const std::string& prefix) const {
        std::string m = get_or(prefix, "unity");
        if (m == "gaussian") return {Filter::Model::gaussian, get_num(prefix + "_width")};
        if (m == "tophat") return {Filter::Model::tophat, get_num(prefix + "_width")};
        if (m != "unity") throw config_error(prefix + ": unknown model " + m);
        return {};
    }

    void validate_keys() const {
        static const std::set<std::string> known = {
            "run", "seed", "out", "threads",
            "pump.kind", "pump.file", "pump.amplitude", "pump.bandwidth",
            "pump.corr_width", "pump.center",
            "grid.points", "grid.span",
            "response.phase_matching", "response.pm_width",
            "response.filter_s", "response.filter_s_width",
            "response.filter_i", "response.filter_i_width",
            "response.signal_center", "response.idler_center",
            "response.screen", "response.screen_sigma", "response.screen_corr_width",
            "response.screen_draws", "response.screen_seed",
            "paths.tau_p1", "paths.tau_s1", "paths.tau_i1",
            "paths.phi_p1", "paths.phi_s1", "paths.phi_i1",
            "paths.tau_p2", "paths.tau_s2", "paths.tau_i2",
            "paths.phi_p2", "paths.phi_s2", "paths.phi_i2",
            "couplings.ks1", "couplings.ki1", "couplings.ks2", "couplings.ki2",
            "windows.t_pc", "windows.t_ci",
            "dgrid.points", "dgrid.span",
            "sweep.min", "sweep.max", "sweep.points",
            "fact.count", "fact.tbars", "fact.ttils",
            "wkv.t_min", "wkv.t_max", "wkv.points",
        };
        for (const auto& [k, v] : values_)
            if (!known.count(k)) throw config_error("unknown config key: " + k);
    }

    std::map<std::string, std::string> values_;
};

struct RunReport {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> config_echo;
    double wall_time_ms = 0.0;
};

namespace detail {

inline std::string format17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void write_report(const RunReport& report, const std::string& out_path) {
    std::ostringstream csv;
    for (size_t i = 0; i < report.columns.size(); ++i)
        csv << (i ? "," : "") << report.columns[i];
    csv << "\n";
    for (const auto& row : report.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            csv << (i ? "," : "") << format17(row[i]);
        csv << "\n";
    }
    write_atomic(out_path, csv.str());

    nlohmann::json meta;
    meta["config"] = report.config_echo;
    meta["columns"] = report.columns;
    meta["rows"] = report.rows.size();
    meta["warnings"] = report.warnings;
    meta["wall_time_ms"] = report.wall_time_ms;
    write_atomic(out_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace detail

// Executes a scenario and writes the result table plus its metadata sidecar.
inline RunReport run(const ScenarioConfig& cfg, std::optional<std::string> out_override = {},
                     std::optional<std::uint64_t> seed_override = {},
                     std::optional<int> threads_override = {}) {
    auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.config_echo = cfg.values();

    std::uint64_t seed = seed_override
                             ? *seed_override
                             : static_cast<std::uint64_t>(cfg.int_or("seed", 1));
    int threads = threads_override ? *threads_override : cfg.int_or("threads", 0);
    if (threads == 0) {
        if (const char* env = std::getenv("PDCOH_THREADS")) threads = std::atoi(env);
    }
    RunKind kind = cfg.run_kind();

    auto warn_if = [&](bool w, const std::string& msg) {
        if (w) report.warnings.push_back(msg);
    };

    if (kind == RunKind::wk_validate) {
        CrossSpectralDensity pump = cfg.pump();
        if (!pump.is_gsm() && !cfg.has("pump.bandwidth"))
            throw config_error("wk-validate needs a GSM pump for the closed form");
        GaussianSchellModel m;
        m.amplitude = cfg.num_or("pump.amplitude", 1.0);
        m.bandwidth = cfg.get_num("pump.bandwidth");
        std::string cw = cfg.get("pump.corr_width");
        if (cw == "inf") throw config_error("wk-validate needs a finite correlation width");
        m.corr_width = cfg.get_num("pump.corr_width");
        m.center = cfg.get_num("pump.center");
        m.validate();
        CrossSpectralDensity tab = CrossSpectralDensity::tabulate(
            m, cfg.has("grid.span")
                   ? FrequencyGrid(m.center, cfg.get_num("grid.span"), cfg.int_or("grid.points", 257))
                   : m.default_grid(cfg.int_or("grid.points", 257)));
        double lo = cfg.get_num("wkv.t_min"), hi = cfg.get_num("wkv.t_max");
        int n = cfg.get_int("wkv.points");
        report.columns = {"t1", "t2", "num_re", "num_im", "closed_re", "closed_im", "abs_err"};
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double t1 = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
                double t2 = n == 1 ? lo : lo + (hi - lo) * j / (n - 1);
                WkResult num = tab.wk_transform(t1, t2);
                double closed = m.temporal_correlation(t1, t2);
                warn_if(num.accuracy_warning, "wk accuracy warning at a lattice point");
                report.rows.push_back({t1, t2, num.value.real(), num.value.imag(), closed, 0.0,
                                       std::abs(num.value - closed)});
            }
    } else if (kind == RunKind::factorization_check) {
        CrossSpectralDensity pump = cfg.pump();
        SpectralResponse resp = cfg.response(pump.center());
        FrequencyGrid dg = cfg.d_grid(resp);
        PathwayPair paths = cfg.pathways();
        int count = cfg.int_or("fact.count", 10000);
        std::vector<std::pair<double, double>> pairs;
        for (double tb : cfg.get_list("fact.tbars"))
            for (double tt : cfg.get_list("fact.ttils"))
                pairs.emplace_back(tb + tt, tb - tt);
        auto oracle = gamma2_oracle_mc(pump, resp, paths, pairs, count, seed, dg, threads);
        report.columns = {"t_s", "t_i", "fact_re", "fact_im", "oracle_re", "oracle_im",
                          "std_error", "z"};
        for (const auto& o : oracle) {
            CoherenceSample f = gamma2_factorized(pump, resp, paths, o.sample.arg1,
                                                  o.sample.arg2, dg);
            warn_if(f.accuracy_warning, "quadrature accuracy warning in factorized value");
            double z = o.std_error > 0.0 ? std::abs(o.sample.value - f.value) / o.std_error : 0.0;
            report.rows.push_back({o.sample.arg1, o.sample.arg2, f.value.real(), f.value.imag(),
                                   o.sample.value.real(), o.sample.value.imag(), o.std_error, z});
        }
    } else {
        // the three sweep kinds share their scenario assembly
        CrossSpectralDensity pump = cfg.pump().tabulated();
        SpectralResponse resp = cfg.response(pump.center());
        FrequencyGrid dg = cfg.d_grid(resp);
        PathwayPair base = cfg.pathways();
        CouplingAmplitudes kap = cfg.couplings();
        AveragingWindows win = cfg.windows();
        double lo = cfg.get_num("sweep.min"), hi = cfg.get_num("sweep.max");
        int n = cfg.get_int("sweep.points");
        if (n < 1) throw config_error("sweep.points must be >= 1");
        SweepParameter param = kind == RunKind::hom_scan ? SweepParameter::dtau_prime
                                                         : SweepParameter::dtau;
        if (kind == RunKind::bound_sweep)
            report.columns = {"dtau", "concurrence", "gbar_p_abs", "slack"};
        else
            report.columns = {to_string(param), "rate", "gbar_p_abs", "gbar_d_abs"};
        for (int i = 0; i < n; ++i) {
            double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
            PathwayPair p = apply_sweep(base, param, x);
            TimeAveragedResult g = time_averaged_gamma2(pump, resp, p, win, dg);
            warn_if(g.accuracy_warning, "accuracy warning at sweep point " + detail::format17(x));
            if (kind == RunKind::bound_sweep) {
                PathwayDeltas d = p.deltas();
                TwoQubitXState st = build_two_qubit(kap, g.r2bar, g.gbar_p, g.gbar_d, d.dtau,
                                                    d.dtau_prime, d.dphi, pump.center(),
                                                    resp.difference_center());
                BoundReport br = verify_bound(st, g.gbar_p);
                report.rows.push_back({x, br.concurrence, br.bound, br.slack});
            } else {
                RateResult r = time_averaged_rate(pump, resp, p, kap, win, dg);
                report.rows.push_back({x, r.rate, std::abs(g.gbar_p), std::abs(g.gbar_d)});
            }
        }
    }

    report.wall_time_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start).count();
    std::string out = out_override ? *out_override : cfg.get("out");
    detail::write_report(report, out);
    return report;
}

}  // namespace pdcoh
